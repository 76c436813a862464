//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use ibody::body::StarBody;
use ibody::experiments::{
    build_perturbation, default_multiplier_ns, eigen_check, ellipsoid_check, lemma1_scaling,
    multiplier_bound, smoothing_gain, Perturbation, Preset, Verdict,
};
use ibody::harmonics::{s2_space, zonal_space, Representation, SphereFunction, ZonalProfile};
use ibody::iteration::{iterate_step, run_iteration, IterationOptions};
use ibody::radon::{radon_geometric, radon_spectral, v_coefficient};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), ibody::Error>;

fn radon_eigenvalues() -> Outcome {
    let start = Instant::now();
    let rep = eigen_check(&[3, 4, 5, 7], 20)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        rep.passed() && secs < 10.0,
        format!(
            "max error {:.2e} (tol 1e-8), {secs:.2}s (limit 10s)",
            rep.max_error
        ),
    ))
}

fn exact_identities() -> Outcome {
    let mut r1 = 0.0f64;
    for d in [3, 4, 5, 7, 10] {
        let one = SphereFunction::constant(Representation::Zonal, d, 12, 1.0)?;
        for f in [radon_spectral(&one), radon_geometric(&one)?] {
            r1 = r1.max(
                f.node_values()
                    .iter()
                    .map(|v| (v - 1.0).abs())
                    .fold(0.0, f64::max),
            );
        }
    }
    let one = SphereFunction::constant(Representation::S2, 3, 8, 1.0)?;
    for f in [radon_spectral(&one), radon_geometric(&one)?] {
        r1 = r1.max(
            f.node_values()
                .iter()
                .map(|v| (v - 1.0).abs())
                .fold(0.0, f64::max),
        );
    }
    let (mut e2, mut e4) = (0.0f64, 0.0f64);
    for d in 3..=50 {
        let n = d as f64;
        e2 = e2.max(((n - 1.0) * v_coefficient(d, 2)? - 1.0).abs());
        e4 = e4.max(((n - 1.0) * v_coefficient(d, 4)? - 3.0 / (n + 1.0)).abs());
    }
    Ok((
        r1 <= 1e-13 && e2 <= 1e-15 && e4 <= 1e-15,
        format!("|R1 - 1| {r1:.1e}, |(d-1)v2 - 1| {e2:.1e}, |(d-1)v4 - 3/(d+1)| {e4:.1e}"),
    ))
}

fn fixed_point() -> Outcome {
    let opts = IterationOptions::default();
    let mut worst = 0.0f64;
    for (repr, d, k) in [
        (Representation::Zonal, 3, 16),
        (Representation::Zonal, 5, 12),
        (Representation::S2, 3, 8),
    ] {
        let mut body = StarBody::ball(repr, d, k)?;
        for m in 1..=20 {
            body = iterate_step(&body, &opts, m)?.0;
            worst = worst.max(body.phi().sup_norm());
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max ||rho - 1||_inf over 20 steps {worst:.1e} (tol 1e-12)"),
    ))
}

fn ellipsoid_law() -> Outcome {
    let rep = ellipsoid_check(&[1.2, 1.0, 0.8], 32)?;
    Ok((
        rep.passed(),
        format!("relative sup error {:.2e} (tol 1e-6)", rep.rel_sup_error),
    ))
}

fn contraction_rate() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (d, target) in [(3usize, 0.75), (4, 0.60)] {
        let start = Instant::now();
        let terms: Vec<(usize, f64)> = (4..=12)
            .step_by(2)
            .map(|k| (k, 1.0 / 5f64.sqrt()))
            .collect();
        let phi = build_perturbation(
            &Perturbation::Terms(terms),
            Representation::Zonal,
            d,
            24,
            1e-3,
            0,
        )?;
        let opts = IterationOptions {
            max_steps: 10,
            ..Default::default()
        };
        let rep = run_iteration(&StarBody::from_perturbation(&phi)?, &opts)?;
        let secs = start.elapsed().as_secs_f64();
        let ratios: Vec<f64> = rep.steps.iter().map(|s| s.ratio).collect();
        let last = *ratios.last().unwrap_or(&f64::NAN);
        let monotone = ratios.windows(2).all(|w| w[1] >= w[0] - 1e-3);
        let this =
            monotone && (last - target).abs() <= 0.02 && rep.steps.len() <= 10 && secs < 30.0;
        ok &= this;
        notes.push(format!("d={d}: final ratio {last:.4} (target {target} +- 0.02), monotone {monotone}, {secs:.2}s"));
    }
    Ok((ok, notes.join("; ")))
}

fn neutral_mode() -> Outcome {
    let eps = 1e-4;
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [3, 4] {
        let phi = SphereFunction::Zonal(ZonalProfile::basis(d, 12, 2)?).scale(eps);
        let body = StarBody::from_perturbation(&phi)?;
        let no_kill = IterationOptions {
            kill_h2: false,
            ..Default::default()
        };
        let flipped = iterate_step(&body, &no_kill, 1)?.0.phi().coeffs()[2] / eps;
        let killed = iterate_step(&body, &IterationOptions::default(), 1)?
            .1
            .energies[2];
        let this = (flipped + 1.0).abs() <= 1e-2 && killed <= 10.0 * eps * eps;
        ok &= this;
        notes.push(format!(
            "d={d}: a2 ratio {flipped:.6}, killed e2 {killed:.1e} (limit {:.0e})",
            10.0 * eps * eps
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn smoothing_exponent() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [3, 4, 5] {
        let rep = smoothing_gain(d, 1.0)?;
        ok &= rep.passed();
        notes.push(format!(
            "d={d}: slope {:.3} vs {:.0}",
            rep.slope, rep.target
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn multiplier_boundedness() -> Outcome {
    let rep = multiplier_bound(&default_multiplier_ns(), 2024, 50, 3, 128)?;
    let fixes = rep.rows.iter().all(|r| r.fixes_polynomials);
    Ok((
        rep.passed(),
        format!(
            "max ratio {:.4} (bound 10), growth {}, fixes polynomials {fixes}",
            rep.max_ratio, rep.monotone_growth
        ),
    ))
}

fn lemma1() -> Outcome {
    let rep = lemma1_scaling(3, 2000)?;
    let s = &rep.scaling;
    Ok((
        rep.passed(),
        format!(
            "exponents {:.4} (expect {:.4}) and {:.4} (expect {:.4}), tol 0.1",
            s.sup_exponent, s.expected_sup, s.grad_exponent, s.expected_grad
        ),
    ))
}

fn transform_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut round, mut parseval) = (0.0f64, 0.0f64);
    for k in [8, 16, 32, 64] {
        for d in [3, 4, 5, 7] {
            let space = zonal_space(d, k)?;
            let c: Vec<f64> = (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let back = space.analyze(&space.synthesize(&c)?)?;
            round = round.max(
                c.iter()
                    .zip(&back)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
            let f = SphereFunction::from_coeffs(Representation::Zonal, d, c.clone())?;
            parseval =
                parseval.max((f.l2_norm().powi(2) - c.iter().map(|a| a * a).sum::<f64>()).abs());
        }
        let space = s2_space(k)?;
        let n = (k + 1) * (k + 1);
        let c: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-1.0..1.0) / (n as f64).sqrt())
            .collect();
        let back = space.analyze(&space.synthesize(&c)?)?;
        round = round.max(
            c.iter()
                .zip(&back)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        let f = SphereFunction::from_coeffs(Representation::S2, 3, c.clone())?;
        parseval = parseval.max((f.l2_norm().powi(2) - c.iter().map(|a| a * a).sum::<f64>()).abs());
    }
    let opts = IterationOptions {
        raw_power_mode: true,
        max_steps: 4,
        ..Default::default()
    };
    let mut envelope = true;
    for (repr, d, k) in [
        (Representation::Zonal, 3, 16),
        (Representation::Zonal, 4, 12),
        (Representation::S2, 3, 12),
    ] {
        let shape = build_perturbation(
            &Perturbation::Preset(Preset::RandomEven),
            repr,
            d,
            k,
            1.0,
            3,
        )?;
        let phi = shape.scale(0.05 / shape.sup_norm());
        let rep = run_iteration(&StarBody::from_perturbation(&phi)?, &opts)?;
        envelope &=
            rep.steps.len() == 4 && rep.envelope_holds() && (rep.initial_sup - 0.05).abs() < 1e-9;
    }
    Ok((
        round <= 1e-12 && parseval <= 1e-10 && envelope,
        format!("round-trip {round:.1e} (tol 1e-12), Parseval {parseval:.1e} (tol 1e-10), raw envelope k<=4 holds {envelope}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("radon eigenvalue oracle", radon_eigenvalues),
        ("exact identities", exact_identities),
        ("ball fixed point", fixed_point),
        ("ellipsoid law", ellipsoid_law),
        ("contraction rate", contraction_rate),
        ("neutral degree-2 mode", neutral_mode),
        ("smoothing exponent", smoothing_exponent),
        ("multiplier boundedness", multiplier_boundedness),
        ("cap scaling exponents", lemma1),
        ("transform hygiene", transform_hygiene),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
