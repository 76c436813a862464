//! Iterating the intersection-body map near the ball.
//!
//! One corrected step takes `rho = 1 + phi` to
//!
//! ```text
//!   gamma * R((T rho)^{d-1}),   T = I + Q,   (Qx, x) = H_2^phi(x),
//! ```
//!
//! with `gamma` restoring mean 1. Linearized, the map multiplies the
//! degree-`k` part of `phi` by `(d-1)(-1)^{k/2} v_{d,k}`; that is `-1` on
//! degree 2 (the neutral ellipsoid directions, removed by `T`) and at most
//! `3/(d+1)` in modulus on degrees `>= 4`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::body::{apply_linear, intersection_body, LinearMap, StarBody};
use crate::error::{Error, Result};
use crate::harmonics::{derivative_sup_norms, u_alpha_norm, SphereFunction, ZonalProfile};
use crate::quadrature::integrate;
use crate::radon::RadonMultiplier;

/// Schema version of [`IterationReport`].
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    pub kill_h2: bool,
    /// Iterate `f -> R f^{d-1}` with no linear correction and no rescaling.
    pub raw_power_mode: bool,
    pub max_steps: usize,
    pub stop_tol: f64,
    /// Re-band the starting body; `None` keeps its band limit.
    pub band_limit: Option<usize>,
    /// Exponent of the tracked `U_alpha` norm.
    pub alpha: f64,
    /// Track `||rho||_inf + ||D rho||_inf + ||D^2 rho||_inf` each step.
    pub track_c2: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            kill_h2: true,
            raw_power_mode: false,
            max_steps: 10,
            stop_tol: 1e-13,
            band_limit: None,
            alpha: 4.0,
            track_c2: true,
        }
    }
}

impl IterationOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::InvalidOption("max_steps must be at least 1".into()));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::InvalidOption("stop_tol must be positive".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidOption("alpha must be nonnegative".into()));
        }
        if matches!(self.band_limit, Some(k) if k < 2) {
            return Err(Error::InvalidOption("band_limit must be at least 2".into()));
        }
        Ok(())
    }
}

/// Raw-mode extremes against `(1 -+ eps)^{(d-1)^k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub min: f64,
    pub max: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub m: usize,
    /// `||phi_m||_2` after the step.
    pub l2: f64,
    pub sup: f64,
    /// `||phi_m||_2 / ||phi_{m-1}||_2`.
    pub ratio: f64,
    pub gamma: f64,
    pub q: Vec<Vec<f64>>,
    pub q_norm: f64,
    /// Energy discarded when truncating `R(rho^{d-1})` back to the band limit.
    pub trunc_loss: f64,
    pub energies: Vec<f64>,
    pub u_alpha: f64,
    pub c2_norm: Option<f64>,
    pub envelope: Option<Envelope>,
}

/// The CSV view of a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub m: usize,
    pub l2: f64,
    pub sup: f64,
    pub ratio: f64,
    pub gamma: f64,
    pub q_norm: f64,
    pub trunc_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub version: u32,
    pub dim: usize,
    pub band_limit: usize,
    pub options: IterationOptions,
    pub initial_l2: f64,
    pub initial_sup: f64,
    pub initial_energies: Vec<f64>,
    pub steps: Vec<StepRecord>,
    /// Geometric mean of the last three ratios.
    pub asymptotic_ratio: Option<f64>,
    /// `3/(d+1)`, the largest linearized multiplier off degree 2.
    pub predicted_ratio: f64,
    /// `||phi_m||_2` nonincreasing from the first step on.
    pub monotone_after_first: bool,
    pub final_body: StarBody,
}

impl IterationReport {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        self.steps
            .iter()
            .map(|s| CsvRow {
                m: s.m,
                l2: s.l2,
                sup: s.sup,
                ratio: s.ratio,
                gamma: s.gamma,
                q_norm: s.q_norm,
                trunc_loss: s.trunc_loss,
            })
            .collect()
    }

    pub fn envelope_holds(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.envelope.is_none_or(|e| e.holds))
    }
}

/// `(d-1) mu_k`: the linearization of `phi -> I(1 + phi) - 1` on degree `k`.
pub fn linearized_spectrum(d: usize, band_limit: usize) -> Result<Vec<f64>> {
    let mult = RadonMultiplier::new(d, band_limit)?;
    Ok(mult.values.iter().map(|m| (d as f64 - 1.0) * m).collect())
}

/// `M_ij = ∫ phi x_i x_j dsigma`.
fn second_moments(phi: &SphereFunction) -> DMatrix<f64> {
    let d = phi.dim();
    match phi {
        SphereFunction::Zonal(g) => {
            let rule = g.space().rule.as_ref();
            let vals: Vec<f64> = g
                .node_values()
                .iter()
                .zip(&rule.nodes)
                .map(|(v, t)| v * t * t)
                .collect();
            let axial = integrate(&vals, rule).expect("own rule");
            let mean = integrate(g.node_values(), rule).expect("own rule");
            let mut m = DMatrix::from_element(d, d, 0.0);
            for i in 0..d - 1 {
                m[(i, i)] = (mean - axial) / (d as f64 - 1.0);
            }
            m[(d - 1, d - 1)] = axial;
            m
        }
        SphereFunction::S2(g) => {
            let grid = &g.space().grid;
            let pts = grid.points();
            let mut m = DMatrix::from_element(3, 3, 0.0);
            for ((x, v), w) in pts.iter().zip(g.grid_values()).zip(&grid.weights) {
                for i in 0..3 {
                    for j in 0..3 {
                        m[(i, j)] += w * v * x[i] * x[j];
                    }
                }
            }
            m
        }
    }
}

fn traceless(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    m - DMatrix::identity(d, d) * (m.trace() / d as f64)
}

/// The constant `c_d` in `Q = c_d (M - tr(M)/d I)`, calibrated on
/// `phi = x_d^2 - 1/d`, whose `Q` is `diag(-1/d, ..., -1/d, (d-1)/d)`.
pub fn q_calibration(d: usize) -> Result<f64> {
    let probe = ZonalProfile::from_fn(d, 2, |t| t * t - 1.0 / d as f64)?;
    let p = traceless(&second_moments(&probe.into()));
    Ok((d as f64 - 1.0) / d as f64 / p[(d - 1, d - 1)])
}

/// Traceless symmetric `Q` with `(Qx, x) = H_2^phi(x)` on the sphere.
pub fn fit_q(phi: &SphereFunction) -> Result<DMatrix<f64>> {
    let mean = phi.mean();
    if mean.abs() > 1e-10 * (1.0 + phi.l2_norm()) {
        return Err(Error::NotMeanZero(mean));
    }
    let c = q_calibration(phi.dim())?;
    let q = traceless(&second_moments(phi)) * c;
    Ok((&q + q.transpose()) * 0.5)
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// One step of the iteration; `m` labels the record.
pub fn iterate_step(
    body: &StarBody,
    opts: &IterationOptions,
    m: usize,
) -> Result<(StarBody, StepRecord)> {
    let d = body.dim();
    let phi = body.phi();
    let before = phi.l2_norm();
    let sup_before = phi.sup_norm();
    if sup_before >= 0.5 {
        return Err(Error::PerturbationTooLarge(sup_before));
    }
    let zero = DMatrix::from_element(d, d, 0.0);
    let (next, gamma, q, lost) = if opts.raw_power_mode {
        let (next, lost) = intersection_body(body)?;
        (next, 1.0, zero, lost)
    } else {
        let (start, q) = if opts.kill_h2 {
            let centered = phi.add_constant(-phi.mean());
            let q = fit_q(&centered)?;
            let qn = spectral_norm(&q);
            if qn >= 0.5 {
                return Err(Error::PerturbationTooLarge(qn));
            }
            let t = LinearMap::from_q(&q)?;
            (StarBody::new(apply_linear(body.radial(), &t)?)?, q)
        } else {
            (body.clone(), zero)
        };
        let (raw, lost) = intersection_body(&start)?;
        let (next, gamma) = raw.mean_normalized();
        (next, gamma, q, lost)
    };
    let phi_next = next.phi();
    let l2 = phi_next.l2_norm();
    let c2_norm = opts.track_c2.then(|| {
        let dn = derivative_sup_norms(next.radial());
        next.radial().sup_norm() + dn.first + dn.second
    });
    let record = StepRecord {
        m,
        l2,
        sup: phi_next.sup_norm(),
        ratio: if before > 0.0 { l2 / before } else { 0.0 },
        gamma,
        q_norm: spectral_norm(&q),
        q: matrix_rows(&q),
        trunc_loss: lost,
        energies: phi_next.spectrum().energies,
        u_alpha: u_alpha_norm(&phi_next, opts.alpha, next.band_limit()),
        c2_norm,
        envelope: None,
    };
    Ok((next, record))
}

/// Iterates until `||phi||_2 < stop_tol` or `max_steps`.
///
/// Corrected runs start from the mean-normalized body and abort with
/// [`Error::Diverged`] when `||phi||_2` doubles in one step. Raw runs always
/// take `max_steps` and record the envelope with `eps = ||rho_0 - 1||_inf`.
pub fn run_iteration(body: &StarBody, opts: &IterationOptions) -> Result<IterationReport> {
    opts.validate()?;
    let mut current = match opts.band_limit {
        Some(k) => StarBody::new(body.radial().with_band_limit(k).0)?,
        None => body.clone(),
    };
    if !opts.raw_power_mode {
        current = current.mean_normalized().0;
    }
    let d = current.dim();
    let phi0 = current.phi();
    let initial_l2 = phi0.l2_norm();
    let initial_sup = phi0.sup_norm();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut l2 = initial_l2;
    for m in 1..=opts.max_steps {
        if !opts.raw_power_mode && l2 < opts.stop_tol {
            break;
        }
        let (next, mut record) = iterate_step(&current, opts, m)?;
        if opts.raw_power_mode {
            let power = ((d - 1) as f64).powi(m as i32);
            let (min, max) = (next.radial().node_min(), next.radial().node_max());
            let lower = (1.0 - initial_sup).powf(power);
            let upper = (1.0 + initial_sup).powf(power);
            let slack = 1e-12;
            record.envelope = Some(Envelope {
                min,
                max,
                lower,
                upper,
                holds: min >= lower - slack && max <= upper + slack,
            });
        } else if record.l2 > 2.0 * l2 {
            return Err(Error::Diverged {
                step: m,
                before: l2,
                after: record.l2,
            });
        }
        l2 = record.l2;
        current = next;
        steps.push(record);
    }
    let asymptotic_ratio = (steps.len() >= 3).then(|| {
        let tail = &steps[steps.len() - 3..];
        tail.iter().map(|s| s.ratio).product::<f64>().cbrt()
    });
    let monotone_after_first = steps
        .windows(2)
        .all(|w| w[1].l2 <= w[0].l2 * (1.0 + 1e-12) + 1e-300);
    Ok(IterationReport {
        version: REPORT_VERSION,
        dim: d,
        band_limit: current.band_limit(),
        options: opts.clone(),
        initial_l2,
        initial_sup,
        initial_energies: phi0.spectrum().energies,
        steps,
        asymptotic_ratio,
        predicted_ratio: 3.0 / (d as f64 + 1.0),
        monotone_after_first,
        final_body: current,
    })
}

/// Upper bounds for the `L^2` and `L^inf` distances to the ball modulo `GL(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProxies {
    pub d2: f64,
    pub dinf: f64,
    pub evaluations: usize,
    /// The map achieving `d2`.
    pub best_map: Vec<Vec<f64>>,
}

/// Orthonormal basis of the traceless symmetric matrices the representation
/// is closed under.
fn traceless_basis(phi: &SphereFunction) -> Vec<DMatrix<f64>> {
    let d = phi.dim();
    match phi {
        SphereFunction::Zonal(_) => {
            let mut m = DMatrix::identity(d, d) * -1.0;
            m[(d - 1, d - 1)] = d as f64 - 1.0;
            let n = m.norm();
            vec![m / n]
        }
        SphereFunction::S2(_) => {
            let s2 = std::f64::consts::FRAC_1_SQRT_2;
            let s6 = 1.0 / 6f64.sqrt();
            let mut out = vec![
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![s2, -s2, 0.0])),
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![s6, s6, -2.0 * s6])),
            ];
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let mut m = DMatrix::from_element(3, 3, 0.0);
                m[(i, j)] = s2;
                m[(j, i)] = s2;
                out.push(m);
            }
            out
        }
    }
}

/// `||1 - rho'||` after the `H_2`-killing map and mean normalization, refined
/// by coordinate descent over symmetric `T = I + Q_fit + Q'` (at most 200
/// evaluations). Every evaluated `T` is an admissible competitor, so both
/// numbers bound the true infima from above.
pub fn distance_proxies(body: &StarBody) -> Result<DistanceProxies> {
    const MAX_EVALS: usize = 200;
    let d = body.dim();
    let rho = body.mean_normalized().0;
    let phi = rho.phi();
    let q0 = fit_q(&phi.add_constant(-phi.mean()))?;
    let eye = DMatrix::<f64>::identity(d, d);
    let mut evaluations = 0;
    let mut dinf = f64::INFINITY;
    let mut eval = |m: &DMatrix<f64>| -> f64 {
        evaluations += 1;
        let out = LinearMap::new(m.clone())
            .and_then(|t| apply_linear(rho.radial(), &t))
            .and_then(StarBody::new)
            .map(|b| b.mean_normalized().0.phi());
        match out {
            Ok(p) => {
                dinf = dinf.min(p.sup_norm());
                p.l2_norm()
            }
            Err(_) => f64::INFINITY,
        }
    };
    let mut best_map = eye.clone();
    let mut best = eval(&eye);
    let fitted = &eye + &q0;
    let v = eval(&fitted);
    if v < best {
        best = v;
        best_map = fitted.clone();
    }
    let basis = traceless_basis(body.radial());
    let mut step = best.max(1e-14);
    let floor = 1e-4 * best.max(1e-14);
    let mut center = best_map.clone();
    let mut count = 2;
    while count + 2 <= MAX_EVALS && step > floor {
        let mut improved = false;
        for b in &basis {
            for sign in [1.0, -1.0] {
                if count >= MAX_EVALS {
                    break;
                }
                let trial = &center + b * (sign * step);
                count += 1;
                let v = eval(&trial);
                if v < best {
                    best = v;
                    center = trial.clone();
                    best_map = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(DistanceProxies {
        d2: best,
        dinf,
        evaluations,
        best_map: matrix_rows(&best_map),
    })
}
