//! Self-contained numerical checks, one per CLI subcommand.
//!
//! Every function is deterministic given its arguments (including the seed)
//! and returns a serializable report with a pass/fail verdict against a fixed
//! tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::body::{ellipsoid_body, ellipsoid_intersection_exact, intersection_body};
use crate::error::{Error, Result};
use crate::harmonics::{lm_index, theta_cutoff, Representation, SphereFunction, ZonalProfile};
use crate::radon::{
    least_squares_slope, radon_geometric, radon_geometric_zonal, radon_spectral, tail_ratio_slope,
    v_coefficient, RadonMultiplier,
};
use crate::scaling::{default_scales, lemma1_scaling_experiment, ScalingReport};

/// The common face of command reports.
pub trait Verdict {
    fn passed(&self) -> bool;
    /// One human-readable line.
    fn summary(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub d: usize,
    pub k: usize,
    pub spectral: f64,
    pub geometric: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCheckReport {
    pub rows: Vec<EigenRow>,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Verdict for EigenCheckReport {
    fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
    fn summary(&self) -> String {
        format!(
            "eigen-check: {} rows, max error {:.3e} (tol {:.0e})",
            self.rows.len(),
            self.max_error,
            self.tolerance
        )
    }
}

/// Geometric Radon of each `Z_k` against `mu_k`; the error also counts any
/// leakage into other degrees.
pub fn eigen_check(dims: &[usize], k_max: usize) -> Result<EigenCheckReport> {
    let mut rows = Vec::new();
    for &d in dims {
        let mult = RadonMultiplier::new(d, k_max)?;
        for k in 0..=k_max {
            let rz = radon_geometric_zonal(&ZonalProfile::basis(d, k_max, k)?)?;
            let abs_error = rz
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, a)| (a - if j == k { mult.get(k) } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            rows.push(EigenRow {
                d,
                k,
                spectral: mult.get(k),
                geometric: rz.coeffs()[k],
                abs_error,
            });
        }
    }
    let max_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(EigenCheckReport {
        rows,
        max_error,
        tolerance: 1e-8,
    })
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn n_coeffs(repr: Representation, band_limit: usize) -> usize {
    match repr {
        Representation::Zonal => band_limit + 1,
        Representation::S2 => (band_limit + 1) * (band_limit + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadonOracleReport {
    pub seed: u64,
    pub dim: usize,
    pub band_limit: usize,
    pub representation: Representation,
    pub trials: usize,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Verdict for RadonOracleReport {
    fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
    fn summary(&self) -> String {
        format!(
            "radon-oracle: d={} K={} {} trials, max |spectral - geometric| {:.3e} (tol {:.0e})",
            self.dim, self.band_limit, self.trials, self.max_error, self.tolerance
        )
    }
}

/// Spectral versus geometric Radon on random band-limited functions.
pub fn radon_oracle(
    seed: u64,
    repr: Representation,
    dim: usize,
    band_limit: usize,
    trials: usize,
) -> Result<RadonOracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = Vec::with_capacity(trials);
    for _ in 0..trials {
        let f = SphereFunction::from_coeffs(
            repr,
            dim,
            random_coeffs(&mut rng, n_coeffs(repr, band_limit)),
        )?;
        let diff = radon_spectral(&f).axpy(-1.0, &radon_geometric(&f)?)?;
        errors.push(diff.sup_norm());
    }
    Ok(RadonOracleReport {
        seed,
        dim,
        band_limit,
        representation: repr,
        trials,
        max_error: errors.iter().copied().fold(0.0, f64::max),
        errors,
        tolerance: 1e-8,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidReport {
    pub axes: Vec<f64>,
    pub band_limit: usize,
    pub representation: Representation,
    /// L2 truncation error of the input radial function.
    pub truncation: f64,
    pub rel_sup_error: f64,
    pub tolerance: f64,
}

impl Verdict for EllipsoidReport {
    fn passed(&self) -> bool {
        self.rel_sup_error <= self.tolerance
    }
    fn summary(&self) -> String {
        format!(
            "ellipsoid-check: axes {:?}, relative sup error {:.3e} (tol {:.0e})",
            self.axes, self.rel_sup_error, self.tolerance
        )
    }
}

/// `I(A B_d)` against the mean-normalized closed form `1 / |A xi|`, for
/// `A = diag(axes)`. Three axes use the `S^2` representation; longer lists
/// must have the form `(a, ..., a, b)` and use zonal profiles.
pub fn ellipsoid_check(axes: &[f64], band_limit: usize) -> Result<EllipsoidReport> {
    let d = axes.len();
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    let repr = if d == 3 {
        Representation::S2
    } else if axes[..d - 1].iter().all(|&a| a == axes[0]) {
        Representation::Zonal
    } else {
        return Err(Error::NotAxisymmetric);
    };
    let a = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(axes));
    let (body, truncation) = ellipsoid_body(&a, repr, band_limit)?;
    let numeric = intersection_body(&body)?.0.mean_normalized().0;
    let (exact, _) = ellipsoid_intersection_exact(&a, repr, band_limit)?;
    let diff = numeric.radial().axpy(-1.0, exact.radial())?;
    Ok(EllipsoidReport {
        axes: axes.to_vec(),
        band_limit,
        representation: repr,
        truncation,
        rel_sup_error: diff.sup_norm() / exact.radial().sup_norm(),
        tolerance: 1e-6,
    })
}

/// Named starting perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `(Z_4 + Z_6 + Z_8) / sqrt(3)`.
    Z4Mix,
    /// `Z_2`.
    H2Only,
    /// Random even degrees `4..=12`, unit L2 norm.
    RandomEven,
}

/// `phi_0 / epsilon`: a preset, or explicit `(degree, amplitude)` terms on
/// the zonal harmonics (`Y_{k,0}` on `S^2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Perturbation {
    Preset(Preset),
    Terms(Vec<(usize, f64)>),
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation::Preset(Preset::Z4Mix)
    }
}

/// `phi_0 = epsilon * shape`.
pub fn build_perturbation(
    p: &Perturbation,
    repr: Representation,
    dim: usize,
    band_limit: usize,
    epsilon: f64,
    seed: u64,
) -> Result<SphereFunction> {
    let zonal_index = |k: usize| match repr {
        Representation::Zonal => k,
        Representation::S2 => lm_index(k, 0),
    };
    let mut c = vec![0.0; n_coeffs(repr, band_limit)];
    let mut put = |k: usize, a: f64| -> Result<()> {
        if k % 2 == 1 {
            return Err(Error::OddDegree(k));
        }
        if k > band_limit {
            return Err(Error::BandLimit {
                degree: k,
                band_limit,
            });
        }
        c[zonal_index(k)] += a;
        Ok(())
    };
    match p {
        Perturbation::Preset(Preset::Z4Mix) => {
            for k in [4, 6, 8] {
                put(k, 1.0 / 3f64.sqrt())?;
            }
        }
        Perturbation::Preset(Preset::H2Only) => put(2, 1.0)?,
        Perturbation::Preset(Preset::RandomEven) => {
            let top = band_limit.min(12);
            if top < 4 {
                return Err(Error::BandLimit {
                    degree: 4,
                    band_limit,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in (4..=top).step_by(2) {
                match repr {
                    Representation::Zonal => c[k] = rng.random_range(-1.0..1.0),
                    Representation::S2 => {
                        for m in -(k as isize)..=k as isize {
                            c[lm_index(k, m)] = rng.random_range(-1.0..1.0);
                        }
                    }
                }
            }
            let n = c.iter().map(|a| a * a).sum::<f64>().sqrt();
            c.iter_mut().for_each(|a| *a /= n);
        }
        Perturbation::Terms(terms) => {
            for &(k, a) in terms {
                put(k, a)?;
            }
        }
    }
    c.iter_mut().for_each(|a| *a *= epsilon);
    SphereFunction::from_coeffs(repr, dim, c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierRow {
    pub n: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub fixes_polynomials: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub seed: u64,
    pub dim: usize,
    pub band_limit: usize,
    pub corpus_size: usize,
    pub rows: Vec<MultiplierRow>,
    pub max_ratio: f64,
    /// Log-log slope of the per-`n` maximum ratio.
    pub growth_slope: f64,
    /// The last three per-`n` maxima each grow by more than 5%.
    ///
    /// Ratios below 1 rise toward 1 as `M_n f -> f`; that saturation is not
    /// growth, so only a sustained rise at the large-`n` end counts.
    pub monotone_growth: bool,
    pub bound: f64,
}

impl Verdict for MultiplierReport {
    fn passed(&self) -> bool {
        self.max_ratio <= self.bound
            && !self.monotone_growth
            && self.rows.iter().all(|r| r.fixes_polynomials)
    }
    fn summary(&self) -> String {
        format!(
            "multiplier-bound: max ||M_n f||/||f|| = {:.4} (bound {}), growth slope {:.3}",
            self.max_ratio, self.bound, self.growth_slope
        )
    }
}

/// `n` values `4, 8, ..., 256`.
pub fn default_multiplier_ns() -> Vec<usize> {
    (2..=8).map(|j| 1usize << j).collect()
}

/// Sup-norm ratios `||M_n f||_inf / ||f||_inf` over a random zonal corpus
/// with coefficients `u_k / (1 + k)`, `u_k` uniform in `[-1, 1]`.
pub fn multiplier_bound(
    ns: &[usize],
    seed: u64,
    corpus_size: usize,
    dim: usize,
    band_limit: usize,
) -> Result<MultiplierReport> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::InvalidOption("n values must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus: Vec<SphereFunction> = (0..corpus_size)
        .map(|_| {
            let c = (0..=band_limit)
                .map(|k| rng.random_range(-1.0..1.0) / (1.0 + k as f64))
                .collect();
            SphereFunction::from_coeffs(Representation::Zonal, dim, c)
        })
        .collect::<Result<_>>()?;
    let sups: Vec<f64> = corpus.iter().map(|f| f.sup_norm()).collect();
    let mut rows = Vec::new();
    for &n in ns {
        let cut = theta_cutoff(n);
        let ratios: Vec<f64> = corpus
            .iter()
            .zip(&sups)
            .map(|(f, s)| f.map_degrees(|k, a| cut.weight(k) * a).sup_norm() / s)
            .collect();
        let top = n.min(band_limit);
        let p: Vec<f64> = (0..=band_limit)
            .map(|k| {
                if k <= top {
                    rng.random_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let poly = SphereFunction::from_coeffs(Representation::Zonal, dim, p)?;
        let fixes = poly.map_degrees(|k, a| cut.weight(k) * a).coeffs() == poly.coeffs();
        rows.push(MultiplierRow {
            n,
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            mean_ratio: ratios.iter().sum::<f64>() / ratios.len().max(1) as f64,
            fixes_polynomials: fixes,
        });
    }
    let growth_slope = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| ((r.n as f64).ln(), r.max_ratio.ln()))
            .collect();
        least_squares_slope(&pts)
    } else {
        0.0
    };
    let tail = &rows[rows.len().saturating_sub(3)..];
    let growing = tail.len() == 3
        && tail
            .windows(2)
            .all(|w| w[1].max_ratio > 1.05 * w[0].max_ratio);
    Ok(MultiplierReport {
        seed,
        dim,
        band_limit,
        corpus_size,
        max_ratio: rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max),
        monotone_growth: growing,
        growth_slope,
        rows,
        bound: 10.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub dim: usize,
    pub decay: f64,
    /// Fitted slope of `tail_n(Rf) / tail_n(f)` over `n in [8, 64]`.
    pub slope: f64,
    /// Target slope `-(d - 2)`.
    pub target: f64,
    pub tolerance: f64,
    /// Fitted exponent of `v_{d,k}` against `k` over even `k in [8, 64]`.
    pub multiplier_exponent: f64,
}

impl Verdict for SmoothingReport {
    fn passed(&self) -> bool {
        (self.slope - self.target).abs() <= self.tolerance
    }
    fn summary(&self) -> String {
        format!(
            "smoothing-gain: d={} slope {:.4} vs target {:.1} (tol {}), v_(d,k) exponent {:.4}",
            self.dim, self.slope, self.target, self.tolerance, self.multiplier_exponent
        )
    }
}

/// Tail-ratio slope for energies `e_k ∝ k^{-2 decay}` on even degrees.
pub fn smoothing_gain(d: usize, decay: f64) -> Result<SmoothingReport> {
    if !(decay > 0.5) {
        return Err(Error::InvalidOption(
            "decay must exceed 1/2 for a finite L2 norm".into(),
        ));
    }
    let slope = tail_ratio_slope(d, decay, 8, 64, 1 << 14)?;
    let pts: Vec<(f64, f64)> = (8..=64)
        .step_by(2)
        .map(|k| v_coefficient(d, k).map(|v| ((k as f64).ln(), v.ln())))
        .collect::<Result<_>>()?;
    Ok(SmoothingReport {
        dim: d,
        decay,
        slope,
        target: -(d as f64 - 2.0),
        tolerance: 0.3,
        multiplier_exponent: least_squares_slope(&pts),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub scaling: ScalingReport,
    pub resolution: usize,
    pub tolerance: f64,
}

impl Verdict for Lemma1Report {
    fn passed(&self) -> bool {
        self.scaling.within(self.tolerance)
    }
    fn summary(&self) -> String {
        let s = &self.scaling;
        format!(
            "lemma1-scaling: d={} sup exponent {:.4} (expect {:.4}), grad exponent {:.4} (expect {:.4})",
            s.dim, s.sup_exponent, s.expected_sup, s.grad_exponent, s.expected_grad
        )
    }
}

pub fn lemma1_scaling(d: usize, resolution: usize) -> Result<Lemma1Report> {
    Ok(Lemma1Report {
        scaling: lemma1_scaling_experiment(d, &default_scales(), resolution)?,
        resolution,
        tolerance: 0.1,
    })
}
