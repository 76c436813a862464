//! The spherical Radon transform, normalized so that `R 1 = 1`.
//!
//! `Rf(xi)` is the average of `f` over the great subsphere `S^{d-1} ∩ xi^⊥`.
//! On even harmonics of degree `k` it acts as multiplication by
//! `(-1)^{k/2} v_{d,k}` with
//!
//! ```text
//!   v_{d,k} = (1 * 3 * ... * (k-1)) / ((d-1)(d+1) ... (d+k-3)),
//! ```
//!
//! and it annihilates odd harmonics (the subsphere is centrally symmetric).
//! [`radon_spectral`] applies that multiplier; [`radon_geometric`] averages
//! over subspheres by quadrature and serves as an independent check.
//!
//! ```
//! use ibody::radon::v_coefficient;
//!
//! // the neutral degree-2 mode: (d-1) v_{d,2} = 1
//! for d in 3..12 {
//!     let v2 = v_coefficient(d, 2).unwrap();
//!     assert!(((d as f64 - 1.0) * v2 - 1.0).abs() < 1e-15);
//! }
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonics::{S2Function, SphereFunction, ZonalProfile};
use crate::quadrature::{cached_jacobi_rule, subsphere_exponent};

/// `v_{d,k}` for even `k`, by the ratio recurrence `v_{d,k} = v_{d,k-2} (k-1)/(d+k-3)`.
pub fn v_coefficient(d: usize, k: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    if k % 2 == 1 {
        return Err(Error::OddDegree(k));
    }
    let mut v = 1.0;
    for j in (2..=k).step_by(2) {
        v *= (j as f64 - 1.0) / ((d + j) as f64 - 3.0);
    }
    Ok(v)
}

/// Per-degree eigenvalues `mu_k` of the normalized Radon transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonMultiplier {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl RadonMultiplier {
    pub fn new(dim: usize, band_limit: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Dimension(dim));
        }
        let mut values = vec![0.0; band_limit + 1];
        let mut v = 1.0;
        for (k, mu) in values.iter_mut().enumerate() {
            if k % 2 == 0 {
                if k >= 2 {
                    v *= (k as f64 - 1.0) / ((dim + k) as f64 - 3.0);
                }
                *mu = if (k / 2) % 2 == 0 { v } else { -v };
            }
        }
        Ok(Self { dim, values })
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Applies the multiplier to a zonal coefficient vector.
    pub fn apply_zonal(&self, coeffs: &[f64]) -> Vec<f64> {
        coeffs
            .iter()
            .zip(&self.values)
            .map(|(a, m)| a * m)
            .collect()
    }
}

/// `R f` in coefficient space.
pub fn radon_spectral(f: &SphereFunction) -> SphereFunction {
    let mult = RadonMultiplier::new(f.dim(), f.band_limit()).expect("valid dimension");
    f.map_degrees(|k, a| mult.get(k) * a)
}

/// Subsphere average for zonal input.
///
/// For `xi` with axial coordinate `t`, a uniform point of `S^{d-1} ∩ xi^⊥`
/// has axial coordinate `sqrt(1 - t^2) s` with `s` distributed as one
/// coordinate of a uniform point on `S^{d-2}`, i.e. with density
/// `∝ (1 - s^2)^{(d-4)/2}`.
pub fn radon_geometric_zonal(f: &ZonalProfile) -> Result<ZonalProfile> {
    let d = f.dim();
    let sub = cached_jacobi_rule(d, subsphere_exponent(d), f.band_limit() + 2)?;
    let space = f.space().clone();
    let values = space
        .nodes()
        .iter()
        .map(|&t| {
            let r = (1.0 - t * t).max(0.0).sqrt();
            sub.integrate_fn(|s| f.eval(r * s))
        })
        .collect();
    ZonalProfile::from_node_values(space, values)
}

/// Two unit vectors completing `xi` to an orthonormal frame.
pub(crate) fn orthonormal_complement(xi: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if xi[0].abs() < 0.6 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let dot = helper[0] * xi[0] + helper[1] * xi[1] + helper[2] * xi[2];
    let mut u = [
        helper[0] - dot * xi[0],
        helper[1] - dot * xi[1],
        helper[2] - dot * xi[2],
    ];
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|c| *c /= n);
    let v = [
        xi[1] * u[2] - xi[2] * u[1],
        xi[2] * u[0] - xi[0] * u[2],
        xi[0] * u[1] - xi[1] * u[0],
    ];
    (u, v)
}

/// Uniform average of `f` over the great circle orthogonal to `xi`,
/// by an `m`-point trapezoid rule.
pub fn great_circle_average<F: Fn([f64; 3]) -> f64>(f: F, xi: [f64; 3], m: usize) -> f64 {
    let (u, v) = orthonormal_complement(xi);
    (0..m)
        .map(|j| {
            let (s, c) = (2.0 * PI * j as f64 / m as f64).sin_cos();
            f([
                c * u[0] + s * v[0],
                c * u[1] + s * v[1],
                c * u[2] + s * v[2],
            ])
        })
        .sum::<f64>()
        / m as f64
}

/// Great-circle averages on `S^2`, exact for band-limited input.
pub fn radon_geometric_s2(f: &S2Function) -> Result<S2Function> {
    let space = f.space().clone();
    let m = 2 * f.band_limit() + 2;
    let values = space
        .grid
        .points()
        .into_iter()
        .map(|xi| great_circle_average(|x| f.eval(x), xi, m))
        .collect();
    S2Function::from_grid_values(space, values)
}

pub fn radon_geometric(f: &SphereFunction) -> Result<SphereFunction> {
    Ok(match f {
        SphereFunction::Zonal(g) => radon_geometric_zonal(g)?.into(),
        SphereFunction::S2(g) => radon_geometric_s2(g)?.into(),
    })
}

/// Log-log slope of `tail_n(Rf) / tail_n(f)` against `n` over `[n_lo, n_hi]`
/// for an even spectrum with energies `e_k ∝ k^{-2 beta}` up to `k_max`.
///
/// Works on the spectrum directly, so `k_max` can be far beyond any grid.
pub fn tail_ratio_slope(
    d: usize,
    beta: f64,
    n_lo: usize,
    n_hi: usize,
    k_max: usize,
) -> Result<f64> {
    let mult = RadonMultiplier::new(d, k_max)?;
    let energies: Vec<f64> = (0..=k_max)
        .map(|k| {
            if k >= 2 && k % 2 == 0 {
                (k as f64).powf(-2.0 * beta)
            } else {
                0.0
            }
        })
        .collect();
    // suffix sums
    let mut tail_f = vec![0.0; k_max + 2];
    let mut tail_rf = vec![0.0; k_max + 2];
    for k in (0..=k_max).rev() {
        tail_f[k] = tail_f[k + 1] + energies[k];
        tail_rf[k] = tail_rf[k + 1] + energies[k] * mult.get(k).powi(2);
    }
    let points: Vec<(f64, f64)> = (n_lo..=n_hi)
        .map(|n| {
            let ratio = (tail_rf[n + 1] / tail_f[n + 1]).sqrt();
            ((n as f64).ln(), ratio.ln())
        })
        .collect();
    Ok(least_squares_slope(&points))
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
