//! Sup-norm scaling of small smooth caps.
//!
//! For an even function with `||D^2 f||_inf <= 1` and `||f||_2 = eps`, one has
//! `||f||_inf <= C eps^{4/(d+3)}` and `||Df||_inf <= C eps^{2/(d+3)}`. Caps
//!
//! ```text
//!   f(theta) = kappa r^2 b(theta / r),   b(s) = (1 - s^2)^4 for |s| < 1,
//! ```
//!
//! plus the antipodal copy, with `kappa` chosen so that `||D^2 f||_inf = 1` saturate both bounds:
//! `sup f ~ r^2`, `sup |Df| ~ r` and `eps ~ r^{(d+3)/2}`. The experiment
//! measures the three quantities directly in the colatitude variable and
//! fits log-log exponents.

use serde::{Deserialize, Serialize};

use crate::body::sphere_area;
use crate::error::{Error, Result};
use crate::harmonics::norms::zonal_point_norms;
use crate::quadrature::gauss_jacobi_rule;
use crate::radon::least_squares_slope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub r: f64,
    pub epsilon: f64,
    pub sup: f64,
    pub grad_sup: f64,
    pub hess_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub dim: usize,
    pub rows: Vec<ScalingRow>,
    pub sup_exponent: f64,
    pub grad_exponent: f64,
    pub expected_sup: f64,
    pub expected_grad: f64,
}

impl ScalingReport {
    pub fn within(&self, tol: f64) -> bool {
        (self.sup_exponent - self.expected_sup).abs() <= tol
            && (self.grad_exponent - self.expected_grad).abs() <= tol
    }
}

/// Cap radii `0.5 * 0.6^j`, `j < 8`.
pub fn default_scales() -> Vec<f64> {
    (0..8).map(|j| 0.5 * 0.6f64.powi(j)).collect()
}

fn bump(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 1.0 - s * s;
    (
        u.powi(4),
        -8.0 * s * u.powi(3),
        -8.0 * u.powi(3) + 48.0 * s * s * u * u,
    )
}

fn cap_row(d: usize, r: f64, samples: usize, order: usize) -> Result<ScalingRow> {
    // theta-derivatives of the unnormalized cap r^2 b(theta / r)
    let derivs = |th: f64| {
        let (b, b1, b2) = bump(th / r);
        (r * r * b, r * b1, b2)
    };
    let (mut grad, mut hess) = (0.0f64, 0.0f64);
    for j in 0..samples {
        let th = (j as f64 + 0.5) * r / samples as f64;
        let (_, f1, f2) = derivs(th);
        let (g, h) = zonal_point_norms(th, f1, f2);
        grad = grad.max(g);
        hess = hess.max(h);
    }
    let kappa = 1.0 / hess;
    let rule = gauss_jacobi_rule(d, 0.0, order)?;
    let p = d as i32 - 2;
    let num: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(s, w)| {
            let th = 0.5 * r * (1.0 + s);
            w * derivs(th).0.powi(2) * th.sin().powi(p)
        })
        .sum::<f64>()
        * r
        * 2.0;
    // weights sum to one, so `2 sum w g` is the integral over [-1, 1]; the
    // antipodal cap doubles the result
    let total = sphere_area(d - 1) / sphere_area(d - 2);
    Ok(ScalingRow {
        r,
        epsilon: kappa * (num / total).sqrt(),
        sup: kappa * r * r,
        grad_sup: kappa * grad,
        hess_sup: 1.0,
    })
}

/// Fitted exponents of `sup f` and `sup |Df|` against `eps = ||f||_2`.
///
/// `resolution` is the number of colatitude samples used for the
/// derivative maxima.
pub fn lemma1_scaling_experiment(
    d: usize,
    scales: &[f64],
    resolution: usize,
) -> Result<ScalingReport> {
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    if scales
        .iter()
        .any(|&r| !(r > 0.0 && r < std::f64::consts::FRAC_PI_2))
    {
        return Err(Error::InvalidOption(
            "cap radii must lie in (0, pi/2)".into(),
        ));
    }
    let lo = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().copied().fold(0.0, f64::max);
    if scales.len() < 2 || hi <= lo * (1.0 + 1e-9) {
        return Err(Error::InvalidOption("degenerate cap family".into()));
    }
    if resolution < 8 {
        return Err(Error::InvalidOption("resolution must be at least 8".into()));
    }
    let order = (resolution / 8).clamp(16, 128);
    let rows = scales
        .iter()
        .map(|&r| cap_row(d, r, resolution, order))
        .collect::<Result<Vec<_>>>()?;
    let fit = |y: fn(&ScalingRow) -> f64| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|row| (row.epsilon.ln(), y(row).ln()))
            .collect();
        least_squares_slope(&pts)
    };
    Ok(ScalingReport {
        dim: d,
        sup_exponent: fit(|r| r.sup),
        grad_exponent: fit(|r| r.grad_sup),
        expected_sup: 4.0 / (d as f64 + 3.0),
        expected_grad: 2.0 / (d as f64 + 3.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{derivative_norms_fd_at, SphereFunction, ZonalProfile};

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn exponents_d3() {
        let rep = lemma1_scaling_experiment(3, &default_scales(), 2000).unwrap();
        assert!((rep.expected_sup - 2.0 / 3.0).abs() < 1e-15);
        assert!(rep.within(0.1), "{rep:?}");
    }

    #[test]
    fn exponents_other_dimensions() {
        for d in [4, 5] {
            let rep = lemma1_scaling_experiment(d, &default_scales(), 2000).unwrap();
            assert!(rep.within(0.1), "d={d} {rep:?}");
        }
    }

    #[test]
    fn resolution_stability() {
        let a = lemma1_scaling_experiment(3, &default_scales(), 1000).unwrap();
        let b = lemma1_scaling_experiment(3, &default_scales(), 2000).unwrap();
        assert!((a.sup_exponent - b.sup_exponent).abs() < 0.02);
        assert!((a.grad_exponent - b.grad_exponent).abs() < 0.02);
    }

    #[test]
    fn degenerate_families_rejected() {
        assert!(lemma1_scaling_experiment(3, &[0.1, 0.1], 100).is_err());
        assert!(lemma1_scaling_experiment(3, &[0.1], 100).is_err());
        assert!(lemma1_scaling_experiment(3, &[0.1, 2.0], 100).is_err());
    }

    #[test]
    fn l2_norm_against_simpson() {
        // d = 3, two caps: ||f||_2^2 = ∫_0^r f^2 sin(theta) dtheta
        let r = 0.3;
        let row = cap_row(3, r, 4000, 64).unwrap();
        let kappa = row.sup / (r * r);
        let f = |th: f64| kappa * r * r * bump(th / r).0;
        let direct = (simpson(|th| f(th).powi(2) * th.sin(), 0.0, r, 4000)).sqrt();
        assert!((direct - row.epsilon).abs() < 1e-12 * direct);
    }

    #[test]
    fn derivative_norms_against_finite_differences() {
        // band-limited projection of a wide cap is close to the cap itself
        let r = 1.2;
        let row = cap_row(3, r, 4000, 64).unwrap();
        let kappa = row.sup / (r * r);
        let g = ZonalProfile::from_fn(3, 120, |t| {
            kappa * r * r * bump(t.abs().min(1.0).acos() / r).0
        })
        .unwrap();
        let f = SphereFunction::Zonal(g);
        let mut grad = 0.0f64;
        let mut hess = 0.0f64;
        for j in 0..400 {
            let th = (j as f64 + 0.5) * r / 400.0;
            let (gn, hn) = derivative_norms_fd_at(&f, &[th.sin(), 0.0, th.cos()], 1e-4);
            grad = grad.max(gn);
            hess = hess.max(hn);
        }
        assert!(
            (grad - row.grad_sup).abs() < 1e-3,
            "{grad} {}",
            row.grad_sup
        );
        assert!((hess - 1.0).abs() < 1e-2, "{hess}");
    }
}
