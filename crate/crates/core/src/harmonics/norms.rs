//! Sup norms and derivative sup norms on refined evaluation grids.
//!
//! Sup norms use a grid four times finer than the quadrature grid, followed
//! by one parabolic polish around the largest sample. Derivatives are those
//! of the degree-0 homogeneous extension `f(x / |x|)`, restricted to the
//! sphere: the first differential is the tangential gradient, and the second
//! differential at a unit vector `x` has the block form
//!
//! ```text
//!   H(x, x) = 0,   H(x, v) = -<grad f, v>,   H(v, w) = Hess_S f(v, w)
//! ```
//!
//! for tangent `v, w`, where `Hess_S` is the covariant Hessian on the sphere.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use super::SphereFunction;

const REFINE: usize = 4;

/// Sup norms of the first and second differentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeNorms {
    pub first: f64,
    pub second: f64,
}

fn parabola_vertex(xm: f64, x0: f64, xp: f64, ym: f64, y0: f64, yp: f64) -> Option<f64> {
    let denom = (x0 - xm) * (x0 - xp) * (xm - xp);
    if denom == 0.0 {
        return None;
    }
    let a = (xp * (y0 - ym) + x0 * (ym - yp) + xm * (yp - y0)) / denom;
    let b = (xp * xp * (ym - y0) + x0 * x0 * (yp - ym) + xm * xm * (y0 - yp)) / denom;
    if a == 0.0 {
        return None;
    }
    let v = -b / (2.0 * a);
    (v > xm && v < xp).then_some(v)
}

fn argmax_abs(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold(
        (0, 0.0),
        |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) },
    )
}

/// `||f||_inf` estimated on the refined grid with a local parabolic polish.
pub fn sup_norm(f: &SphereFunction) -> f64 {
    match f {
        SphereFunction::Zonal(g) => {
            let n = REFINE * g.space().len().max(2);
            let thetas: Vec<f64> = (0..n).map(|j| j as f64 * PI / (n - 1) as f64).collect();
            let vals: Vec<f64> = thetas.iter().map(|t| g.eval(t.cos())).collect();
            let (j, best) = argmax_abs(&vals);
            if j == 0 || j == n - 1 {
                return best;
            }
            match parabola_vertex(
                thetas[j - 1],
                thetas[j],
                thetas[j + 1],
                vals[j - 1],
                vals[j],
                vals[j + 1],
            ) {
                Some(th) => best.max(g.eval(th.cos()).abs()),
                None => best,
            }
        }
        SphereFunction::S2(g) => {
            let nt = REFINE * g.space().grid.n_theta.max(2);
            let np = REFINE * g.space().grid.n_phi;
            let thetas: Vec<f64> = (0..nt).map(|j| j as f64 * PI / (nt - 1) as f64).collect();
            let phis: Vec<f64> = (0..np).map(|j| 2.0 * PI * j as f64 / np as f64).collect();
            let vals = g.eval_tensor(&thetas, &phis);
            let (idx, best) = argmax_abs(&vals);
            let (i, j) = (idx / np, idx % np);
            if i == 0 || i == nt - 1 {
                return best;
            }
            let at = |a: usize, b: usize| vals[a * np + b];
            let th = parabola_vertex(
                thetas[i - 1],
                thetas[i],
                thetas[i + 1],
                at(i - 1, j),
                at(i, j),
                at(i + 1, j),
            )
            .unwrap_or(thetas[i]);
            let (jm, jp) = ((j + np - 1) % np, (j + 1) % np);
            let h = 2.0 * PI / np as f64;
            let ph = parabola_vertex(-h, 0.0, h, at(i, jm), at(i, j), at(i, jp))
                .map(|dv| phis[j] + dv)
                .unwrap_or(phis[j]);
            let (st, ct) = th.sin_cos();
            let x = [st * ph.cos(), st * ph.sin(), ct];
            best.max(g.eval(x).abs())
        }
    }
}

/// Largest absolute eigenvalue of `[[0, b], [b, c]]`.
fn block_norm(b: f64, c: f64) -> f64 {
    0.5 * c.abs() + (0.25 * c * c + b * b).sqrt()
}

/// Gradient norm and second-differential operator norm for a zonal profile
/// given its `theta`-derivatives at colatitude `theta`.
pub(crate) fn zonal_point_norms(theta: f64, f_t: f64, f_tt: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let transverse = if st > 0.0 {
        (ct / st * f_t).abs()
    } else {
        f_tt.abs()
    };
    (f_t.abs(), block_norm(f_t, f_tt).max(transverse))
}

fn s2_point_norms(d: &super::s2::GridDerivatives, k: usize, theta: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let cot = ct / st;
    let g_t = d.f_t[k];
    let g_p = d.f_p[k] / st;
    let h_tt = d.f_tt[k];
    let h_tp = (d.f_tp[k] - cot * d.f_p[k]) / st;
    let h_pp = d.f_pp[k] / (st * st) + cot * d.f_t[k];
    let m = Matrix3::new(0.0, -g_t, -g_p, -g_t, h_tt, h_tp, -g_p, h_tp, h_pp);
    let op = m
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    ((g_t * g_t + g_p * g_p).sqrt(), op)
}

/// Midpoint colatitudes and equiangular longitudes of the refined grid.
fn derivative_grid(f: &SphereFunction) -> (Vec<f64>, Vec<f64>) {
    let (nt, np) = match f {
        SphereFunction::Zonal(g) => (REFINE * g.space().len().max(2), 1),
        SphereFunction::S2(g) => (
            REFINE * g.space().grid.n_theta.max(2),
            REFINE * g.space().grid.n_phi,
        ),
    };
    let thetas = (0..nt).map(|j| (j as f64 + 0.5) * PI / nt as f64).collect();
    let phis = (0..np).map(|j| 2.0 * PI * j as f64 / np as f64).collect();
    (thetas, phis)
}

/// Maximum of each component over the grid, then one parabolic polish in
/// `theta` (and `phi` when the grid has longitudes) evaluated through `at`.
fn polished_max<F: Fn(f64, f64) -> (f64, f64)>(
    thetas: &[f64],
    phis: &[f64],
    values: &[(f64, f64)],
    at: F,
) -> DerivativeNorms {
    let (nt, np) = (thetas.len(), phis.len());
    let mut best = [0.0f64; 2];
    for c in 0..2 {
        let comp = |k: usize| if c == 0 { values[k].0 } else { values[k].1 };
        let idx = (0..values.len()).fold(0, |b, k| if comp(k) > comp(b) { k } else { b });
        best[c] = comp(idx);
        let (i, j) = (idx / np, idx % np);
        let mut th = thetas[i];
        if i > 0 && i + 1 < nt {
            let (a, b) = ((i - 1) * np + j, (i + 1) * np + j);
            th = parabola_vertex(
                thetas[i - 1],
                thetas[i],
                thetas[i + 1],
                comp(a),
                comp(idx),
                comp(b),
            )
            .unwrap_or(th);
        }
        let mut ph = phis[j];
        if np > 2 {
            let h = 2.0 * PI / np as f64;
            let (a, b) = (i * np + (j + np - 1) % np, i * np + (j + 1) % np);
            ph = parabola_vertex(-h, 0.0, h, comp(a), comp(idx), comp(b))
                .map(|dv| phis[j] + dv)
                .unwrap_or(ph);
        }
        let v = at(th, ph);
        best[c] = best[c].max(if c == 0 { v.0 } else { v.1 });
    }
    DerivativeNorms {
        first: best[0],
        second: best[1],
    }
}

/// Sup norms of `Df` and `D^2 f` from analytic differentiation of the basis.
pub fn derivative_sup_norms(f: &SphereFunction) -> DerivativeNorms {
    let (thetas, phis) = derivative_grid(f);
    match f {
        SphereFunction::Zonal(g) => {
            let at = |th: f64, _: f64| {
                let (st, ct) = th.sin_cos();
                let (_, d1, d2) = g.eval_with_derivatives(ct);
                zonal_point_norms(th, -st * d1, st * st * d2 - ct * d1)
            };
            let values: Vec<_> = thetas.iter().map(|&th| at(th, 0.0)).collect();
            polished_max(&thetas, &phis, &values, at)
        }
        SphereFunction::S2(g) => {
            let d = g.eval_tensor_derivatives(&thetas, &phis);
            let np = phis.len();
            let values: Vec<_> = (0..d.f.len())
                .map(|k| s2_point_norms(&d, k, thetas[k / np]))
                .collect();
            let at =
                |th: f64, ph: f64| s2_point_norms(&g.eval_tensor_derivatives(&[th], &[ph]), 0, th);
            polished_max(&thetas, &phis, &values, at)
        }
    }
}

/// Centered finite differences of `f(y / |y|)` at `x` in `R^d`: returns the
/// gradient norm and the operator norm of the Hessian.
pub fn derivative_norms_fd_at(f: &SphereFunction, x: &[f64], h: f64) -> (f64, f64) {
    let d = x.len();
    let at = |shift: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shift {
            y[i] += s;
        }
        f.eval(&y)
    };
    let f0 = at(&[]);
    let mut grad = vec![0.0; d];
    let mut hess = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let (fp, fm) = (at(&[(i, h)]), at(&[(i, -h)]));
        grad[i] = (fp - fm) / (2.0 * h);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let hnorm = hess
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    (gnorm, hnorm)
}

/// Finite-difference counterpart of [`derivative_sup_norms`] on the same
/// sample points and polish (step `1e-4`).
pub fn derivative_sup_norms_fd(f: &SphereFunction) -> DerivativeNorms {
    let h = 1e-4;
    let (thetas, phis) = derivative_grid(f);
    let at = |th: f64, ph: f64| {
        let (st, ct) = th.sin_cos();
        let x = match f {
            SphereFunction::Zonal(g) => {
                let mut x = vec![0.0; g.dim()];
                x[0] = st;
                x[g.dim() - 1] = ct;
                x
            }
            SphereFunction::S2(_) => vec![st * ph.cos(), st * ph.sin(), ct],
        };
        derivative_norms_fd_at(f, &x, h)
    };
    let values: Vec<_> = thetas
        .iter()
        .flat_map(|&th| phis.iter().map(move |&ph| (th, ph)))
        .map(|(th, ph)| at(th, ph))
        .collect();
    polished_max(&thetas, &phis, &values, at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{Representation, S2Function, ZonalProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_has_zero_derivatives() {
        for f in [
            SphereFunction::constant(Representation::Zonal, 5, 6, 1.0).unwrap(),
            SphereFunction::constant(Representation::S2, 3, 6, 1.0).unwrap(),
        ] {
            let n = derivative_sup_norms(&f);
            assert!(n.first < 1e-12 && n.second < 1e-12, "{n:?}");
            assert!((sup_norm(&f) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cos_squared_gradient_is_sin_two_theta() {
        // |grad (x3^2 - 1/3)| = |sin 2 theta|, maximal value 1
        let z = ZonalProfile::from_fn(3, 4, |t| t * t - 1.0 / 3.0).unwrap();
        let n = derivative_sup_norms(&SphereFunction::Zonal(z));
        assert!((n.first - 1.0).abs() < 1e-4, "{n:?}");
        let s = S2Function::from_fn(4, |x| x[2] * x[2] - 1.0 / 3.0).unwrap();
        let n = derivative_sup_norms(&SphereFunction::S2(s));
        assert!((n.first - 1.0).abs() < 1e-4, "{n:?}");
    }

    #[test]
    fn analytic_and_finite_difference_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [3, 4, 6] {
            let c: Vec<f64> = (0..=8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = SphereFunction::Zonal(ZonalProfile::from_coeffs(d, c).unwrap());
            let a = derivative_sup_norms(&f);
            let b = derivative_sup_norms_fd(&f);
            assert!((a.first - b.first).abs() <= 1e-4 * a.first, "{a:?} {b:?}");
            assert!(
                (a.second - b.second).abs() <= 1e-4 * a.second,
                "{a:?} {b:?}"
            );
        }
        let c: Vec<f64> = (0..36).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = SphereFunction::S2(S2Function::from_coeffs(c).unwrap());
        let a = derivative_sup_norms(&f);
        let b = derivative_sup_norms_fd(&f);
        assert!((a.first - b.first).abs() <= 1e-4 * a.first, "{a:?} {b:?}");
        assert!(
            (a.second - b.second).abs() <= 1e-4 * a.second,
            "{a:?} {b:?}"
        );
    }

    #[test]
    fn sup_norm_of_known_profiles() {
        // Z_2 in d = 3 peaks at the poles with value sqrt(5)
        let z2 = SphereFunction::Zonal(ZonalProfile::basis(3, 8, 2).unwrap());
        assert!((sup_norm(&z2) - 5f64.sqrt()).abs() < 1e-12);
        // x1 x2 peaks at 1/2 on the equator between axes
        let s = SphereFunction::S2(S2Function::from_fn(3, |x| x[0] * x[1]).unwrap());
        assert!((sup_norm(&s) - 0.5).abs() < 1e-6);
    }
}
