//! Quadrature on the sphere with respect to the normalized surface measure.
//!
//! Every rule here integrates against a probability measure: the weights sum
//! to one, so the mean of a function is just its integral and `R 1 = 1`
//! needs no area constants.
//!
//! Zonal integrands on `S^{d-1}` reduce to one-dimensional integrals against
//! the density proportional to `(1 - t^2)^{(d-3)/2}` on `[-1, 1]`, where `t`
//! is the coordinate along the symmetry axis. Averages over a great subsphere
//! `S^{d-2}` use the exponent `(d-4)/2` instead. Both are symmetric Jacobi
//! weights, handled by [`gauss_jacobi_rule`].
//!
//! ```
//! use ibody::quadrature::gauss_jacobi_rule;
//!
//! // E[t^2] = 1/d for a coordinate of a uniform point on S^{d-1}.
//! let rule = gauss_jacobi_rule(5, 1.0, 8).unwrap();
//! let second_moment = rule.integrate_fn(|t| t * t);
//! assert!((second_moment - 0.2).abs() < 1e-14);
//! ```

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Anything that carries one positive weight per evaluation node.
pub trait Quadrature {
    fn weights(&self) -> &[f64];
}

/// Weighted sum of per-node values.
pub fn integrate<Q: Quadrature + ?Sized>(values: &[f64], rule: &Q) -> Result<f64> {
    let weights = rule.weights();
    if values.len() != weights.len() {
        return Err(Error::Length {
            expected: weights.len(),
            got: values.len(),
        });
    }
    Ok(values.iter().zip(weights).map(|(v, w)| v * w).sum())
}

/// Three-term recurrence of the polynomials orthonormal with respect to the
/// probability measure proportional to `(1 - t^2)^lambda` on `[-1, 1]`.
///
/// The recurrence reads `t p_k = b_{k+1} p_{k+1} + b_k p_{k-1}` with `p_0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SymmetricJacobi {
    pub lambda: f64,
}

impl SymmetricJacobi {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    /// Off-diagonal entry `b_k`, `k >= 1`.
    pub fn b(&self, k: usize) -> f64 {
        let l = self.lambda;
        if k == 1 {
            // closed form of the k = 1 limit, valid through lambda = -1/2
            return (1.0 / (2.0 * l + 3.0)).sqrt();
        }
        let k = k as f64;
        (k * (k + 2.0 * l) / ((2.0 * k + 2.0 * l + 1.0) * (2.0 * k + 2.0 * l - 1.0))).sqrt()
    }

    /// Fills `out[0..out.len()]` with `p_0(t), ..., p_{n-1}(t)`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        if n == 0 {
            return;
        }
        out[0] = 1.0;
        if n == 1 {
            return;
        }
        out[1] = t / self.b(1);
        for k in 1..n - 1 {
            out[k + 1] = (t * out[k] - self.b(k) * out[k - 1]) / self.b(k + 1);
        }
    }

    /// Values and first and second derivatives of `p_0 .. p_{n-1}` at `t`.
    pub fn eval_with_derivatives(&self, t: f64, p: &mut [f64], dp: &mut [f64], ddp: &mut [f64]) {
        let n = p.len();
        debug_assert!(dp.len() == n && ddp.len() == n);
        if n == 0 {
            return;
        }
        p[0] = 1.0;
        dp[0] = 0.0;
        ddp[0] = 0.0;
        if n == 1 {
            return;
        }
        let b1 = self.b(1);
        p[1] = t / b1;
        dp[1] = 1.0 / b1;
        ddp[1] = 0.0;
        for k in 1..n - 1 {
            let (bk, bk1) = (self.b(k), self.b(k + 1));
            p[k + 1] = (t * p[k] - bk * p[k - 1]) / bk1;
            dp[k + 1] = (p[k] + t * dp[k] - bk * dp[k - 1]) / bk1;
            ddp[k + 1] = (2.0 * dp[k] + t * ddp[k] - bk * ddp[k - 1]) / bk1;
        }
    }

    /// `(p_n(t), p_n'(t))`.
    fn value_and_slope(&self, n: usize, t: f64) -> (f64, f64) {
        let mut p = vec![0.0; n + 1];
        let mut dp = vec![0.0; n + 1];
        let mut ddp = vec![0.0; n + 1];
        self.eval_with_derivatives(t, &mut p, &mut dp, &mut ddp);
        (p[n], dp[n])
    }
}

/// Gauss rule for the normalized symmetric Jacobi weight `(1 - t^2)^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub dim: usize,
    pub exponent: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl JacobiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

impl Quadrature for JacobiRule {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Exponent of the zonal measure on `S^{d-1}`.
pub fn sphere_exponent(d: usize) -> f64 {
    (d as f64 - 3.0) / 2.0
}

/// Exponent of the zonal measure on a great subsphere `S^{d-2}`.
pub fn subsphere_exponent(d: usize) -> f64 {
    (d as f64 - 4.0) / 2.0
}

/// Builds the `n`-point Gauss rule for `(1 - t^2)^exponent`, normalized to mass one.
///
/// Nodes start from the eigenvalues of the Jacobi matrix, are polished by
/// Newton steps on `p_n`, and weights come from the Christoffel function
/// `1 / sum_{k<n} p_k(t)^2`. The node set is symmetrized exactly.
pub fn gauss_jacobi_rule(d: usize, exponent: f64, n: usize) -> Result<JacobiRule> {
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    if !(exponent > -1.0) || !exponent.is_finite() {
        return Err(Error::Exponent(exponent));
    }
    if n == 0 {
        return Err(Error::Order);
    }
    let rec = SymmetricJacobi::new(exponent);

    let mut nodes = if n == 1 {
        vec![0.0]
    } else {
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = rec.b(k);
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let mut eig: Vec<f64> = SymmetricEigen::new(jacobi)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| a.total_cmp(b));
        eig
    };

    for t in nodes.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = rec.value_and_slope(n, *t);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *t -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
    }

    for i in 0..n / 2 {
        let j = n - 1 - i;
        let m = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -m;
        nodes[j] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut scratch = vec![0.0; n];
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&t| {
            rec.eval_into(t, &mut scratch);
            1.0 / scratch.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }

    Ok(JacobiRule {
        dim: d,
        exponent,
        nodes,
        weights,
        order: n,
    })
}

type RuleKey = (usize, u64, usize);

/// Memoized [`gauss_jacobi_rule`]; rules are immutable and shared.
pub fn cached_jacobi_rule(d: usize, exponent: f64, n: usize) -> Result<Arc<JacobiRule>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    let key = (d, exponent.to_bits(), n);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(gauss_jacobi_rule(d, exponent, n)?);
    cache.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Default rule order for a zonal band limit `k`: exact for products of two
/// degree-`k` functions with a margin.
pub fn default_order(band_limit: usize) -> usize {
    2 * band_limit + 8
}

/// Gauss-Legendre in `cos(theta)` times equiangular longitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct S2Grid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// `cos(theta_i)`, increasing.
    pub cos_theta: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Per-ring weights, summing to one.
    pub ring_weights: Vec<f64>,
    /// Per-node weights in ring-major order, summing to one.
    pub weights: Vec<f64>,
}

impl S2Grid {
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unit vector of node `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 3] {
        let ct = self.cos_theta[i];
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let (sp, cp) = self.phi[j].sin_cos();
        [st * cp, st * sp, ct]
    }

    /// All nodes in ring-major order.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                out.push(self.point(i, j));
            }
        }
        out
    }

    pub fn integrate_fn<F: Fn([f64; 3]) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n_theta {
            let mut ring = 0.0;
            for j in 0..self.n_phi {
                ring += f(self.point(i, j));
            }
            acc += self.ring_weights[i] * ring / self.n_phi as f64;
        }
        acc
    }
}

impl Quadrature for S2Grid {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Grid on `S^2` resolving spherical harmonics of degree `<= l`, exact for
/// products of two such harmonics.
pub fn s2_grid(l: usize) -> Result<S2Grid> {
    if l == 0 {
        return Err(Error::Order);
    }
    let n_theta = l + 1;
    let n_phi = 2 * l + 1;
    let rule = cached_jacobi_rule(3, 0.0, n_theta)?;
    let cos_theta = rule.nodes.clone();
    let theta = cos_theta.iter().map(|c| c.acos()).collect();
    let phi = (0..n_phi)
        .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
        .collect();
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for &w in &rule.weights {
        for _ in 0..n_phi {
            weights.push(w / n_phi as f64);
        }
    }
    Ok(S2Grid {
        n_theta,
        n_phi,
        cos_theta,
        theta,
        phi,
        ring_weights: rule.weights.clone(),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson on [a, b].
    fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
        rec(f, a, b, simpson(f, a, b), tol, 50)
    }

    #[test]
    fn one_point_rule() {
        let rule = gauss_jacobi_rule(3, 0.0, 1).unwrap();
        assert_eq!(rule.nodes, vec![0.0]);
        assert_eq!(rule.weights, vec![1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(gauss_jacobi_rule(2, 0.0, 4), Err(Error::Dimension(2)));
        assert_eq!(gauss_jacobi_rule(3, -1.0, 4), Err(Error::Exponent(-1.0)));
        assert_eq!(gauss_jacobi_rule(3, 0.0, 0), Err(Error::Order));
        // the d = 3 subsphere rule is the Chebyshev weight and is allowed
        assert!(gauss_jacobi_rule(3, subsphere_exponent(3), 6).is_ok());
    }

    #[test]
    fn second_moment_is_one_over_d() {
        for d in 3..=9 {
            for n in [2, 5, 17] {
                let rule = gauss_jacobi_rule(d, sphere_exponent(d), n).unwrap();
                let m2 = rule.integrate_fn(|t| t * t);
                assert!((m2 - 1.0 / d as f64).abs() < 1e-14, "d={d} n={n} m2={m2}");
            }
        }
    }

    #[test]
    fn fourth_moment_matches_adaptive_oracle() {
        let rule = gauss_jacobi_rule(5, 1.0, 16).unwrap();
        let quad = rule.integrate_fn(|t| t.powi(4));
        let num = adaptive_simpson(&|t: f64| t.powi(4) * (1.0 - t * t), -1.0, 1.0, 1e-15);
        let den = adaptive_simpson(&|t: f64| 1.0 - t * t, -1.0, 1.0, 1e-15);
        assert!((quad - num / den).abs() < 1e-12, "{quad} vs {}", num / den);
    }

    #[test]
    fn weights_sum_to_one_and_nodes_symmetric() {
        for (d, lam) in [(3, 0.0), (3, -0.5), (4, 0.5), (7, 2.0), (7, 1.5)] {
            for n in [1, 2, 3, 10, 51, 140] {
                let rule = gauss_jacobi_rule(d, lam, n).unwrap();
                let s: f64 = rule.weights.iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                for i in 0..n {
                    assert_eq!(rule.nodes[i], -rule.nodes[n - 1 - i]);
                }
                assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
                let odd = rule.integrate_fn(|t| t.powi(3) + t.sin());
                assert!(odd.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chebyshev_nodes_closed_form() {
        let n = 9;
        let rule = gauss_jacobi_rule(3, -0.5, n).unwrap();
        for (i, &t) in rule.nodes.iter().enumerate() {
            let expect = -((2 * i + 1) as f64 * PI / (2 * n) as f64).cos();
            assert!((t - expect).abs() < 1e-14);
            assert!((rule.weights[i] - 1.0 / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn integrate_length_mismatch() {
        let rule = gauss_jacobi_rule(3, 0.0, 4).unwrap();
        assert_eq!(
            integrate(&[1.0; 3], &rule),
            Err(Error::Length {
                expected: 4,
                got: 3
            })
        );
        assert!((integrate(&[1.0; 4], &rule).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn s2_grid_basic_moments() {
        let grid = s2_grid(6).unwrap();
        let s: f64 = grid.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!((grid.integrate_fn(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((grid.integrate_fn(|x| x[2] * x[2]) - 1.0 / 3.0).abs() < 1e-14);
        assert!((grid.integrate_fn(|x| x[0] * x[0]) - 1.0 / 3.0).abs() < 1e-14);
        assert!((grid.integrate_fn(|x| x[0] * x[1] * x[2] * x[2])).abs() < 1e-14);
        let values = vec![1.0; grid.len()];
        assert!((integrate(&values, &grid).unwrap() - 1.0).abs() < 1e-14);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    /// Moment of `t^{2j}` under the normalized `(1-t^2)^lambda` weight:
    /// `B(j + 1/2, lambda + 1) / B(1/2, lambda + 1)` as a running product.
    fn even_moment(lambda: f64, j: usize) -> f64 {
        (0..j)
            .map(|i| (i as f64 + 0.5) / (i as f64 + lambda + 1.5))
            .product()
    }

    proptest! {
        #[test]
        fn gauss_exactness(d in 3usize..9, sub in any::<bool>(), n in 1usize..30,
                           coeffs in prop::collection::vec(-1.0f64..1.0, 60)) {
            let lambda = if sub { subsphere_exponent(d) } else { sphere_exponent(d) };
            let rule = gauss_jacobi_rule(d, lambda, n).unwrap();
            let deg = 2 * n - 1;
            let poly = |t: f64| coeffs[..=deg].iter().rev().fold(0.0, |acc, c| acc * t + c);
            let quad = rule.integrate_fn(poly);
            let exact: f64 = (0..=deg).step_by(2).map(|j| coeffs[j] * even_moment(lambda, j / 2)).sum();
            prop_assert!((quad - exact).abs() < 1e-12, "quad {} exact {}", quad, exact);
        }
    }
}
