//! Axisymmetric functions on `S^{d-1}` in the orthonormal Gegenbauer basis.
//!
//! A zonal function depends only on `t = x_d`. The basis functions `Z_k` are
//! the Gegenbauer polynomials `C_k^{(d-2)/2}` rescaled to unit norm in
//! `L^2` of the normalized surface measure, with `Z_k(1) > 0`; `Z_k` spans the
//! zonal part of the degree-`k` harmonics.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{
    cached_jacobi_rule, default_order, sphere_exponent, JacobiRule, SymmetricJacobi,
};

/// Value of the orthonormal zonal basis function `Z_k` at `t`.
pub fn zonal_basis_eval(d: usize, k: usize, t: f64) -> f64 {
    let mut p = vec![0.0; k + 1];
    SymmetricJacobi::new(sphere_exponent(d)).eval_into(t, &mut p);
    p[k]
}

/// Quadrature rule plus tabulated basis for a dimension and band limit.
#[derive(Debug)]
pub struct ZonalSpace {
    pub dim: usize,
    pub band_limit: usize,
    pub rule: Arc<JacobiRule>,
    /// `basis[i * (band_limit + 1) + k] = Z_k(t_i)`.
    basis: Vec<f64>,
}

impl ZonalSpace {
    fn build(dim: usize, band_limit: usize) -> Result<Self> {
        let rule = cached_jacobi_rule(dim, sphere_exponent(dim), default_order(band_limit))?;
        let rec = SymmetricJacobi::new(sphere_exponent(dim));
        let width = band_limit + 1;
        let mut basis = vec![0.0; rule.len() * width];
        for (i, &t) in rule.nodes.iter().enumerate() {
            rec.eval_into(t, &mut basis[i * width..(i + 1) * width]);
        }
        Ok(Self {
            dim,
            band_limit,
            rule,
            basis,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.band_limit + 1;
        &self.basis[i * w..(i + 1) * w]
    }

    /// Coefficients `a_k = sum_i w_i f(t_i) Z_k(t_i)` for `k <= band_limit`.
    pub fn analyze(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.len() {
            return Err(Error::Length {
                expected: self.len(),
                got: values.len(),
            });
        }
        let mut coeffs = vec![0.0; self.band_limit + 1];
        for (i, (&v, &w)) in values.iter().zip(&self.rule.weights).enumerate() {
            let vw = v * w;
            for (c, z) in coeffs.iter_mut().zip(self.row(i)) {
                *c += vw * z;
            }
        }
        Ok(coeffs)
    }

    /// Node values of `sum_k a_k Z_k`; accepts up to `band_limit + 1` coefficients.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() > self.band_limit + 1 {
            return Err(Error::BandLimit {
                degree: coeffs.len() - 1,
                band_limit: self.band_limit,
            });
        }
        Ok((0..self.len())
            .map(|i| coeffs.iter().zip(self.row(i)).map(|(a, z)| a * z).sum())
            .collect())
    }
}

/// Shared, memoized space for `(d, band_limit)`.
pub fn zonal_space(dim: usize, band_limit: usize) -> Result<Arc<ZonalSpace>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ZonalSpace>>>> = OnceLock::new();
    if dim < 3 {
        return Err(Error::Dimension(dim));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(space) = cache.lock().unwrap().get(&(dim, band_limit)) {
        return Ok(space.clone());
    }
    let space = Arc::new(ZonalSpace::build(dim, band_limit)?);
    cache
        .lock()
        .unwrap()
        .insert((dim, band_limit), space.clone());
    Ok(space)
}

/// A band-limited zonal function: coefficients and node values kept in sync.
#[derive(Debug, Clone)]
pub struct ZonalProfile {
    space: Arc<ZonalSpace>,
    coeffs: Vec<f64>,
    node_values: Vec<f64>,
}

impl PartialEq for ZonalProfile {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.coeffs == other.coeffs
    }
}

impl ZonalProfile {
    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Order);
        }
        let space = zonal_space(dim, coeffs.len() - 1)?;
        let node_values = space.synthesize(&coeffs)?;
        Ok(Self {
            space,
            coeffs,
            node_values,
        })
    }

    pub fn from_node_values(space: Arc<ZonalSpace>, node_values: Vec<f64>) -> Result<Self> {
        let coeffs = space.analyze(&node_values)?;
        // re-synthesize so the two views agree even for non-band-limited input
        let node_values = space.synthesize(&coeffs)?;
        Ok(Self {
            space,
            coeffs,
            node_values,
        })
    }

    /// L2 projection of `f(t)` onto degrees `<= band_limit`.
    pub fn from_fn<F: Fn(f64) -> f64>(dim: usize, band_limit: usize, f: F) -> Result<Self> {
        let space = zonal_space(dim, band_limit)?;
        let values = space.nodes().iter().map(|&t| f(t)).collect();
        Self::from_node_values(space, values)
    }

    pub fn constant(dim: usize, band_limit: usize, value: f64) -> Result<Self> {
        let mut coeffs = vec![0.0; band_limit + 1];
        coeffs[0] = value;
        Self::from_coeffs(dim, coeffs)
    }

    /// Unit vector `Z_k`, padded to `band_limit`.
    pub fn basis(dim: usize, band_limit: usize, k: usize) -> Result<Self> {
        if k > band_limit {
            return Err(Error::BandLimit {
                degree: k,
                band_limit,
            });
        }
        let mut coeffs = vec![0.0; band_limit + 1];
        coeffs[k] = 1.0;
        Self::from_coeffs(dim, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn band_limit(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn space(&self) -> &Arc<ZonalSpace> {
        &self.space
    }

    /// `sum_k a_k Z_k(t)` by forward recurrence.
    pub fn eval(&self, t: f64) -> f64 {
        let mut p = vec![0.0; self.coeffs.len()];
        SymmetricJacobi::new(sphere_exponent(self.dim())).eval_into(t, &mut p);
        p.iter().zip(&self.coeffs).map(|(p, a)| p * a).sum()
    }

    /// `(g(t), g'(t), g''(t))` for the profile `g`.
    pub fn eval_with_derivatives(&self, t: f64) -> (f64, f64, f64) {
        let n = self.coeffs.len();
        let (mut p, mut dp, mut ddp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        SymmetricJacobi::new(sphere_exponent(self.dim()))
            .eval_with_derivatives(t, &mut p, &mut dp, &mut ddp);
        let dot = |v: &[f64]| v.iter().zip(&self.coeffs).map(|(x, a)| x * a).sum::<f64>();
        (dot(&p), dot(&dp), dot(&ddp))
    }

    /// Same function with coefficients mapped degree by degree.
    pub fn map_coeffs<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| f(k, a))
            .collect();
        Self::from_coeffs(self.dim(), coeffs).expect("space already validated")
    }

    /// Pads with zeros or truncates; returns the discarded energy.
    pub fn with_band_limit(&self, band_limit: usize) -> (Self, f64) {
        let mut coeffs = self.coeffs.clone();
        let lost = coeffs.iter().skip(band_limit + 1).map(|a| a * a).sum();
        coeffs.resize(band_limit + 1, 0.0);
        (
            Self::from_coeffs(self.dim(), coeffs).expect("space already validated"),
            lost,
        )
    }

    /// Pointwise map evaluated at the nodes of the `band_limit` space, then projected.
    pub fn map_pointwise<F: Fn(f64, f64) -> f64>(&self, band_limit: usize, f: F) -> Result<Self> {
        let target = zonal_space(self.dim(), band_limit)?;
        let values = if target.band_limit >= self.band_limit() {
            target
                .synthesize(&self.coeffs)?
                .into_iter()
                .zip(target.nodes())
                .map(|(v, &t)| f(t, v))
                .collect()
        } else {
            target.nodes().iter().map(|&t| f(t, self.eval(t))).collect()
        };
        Self::from_node_values(target, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn z0_is_one() {
        for d in [3, 4, 7] {
            for t in [-1.0, -0.3, 0.0, 0.8, 1.0] {
                assert_eq!(zonal_basis_eval(d, 0, t), 1.0);
            }
        }
    }

    #[test]
    fn orthonormal_up_to_24() {
        for d in [3, 4, 5, 7] {
            let rule = crate::quadrature::gauss_jacobi_rule(d, sphere_exponent(d), 40).unwrap();
            for j in 0..=24 {
                for k in 0..=24 {
                    let g = rule
                        .integrate_fn(|t| zonal_basis_eval(d, j, t) * zonal_basis_eval(d, k, t));
                    let e = if j == k { 1.0 } else { 0.0 };
                    assert!((g - e).abs() < 1e-11, "d={d} j={j} k={k} g={g}");
                }
            }
        }
    }

    #[test]
    fn z2_in_three_dimensions_by_gram_schmidt() {
        // Gram-Schmidt on {1, t, t^2} under the flat weight on [-1,1]:
        // t^2 - <t^2,1> = t^2 - 1/3; its squared norm is 1/5 - 2/9 + 1/9 = 4/45.
        let scale = (45.0f64 / 4.0).sqrt();
        for t in [-0.9, -0.2, 0.0, 0.5, 1.0] {
            let expect = scale * (t * t - 1.0 / 3.0);
            assert!((zonal_basis_eval(3, 2, t) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn analyze_constant_and_basis() {
        let one = ZonalProfile::from_fn(5, 10, |_| 1.0).unwrap();
        assert!((one.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!(one.coeffs()[1..].iter().all(|a| a.abs() < 1e-14));
        let z4 = ZonalProfile::from_fn(5, 10, |t| zonal_basis_eval(5, 4, t)).unwrap();
        for (k, a) in z4.coeffs().iter().enumerate() {
            let e = if k == 4 { 1.0 } else { 0.0 };
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [3, 4, 5, 7] {
            for k in [4, 24, 64] {
                let coeffs: Vec<f64> = (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect();
                let f = ZonalProfile::from_coeffs(d, coeffs.clone()).unwrap();
                let back = f.space().analyze(f.node_values()).unwrap();
                let err = back
                    .iter()
                    .zip(&coeffs)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "d={d} k={k} err={err}");
                for &t in &[0.123, -0.77] {
                    let direct: f64 = (0..=k).map(|j| coeffs[j] * zonal_basis_eval(d, j, t)).sum();
                    assert!((f.eval(t) - direct).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn synthesize_rejects_excess_degree() {
        let space = zonal_space(3, 4).unwrap();
        assert_eq!(
            space.synthesize(&[0.0; 7]),
            Err(Error::BandLimit {
                degree: 6,
                band_limit: 4
            })
        );
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = ZonalProfile::from_coeffs(4, vec![0.3, 0.0, -0.5, 0.2, 0.1, 0.0, 0.05]).unwrap();
        let h = 1e-5;
        for t in [-0.6, 0.1, 0.7] {
            let (_, d1, d2) = f.eval_with_derivatives(t);
            let fd1 = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
            let fd2 = (f.eval(t + h) - 2.0 * f.eval(t) + f.eval(t - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-4);
        }
    }
}
