//! Real spherical harmonics on `S^2`, orthonormal for the normalized measure.
//!
//! `Y_{l,m}(theta, phi) = P_{l,|m|}(cos theta) * (cos(m phi) if m >= 0, sin(|m| phi) if m < 0)`
//! where `P_{l,m}` are the fully normalized associated Legendre functions
//! (no Condon-Shortley phase) with mean-square one over the sphere.
//! Coefficients are stored at index `l^2 + l + m`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{s2_grid, S2Grid};

#[inline]
pub fn lm_index(l: usize, m: isize) -> usize {
    ((l * l + l) as isize + m) as usize
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized associated Legendre values `P_{l,m}` for `0 <= m <= l <= lmax`,
/// triangular layout.
pub(crate) fn legendre_table(lmax: usize, ct: f64, st: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= tri(lmax, lmax) + 1);
    out[0] = 1.0;
    if lmax == 0 {
        return;
    }
    out[tri(1, 1)] = 3f64.sqrt() * st;
    for m in 2..=lmax {
        out[tri(m, m)] = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st * out[tri(m - 1, m - 1)];
    }
    for m in 0..=lmax {
        if m < lmax {
            out[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * ct * out[tri(m, m)];
        }
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((2.0 * lf - 1.0) * (2.0 * lf + 1.0) / ((lf - mf) * (lf + mf))).sqrt();
            let b = ((2.0 * lf + 1.0) * (lf + mf - 1.0) * (lf - mf - 1.0)
                / ((lf - mf) * (lf + mf) * (2.0 * lf - 3.0)))
                .sqrt();
            out[tri(l, m)] = a * ct * out[tri(l - 1, m)] - b * out[tri(l - 2, m)];
        }
    }
}

/// Legendre table plus first and second `theta`-derivatives; requires `sin(theta) > 0`.
pub(crate) fn legendre_table_with_derivatives(
    lmax: usize,
    ct: f64,
    st: f64,
    p: &mut [f64],
    dp: &mut [f64],
    ddp: &mut [f64],
) {
    legendre_table(lmax, ct, st, p);
    let cot = ct / st;
    for l in 0..=lmax {
        let lf = l as f64;
        for m in 0..=l {
            let mf = m as f64;
            let prev = if l > m {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
                    * p[tri(l - 1, m)]
            } else {
                0.0
            };
            let v = p[tri(l, m)];
            let d1 = (lf * ct * v - prev) / st;
            dp[tri(l, m)] = d1;
            ddp[tri(l, m)] = -cot * d1 - (lf * (lf + 1.0) - mf * mf / (st * st)) * v;
        }
    }
}

/// Value of `Y_{l,m}` at a unit vector.
pub fn real_sh_eval(l: usize, m: isize, x: [f64; 3]) -> f64 {
    let mut p = vec![0.0; tri(l, l) + 1];
    let st = (x[0] * x[0] + x[1] * x[1]).sqrt();
    legendre_table(l, x[2], st, &mut p);
    let phi = x[1].atan2(x[0]);
    let am = m.unsigned_abs();
    let trig = if m >= 0 {
        (am as f64 * phi).cos()
    } else {
        (am as f64 * phi).sin()
    };
    p[tri(l, am)] * trig
}

/// Grid, tabulated Legendre values and trigonometric tables for band limit `L`.
#[derive(Debug)]
pub struct S2Space {
    pub band_limit: usize,
    pub grid: S2Grid,
    legendre: Vec<Vec<f64>>,
    cos_table: Vec<Vec<f64>>,
    sin_table: Vec<Vec<f64>>,
}

impl S2Space {
    fn build(band_limit: usize) -> Result<Self> {
        let grid = s2_grid(band_limit.max(1))?;
        let size = tri(band_limit, band_limit) + 1;
        let legendre = grid
            .cos_theta
            .iter()
            .map(|&ct| {
                let mut row = vec![0.0; size];
                legendre_table(band_limit, ct, (1.0 - ct * ct).sqrt(), &mut row);
                row
            })
            .collect();
        let (cos_table, sin_table) = trig_tables(band_limit, &grid.phi);
        Ok(Self {
            band_limit,
            grid,
            legendre,
            cos_table,
            sin_table,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn n_coeffs(&self) -> usize {
        (self.band_limit + 1) * (self.band_limit + 1)
    }

    pub fn analyze(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.len() {
            return Err(Error::Length {
                expected: self.len(),
                got: values.len(),
            });
        }
        let big_l = self.band_limit;
        let n_phi = self.grid.n_phi;
        let mut coeffs = vec![0.0; self.n_coeffs()];
        for i in 0..self.grid.n_theta {
            let ring = &values[i * n_phi..(i + 1) * n_phi];
            let w = self.grid.ring_weights[i] / n_phi as f64;
            let leg = &self.legendre[i];
            for m in 0..=big_l {
                let (mut fc, mut fs) = (0.0, 0.0);
                for (j, v) in ring.iter().enumerate() {
                    fc += v * self.cos_table[m][j];
                    fs += v * self.sin_table[m][j];
                }
                for l in m..=big_l {
                    let p = leg[tri(l, m)] * w;
                    coeffs[l * l + l + m] += p * fc;
                    if m > 0 {
                        coeffs[l * l + l - m] += p * fs;
                    }
                }
            }
        }
        Ok(coeffs)
    }

    /// Accepts any coefficient vector of length `(L'+1)^2` with `L' <= band_limit`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let lc = coeff_band_limit(coeffs.len())?;
        if lc > self.band_limit {
            return Err(Error::BandLimit {
                degree: lc,
                band_limit: self.band_limit,
            });
        }
        let n_phi = self.grid.n_phi;
        let mut out = vec![0.0; self.len()];
        let mut cm = vec![0.0; lc + 1];
        let mut sm = vec![0.0; lc + 1];
        for i in 0..self.grid.n_theta {
            ring_sums(coeffs, lc, &self.legendre[i], &mut cm, &mut sm);
            for j in 0..n_phi {
                let mut v = cm[0];
                for m in 1..=lc {
                    v += cm[m] * self.cos_table[m][j] + sm[m] * self.sin_table[m][j];
                }
                out[i * n_phi + j] = v;
            }
        }
        Ok(out)
    }
}

fn trig_tables(lmax: usize, phis: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let cos = (0..=lmax)
        .map(|m| phis.iter().map(|p| (m as f64 * p).cos()).collect())
        .collect();
    let sin = (0..=lmax)
        .map(|m| phis.iter().map(|p| (m as f64 * p).sin()).collect())
        .collect();
    (cos, sin)
}

/// Per-ring Fourier amplitudes `C_m = sum_l a_{l,m} P_{l,m}`, `S_m = sum_l a_{l,-m} P_{l,m}`.
fn ring_sums(coeffs: &[f64], lc: usize, leg: &[f64], cm: &mut [f64], sm: &mut [f64]) {
    for m in 0..=lc {
        let (mut c, mut s) = (0.0, 0.0);
        for l in m..=lc {
            let p = leg[tri(l, m)];
            c += coeffs[l * l + l + m] * p;
            if m > 0 {
                s += coeffs[l * l + l - m] * p;
            }
        }
        cm[m] = c;
        sm[m] = s;
    }
}

pub(crate) fn coeff_band_limit(n: usize) -> Result<usize> {
    let l = (n as f64).sqrt().round() as usize;
    if l == 0 || l * l != n {
        return Err(Error::Length {
            expected: l.max(1) * l.max(1),
            got: n,
        });
    }
    Ok(l - 1)
}

pub fn s2_space(band_limit: usize) -> Result<Arc<S2Space>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<S2Space>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(space) = cache.lock().unwrap().get(&band_limit) {
        return Ok(space.clone());
    }
    let space = Arc::new(S2Space::build(band_limit)?);
    cache.lock().unwrap().insert(band_limit, space.clone());
    Ok(space)
}

/// Values and `theta`/`phi` partial derivatives on a tensor grid.
#[derive(Debug, Clone, Default)]
pub(crate) struct GridDerivatives {
    pub f: Vec<f64>,
    pub f_t: Vec<f64>,
    pub f_tt: Vec<f64>,
    pub f_p: Vec<f64>,
    pub f_pp: Vec<f64>,
    pub f_tp: Vec<f64>,
}

/// A band-limited function on `S^2` with coefficients and grid values in sync.
#[derive(Debug, Clone)]
pub struct S2Function {
    space: Arc<S2Space>,
    coeffs: Vec<f64>,
    grid_values: Vec<f64>,
}

impl PartialEq for S2Function {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl S2Function {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        let band_limit = coeff_band_limit(coeffs.len())?;
        let space = s2_space(band_limit)?;
        let grid_values = space.synthesize(&coeffs)?;
        Ok(Self {
            space,
            coeffs,
            grid_values,
        })
    }

    pub fn from_grid_values(space: Arc<S2Space>, values: Vec<f64>) -> Result<Self> {
        let coeffs = space.analyze(&values)?;
        let grid_values = space.synthesize(&coeffs)?;
        Ok(Self {
            space,
            coeffs,
            grid_values,
        })
    }

    /// L2 projection of `f` onto degrees `<= band_limit`.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(band_limit: usize, f: F) -> Result<Self> {
        let space = s2_space(band_limit)?;
        let values = space.grid.points().into_iter().map(f).collect();
        Self::from_grid_values(space, values)
    }

    pub fn constant(band_limit: usize, value: f64) -> Result<Self> {
        let mut coeffs = vec![0.0; (band_limit + 1) * (band_limit + 1)];
        coeffs[0] = value;
        Self::from_coeffs(coeffs)
    }

    pub fn basis(band_limit: usize, l: usize, m: isize) -> Result<Self> {
        if l > band_limit || m.unsigned_abs() > l {
            return Err(Error::BandLimit {
                degree: l,
                band_limit,
            });
        }
        let mut coeffs = vec![0.0; (band_limit + 1) * (band_limit + 1)];
        coeffs[lm_index(l, m)] = 1.0;
        Self::from_coeffs(coeffs)
    }

    pub fn band_limit(&self) -> usize {
        self.space.band_limit
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    pub fn space(&self) -> &Arc<S2Space> {
        &self.space
    }

    /// Degree of coefficient index `i`.
    pub fn degree_of(i: usize) -> usize {
        (i as f64).sqrt() as usize
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let big_l = self.band_limit();
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (ct, st) = (x[2] / r, (x[0] * x[0] + x[1] * x[1]).sqrt() / r);
        let mut leg = vec![0.0; tri(big_l, big_l) + 1];
        legendre_table(big_l, ct, st, &mut leg);
        let mut cm = vec![0.0; big_l + 1];
        let mut sm = vec![0.0; big_l + 1];
        ring_sums(&self.coeffs, big_l, &leg, &mut cm, &mut sm);
        let phi = x[1].atan2(x[0]);
        let mut v = cm[0];
        for m in 1..=big_l {
            let (s, c) = (m as f64 * phi).sin_cos();
            v += cm[m] * c + sm[m] * s;
        }
        v
    }

    /// Values on the tensor grid `thetas x phis`, ring-major.
    pub fn eval_tensor(&self, thetas: &[f64], phis: &[f64]) -> Vec<f64> {
        let big_l = self.band_limit();
        let (cos_t, sin_t) = trig_tables(big_l, phis);
        let mut leg = vec![0.0; tri(big_l, big_l) + 1];
        let mut cm = vec![0.0; big_l + 1];
        let mut sm = vec![0.0; big_l + 1];
        let mut out = Vec::with_capacity(thetas.len() * phis.len());
        for &th in thetas {
            let (st, ct) = th.sin_cos();
            legendre_table(big_l, ct, st.abs(), &mut leg);
            ring_sums(&self.coeffs, big_l, &leg, &mut cm, &mut sm);
            for j in 0..phis.len() {
                let mut v = cm[0];
                for m in 1..=big_l {
                    v += cm[m] * cos_t[m][j] + sm[m] * sin_t[m][j];
                }
                out.push(v);
            }
        }
        out
    }

    /// Values and spherical-coordinate partials on a tensor grid; `thetas` must avoid the poles.
    pub(crate) fn eval_tensor_derivatives(&self, thetas: &[f64], phis: &[f64]) -> GridDerivatives {
        let big_l = self.band_limit();
        let (cos_t, sin_t) = trig_tables(big_l, phis);
        let size = tri(big_l, big_l) + 1;
        let (mut p, mut dp, mut ddp) = (vec![0.0; size], vec![0.0; size], vec![0.0; size]);
        let mut sums = [(); 3].map(|_| (vec![0.0; big_l + 1], vec![0.0; big_l + 1]));
        let mut out = GridDerivatives::default();
        for &th in thetas {
            let (st, ct) = th.sin_cos();
            legendre_table_with_derivatives(big_l, ct, st, &mut p, &mut dp, &mut ddp);
            for (table, (cm, sm)) in [&p, &dp, &ddp].into_iter().zip(sums.iter_mut()) {
                ring_sums(&self.coeffs, big_l, table, cm, sm);
            }
            for j in 0..phis.len() {
                let mut acc = [0.0; 6];
                for m in 0..=big_l {
                    let (c, s) = (cos_t[m][j], sin_t[m][j]);
                    let mf = m as f64;
                    let (c0, s0) = (sums[0].0[m], sums[0].1[m]);
                    let (c1, s1) = (sums[1].0[m], sums[1].1[m]);
                    let (c2, s2) = (sums[2].0[m], sums[2].1[m]);
                    acc[0] += c0 * c + s0 * s;
                    acc[1] += c1 * c + s1 * s;
                    acc[2] += c2 * c + s2 * s;
                    acc[3] += mf * (-c0 * s + s0 * c);
                    acc[4] += -mf * mf * (c0 * c + s0 * s);
                    acc[5] += mf * (-c1 * s + s1 * c);
                }
                out.f.push(acc[0]);
                out.f_t.push(acc[1]);
                out.f_tt.push(acc[2]);
                out.f_p.push(acc[3]);
                out.f_pp.push(acc[4]);
                out.f_tp.push(acc[5]);
            }
        }
        out
    }

    pub fn map_coeffs<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| f(Self::degree_of(i), a))
            .collect();
        Self::from_coeffs(coeffs).expect("space already validated")
    }

    pub fn with_band_limit(&self, band_limit: usize) -> (Self, f64) {
        let n = (band_limit + 1) * (band_limit + 1);
        let mut coeffs = self.coeffs.clone();
        let lost = coeffs.iter().skip(n).map(|a| a * a).sum();
        coeffs.resize(n, 0.0);
        (
            Self::from_coeffs(coeffs).expect("space already validated"),
            lost,
        )
    }

    /// `f(x, value)` evaluated on the grid of the `band_limit` space, then projected.
    pub fn map_pointwise<F: Fn([f64; 3], f64) -> f64>(
        &self,
        band_limit: usize,
        f: F,
    ) -> Result<Self> {
        let target = s2_space(band_limit)?;
        let points = target.grid.points();
        let values = if band_limit >= self.band_limit() {
            target
                .synthesize(&self.coeffs)?
                .into_iter()
                .zip(points)
                .map(|(v, x)| f(x, v))
                .collect()
        } else {
            points.into_iter().map(|x| f(x, self.eval(x))).collect()
        };
        Self::from_grid_values(target, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::zonal::zonal_basis_eval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Midpoint rule in (theta, phi) with sin(theta) Jacobian; independent of the Gauss grid.
    fn brute_force_integral<F: Fn([f64; 3]) -> f64>(f: F, n: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let th = (i as f64 + 0.5) * PI / n as f64;
            let (st, ct) = th.sin_cos();
            for j in 0..2 * n {
                let ph = (j as f64 + 0.5) * PI / n as f64;
                acc += f([st * ph.cos(), st * ph.sin(), ct]) * st;
            }
        }
        acc * (PI / n as f64) * (PI / n as f64) / (4.0 * PI)
    }

    #[test]
    fn y20_y40_orthogonal_brute_force() {
        let brute = brute_force_integral(|x| real_sh_eval(2, 0, x) * real_sh_eval(4, 0, x), 1000);
        let grid = s2_grid(4).unwrap();
        let quad = grid.integrate_fn(|x| real_sh_eval(2, 0, x) * real_sh_eval(4, 0, x));
        assert!(brute.abs() < 5e-6, "{brute}");
        assert!(quad.abs() < 1e-12);
        let norm = brute_force_integral(|x| real_sh_eval(3, -2, x).powi(2), 400);
        assert!((norm - 1.0).abs() < 1e-4);
    }

    #[test]
    fn orthonormal_on_grid() {
        let l_max = 8;
        let grid = s2_grid(l_max).unwrap();
        let mut idx = vec![];
        for l in 0..=l_max {
            for m in -(l as isize)..=(l as isize) {
                idx.push((l, m));
            }
        }
        for &(l1, m1) in &idx {
            for &(l2, m2) in &idx {
                let g = grid.integrate_fn(|x| real_sh_eval(l1, m1, x) * real_sh_eval(l2, m2, x));
                let e = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-12, "({l1},{m1}) ({l2},{m2}) {g}");
            }
        }
    }

    #[test]
    fn zonal_harmonic_matches_gegenbauer() {
        for l in 0..10 {
            for t in [-0.8, 0.0, 0.35, 1.0] {
                let x = [(1.0 - t * t as f64).sqrt(), 0.0, t];
                assert!((real_sh_eval(l, 0, x) - zonal_basis_eval(3, l, t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for big_l in [1, 5, 16, 40] {
            let n = (big_l + 1) * (big_l + 1);
            let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = S2Function::from_coeffs(coeffs.clone()).unwrap();
            let back = f.space().analyze(f.grid_values()).unwrap();
            let err = back
                .iter()
                .zip(&coeffs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "L={big_l} err={err}");
            let sq: Vec<f64> = f.grid_values().iter().map(|v| v * v).collect();
            let quad = crate::quadrature::integrate(&sq, &f.space().grid).unwrap();
            let parseval: f64 = coeffs.iter().map(|a| a * a).sum();
            assert!((quad - parseval).abs() < 1e-10 * parseval.max(1.0));
            let x = [0.3, -0.4, (1.0f64 - 0.25).sqrt()];
            let direct: f64 = (0..=big_l)
                .flat_map(|l| (-(l as isize)..=l as isize).map(move |m| (l, m)))
                .map(|(l, m)| coeffs[lm_index(l, m)] * real_sh_eval(l, m, x))
                .sum();
            assert!((f.eval(x) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn tensor_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (0..49).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = S2Function::from_coeffs(coeffs).unwrap();
        let (th, ph, h) = (0.7, 1.9, 1e-4);
        let d = f.eval_tensor_derivatives(&[th], &[ph]);
        let at = |t: f64, p: f64| f.eval_tensor(&[t], &[p])[0];
        let ft = (at(th + h, ph) - at(th - h, ph)) / (2.0 * h);
        let fp = (at(th, ph + h) - at(th, ph - h)) / (2.0 * h);
        let ftt = (at(th + h, ph) - 2.0 * at(th, ph) + at(th - h, ph)) / (h * h);
        let fpp = (at(th, ph + h) - 2.0 * at(th, ph) + at(th, ph - h)) / (h * h);
        let ftp = (at(th + h, ph + h) - at(th + h, ph - h) - at(th - h, ph + h)
            + at(th - h, ph - h))
            / (4.0 * h * h);
        assert!((d.f[0] - at(th, ph)).abs() < 1e-12);
        assert!((d.f_t[0] - ft).abs() < 1e-6);
        assert!((d.f_p[0] - fp).abs() < 1e-6);
        assert!((d.f_tt[0] - ftt).abs() < 1e-4);
        assert!((d.f_pp[0] - fpp).abs() < 1e-4);
        assert!((d.f_tp[0] - ftp).abs() < 1e-4);
    }
}
