//! Star bodies by their radial functions, the linear action on them, and the
//! intersection-body map.
//!
//! A linear map `T` acts on functions by
//!
//! ```text
//!   (T f)(x) = f(omega_T(x)) / |T x|,   omega_T(x) = T x / |T x|,
//! ```
//!
//! so that `apply_linear(rho_K, T)` is the radial function of `T^{-1} K`.
//! The intersection body is computed in the normalized convention
//! `rho_{IK} = R(rho_K^{d-1})`, dropping the constant volume factor.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{Representation, S2Function, SphereFunction, ZonalProfile};
use crate::quadrature::{cached_jacobi_rule, subsphere_exponent};
use crate::radon::{great_circle_average, radon_geometric, radon_spectral};

/// Relative odd-degree energy tolerated in a star body.
pub const EVEN_TOL: f64 = 1e-12;

/// A centrally symmetric star body, stored as its band-limited radial function.
#[derive(Debug, Clone, PartialEq)]
pub struct StarBody {
    radial: SphereFunction,
}

/// On-disk form of a [`StarBody`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarBodyDoc {
    pub dim: usize,
    pub band_limit: usize,
    pub representation: Representation,
    pub coeffs: Vec<f64>,
}

impl StarBody {
    /// Validates positivity at the nodes and evenness of the spectrum.
    pub fn new(radial: SphereFunction) -> Result<Self> {
        let min = radial.node_min();
        if !(min > 0.0) {
            return Err(Error::NonPositive(min));
        }
        let spectrum = radial.spectrum();
        if spectrum.odd_energy() > EVEN_TOL * spectrum.total() {
            return Err(Error::Representation(
                "radial function has odd-degree energy",
            ));
        }
        Ok(Self { radial })
    }

    pub fn ball(repr: Representation, dim: usize, band_limit: usize) -> Result<Self> {
        Self::new(SphereFunction::constant(repr, dim, band_limit, 1.0)?)
    }

    /// The body with radial function `1 + phi`.
    pub fn from_perturbation(phi: &SphereFunction) -> Result<Self> {
        Self::new(phi.add_constant(1.0))
    }

    pub fn radial(&self) -> &SphereFunction {
        &self.radial
    }

    pub fn into_radial(self) -> SphereFunction {
        self.radial
    }

    pub fn dim(&self) -> usize {
        self.radial.dim()
    }

    pub fn band_limit(&self) -> usize {
        self.radial.band_limit()
    }

    pub fn representation(&self) -> Representation {
        self.radial.representation()
    }

    /// `rho - 1`.
    pub fn phi(&self) -> SphereFunction {
        self.radial.add_constant(-1.0)
    }

    /// The homothetic copy with mean radial function 1, and the factor used.
    pub fn mean_normalized(&self) -> (Self, f64) {
        let gamma = 1.0 / self.radial.mean();
        (
            Self {
                radial: self.radial.scale(gamma),
            },
            gamma,
        )
    }

    pub fn to_doc(&self) -> StarBodyDoc {
        StarBodyDoc {
            dim: self.dim(),
            band_limit: self.band_limit(),
            representation: self.representation(),
            coeffs: self.radial.coeffs().to_vec(),
        }
    }

    pub fn from_doc(doc: &StarBodyDoc) -> Result<Self> {
        let radial = SphereFunction::from_coeffs(doc.representation, doc.dim, doc.coeffs.clone())?;
        if radial.band_limit() != doc.band_limit {
            return Err(Error::BandLimit {
                degree: radial.band_limit(),
                band_limit: doc.band_limit,
            });
        }
        Self::new(radial)
    }
}

impl Serialize for StarBody {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StarBody {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = StarBodyDoc::deserialize(d)?;
        StarBody::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

/// `rho(x)` for a unit vector `x`.
pub fn radial_eval(body: &StarBody, x: &[f64]) -> f64 {
    body.radial.eval(x)
}

/// An invertible `d x d` matrix with its determinant and operator norms cached.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    entries: DMatrix<f64>,
    det: f64,
    norm: f64,
    inverse_norm: f64,
}

impl LinearMap {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(entries.nrows(), entries.ncols()));
        }
        let det = entries.determinant();
        let sv = entries.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 1e-14 * smax) {
            return Err(Error::Singular(det));
        }
        Ok(Self {
            entries,
            det,
            norm: smax,
            inverse_norm: 1.0 / smin,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is invertible")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        ))
    }

    /// `I + Q`.
    pub fn from_q(q: &DMatrix<f64>) -> Result<Self> {
        Self::new(DMatrix::identity(q.nrows(), q.nrows()) + q)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn inverse_norm(&self) -> f64 {
        self.inverse_norm
    }

    pub fn inverse(&self) -> Self {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .expect("checked invertible");
        Self::new(inv).expect("inverse of an invertible map")
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.entries.transpose()).expect("transpose of an invertible map")
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `(a, b)` if the map is `diag(a, ..., a, b)`.
    pub fn axisymmetric_parts(&self) -> Option<(f64, f64)> {
        let d = self.dim();
        let scale = self.norm;
        let a = self.entries[(0, 0)];
        for i in 0..d {
            for j in 0..d {
                let v = self.entries[(i, j)];
                let ok = if i != j {
                    v.abs() <= 1e-14 * scale
                } else if i < d - 1 {
                    (v - a).abs() <= 1e-14 * scale
                } else {
                    true
                };
                if !ok {
                    return None;
                }
            }
        }
        Some((a, self.entries[(d - 1, d - 1)]))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `T f`, projected back onto the band limit of `f`.
pub fn apply_linear(f: &SphereFunction, t: &LinearMap) -> Result<SphereFunction> {
    if t.dim() != f.dim() {
        return Err(Error::DimensionMismatch(t.dim(), f.dim()));
    }
    match f {
        SphereFunction::Zonal(g) => {
            let (a, b) = t.axisymmetric_parts().ok_or(Error::NotAxisymmetric)?;
            let out = ZonalProfile::from_fn(g.dim(), g.band_limit(), |s| {
                let n = (a * a * (1.0 - s * s) + b * b * s * s).sqrt();
                g.eval((b * s / n).clamp(-1.0, 1.0)) / n
            })?;
            Ok(out.into())
        }
        SphereFunction::S2(g) => {
            let out = S2Function::from_fn(g.band_limit(), |x| {
                let y = t.apply(&x);
                let n = norm(&y);
                g.eval([y[0] / n, y[1] / n, y[2] / n]) / n
            })?;
            Ok(out.into())
        }
    }
}

/// Deterministic unit vectors: normalized nonzero points of the cube lattice
/// `{-n..n}^d`, with `n` chosen to keep the count moderate.
pub fn lattice_directions(d: usize) -> Vec<Vec<f64>> {
    let n = ((4.0e4f64).powf(1.0 / d as f64) / 2.0).floor().max(1.0) as i64;
    let side = (2 * n + 1) as usize;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let x: Vec<f64> = (0..d)
            .map(|_| {
                let c = (rem % side) as i64 - n;
                rem /= side;
                c as f64
            })
            .collect();
        let r = norm(&x);
        if r > 0.0 {
            out.push(x.iter().map(|v| v / r).collect());
        }
    }
    out
}

/// `max |omega_T(x) - x|` over [`lattice_directions`], for `T = I + Q`.
pub fn omega_distortion(t: &LinearMap) -> Result<f64> {
    let d = t.dim();
    let q = t.matrix() - DMatrix::<f64>::identity(d, d);
    let q_norm = q.clone().singular_values().max();
    if q_norm >= 0.5 {
        return Err(Error::PerturbationTooLarge(q_norm));
    }
    Ok(lattice_directions(d)
        .iter()
        .map(|x| {
            let y = t.apply(x);
            let n = norm(&y);
            y.iter()
                .zip(x)
                .map(|(a, b)| (a / n - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
}

/// Which Radon implementation [`intersection_body_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadonPath {
    Spectral,
    Geometric,
}

/// `R(rho^{d-1})` truncated to the input band limit, with the discarded energy.
///
/// The power is formed on the grid of band `(d-1) K`, where it is exactly
/// representable, so the only approximation is the final truncation.
pub fn intersection_body(body: &StarBody) -> Result<(StarBody, f64)> {
    intersection_body_with(body, RadonPath::Spectral)
}

pub fn intersection_body_with(body: &StarBody, path: RadonPath) -> Result<(StarBody, f64)> {
    let d = body.dim();
    let k = body.band_limit();
    let p = (d - 1) as i32;
    let power = body.radial.map_values((d - 1) * k, |v| v.powi(p))?;
    let transformed = match path {
        RadonPath::Spectral => radon_spectral(&power),
        RadonPath::Geometric => radon_geometric(&power)?,
    };
    let (out, lost) = transformed.with_band_limit(k);
    Ok((StarBody::new(out)?, lost))
}

/// Surface area of the unit sphere `S^m`.
pub fn sphere_area(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_area(m - 2),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n - 1) / n as f64
}

/// The `(d-1)`-volume of the central section `K ∩ xi^⊥`, by polar
/// coordinates in the hyperplane.
pub fn section_volume(body: &StarBody, xi: &[f64]) -> Result<f64> {
    let d = body.dim();
    if xi.len() != d {
        return Err(Error::DimensionMismatch(xi.len(), d));
    }
    let r = norm(xi);
    let p = (d - 1) as i32;
    let avg = match &body.radial {
        SphereFunction::Zonal(g) => {
            let sub = cached_jacobi_rule(d, subsphere_exponent(d), (d - 1) * g.band_limit() + 2)?;
            let t = xi[d - 1] / r;
            let w = (1.0 - t * t).max(0.0).sqrt();
            sub.integrate_fn(|s| g.eval(w * s).powi(p))
        }
        SphereFunction::S2(g) => {
            let m = 4 * g.band_limit() + 2;
            great_circle_average(|x| g.eval(x).powi(p), [xi[0] / r, xi[1] / r, xi[2] / r], m)
        }
    };
    Ok(ball_volume(d - 1) * avg)
}

fn check_spd(a: &DMatrix<f64>) -> Result<()> {
    let sym = (a - a.transpose()).abs().max() <= 1e-12 * a.abs().max();
    if !sym || a.clone().cholesky().is_none() {
        return Err(Error::NotSpd);
    }
    Ok(())
}

/// `A B_d` for symmetric positive-definite `A`, radial `1 / |A^{-1} xi|`,
/// with the L2 truncation error estimated against band `2K`.
pub fn ellipsoid_body(
    a: &DMatrix<f64>,
    repr: Representation,
    band_limit: usize,
) -> Result<(StarBody, f64)> {
    check_spd(a)?;
    let t = LinearMap::new(a.clone())?.inverse();
    radial_of_inverse_image(&t, repr, band_limit)
}

/// The exact intersection body of `A B_d`: radial `∝ 1 / |A xi|`, mean 1.
pub fn ellipsoid_intersection_exact(
    a: &DMatrix<f64>,
    repr: Representation,
    band_limit: usize,
) -> Result<(StarBody, f64)> {
    check_spd(a)?;
    let t = LinearMap::new(a.clone())?;
    let (body, err) = radial_of_inverse_image(&t, repr, band_limit)?;
    let (body, gamma) = body.mean_normalized();
    Ok((body, err * gamma))
}

/// `1 / |T xi|` at band `K`, plus the energy between bands `K` and `2K`.
fn radial_of_inverse_image(
    t: &LinearMap,
    repr: Representation,
    band_limit: usize,
) -> Result<(StarBody, f64)> {
    let fine = apply_linear(
        &SphereFunction::constant(repr, t.dim(), 2 * band_limit, 1.0)?,
        t,
    )?;
    let (coarse, lost) = fine.with_band_limit(band_limit);
    Ok((StarBody::new(coarse)?, lost.sqrt()))
}
