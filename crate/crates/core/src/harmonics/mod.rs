//! Harmonic expansions on the sphere.
//!
//! Two representations share one interface through [`SphereFunction`]:
//! zonal profiles in any dimension `d >= 3` and general functions on `S^2`.
//! In both, coefficients are taken in an `L^2`-orthonormal basis for the
//! normalized measure, so the degree-`k` projection `H_k^f` is read straight
//! off the coefficient vector and Parseval is a plain sum of squares.

pub mod multiplier;
pub mod norms;
pub mod s2;
pub mod zonal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub use multiplier::{apply_multiplier, theta, theta_cutoff, u_alpha_norm, ThetaCutoff};
pub use norms::{derivative_norms_fd_at, derivative_sup_norms, derivative_sup_norms_fd, sup_norm};
pub use s2::{lm_index, real_sh_eval, s2_space, S2Function, S2Space};
pub use zonal::{zonal_basis_eval, zonal_space, ZonalProfile, ZonalSpace};

/// Which basis a function is expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Zonal,
    S2,
}

/// Per-degree energies `e_k = ||H_k^f||_2^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSpectrum {
    pub energies: Vec<f64>,
}

impl DegreeSpectrum {
    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }

    /// `sqrt(sum_{k > n} e_k)`, the L2 distance to the degree-`n` truncation.
    pub fn tail(&self, n: usize) -> f64 {
        self.energies.iter().skip(n + 1).sum::<f64>().sqrt()
    }

    /// Energy carried by odd degrees.
    pub fn odd_energy(&self) -> f64 {
        self.energies.iter().skip(1).step_by(2).sum()
    }
}

/// A band-limited function on the sphere in one of the two representations.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereFunction {
    Zonal(ZonalProfile),
    S2(S2Function),
}

impl From<ZonalProfile> for SphereFunction {
    fn from(f: ZonalProfile) -> Self {
        SphereFunction::Zonal(f)
    }
}

impl From<S2Function> for SphereFunction {
    fn from(f: S2Function) -> Self {
        SphereFunction::S2(f)
    }
}

impl SphereFunction {
    /// The constant function in the given representation.
    pub fn constant(
        repr: Representation,
        dim: usize,
        band_limit: usize,
        value: f64,
    ) -> Result<Self> {
        match repr {
            Representation::Zonal => Ok(ZonalProfile::constant(dim, band_limit, value)?.into()),
            Representation::S2 => {
                if dim != 3 {
                    return Err(Error::DimensionMismatch(dim, 3));
                }
                Ok(S2Function::constant(band_limit, value)?.into())
            }
        }
    }

    /// Rebuilds a function from a raw coefficient vector.
    pub fn from_coeffs(repr: Representation, dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        match repr {
            Representation::Zonal => Ok(ZonalProfile::from_coeffs(dim, coeffs)?.into()),
            Representation::S2 => {
                if dim != 3 {
                    return Err(Error::DimensionMismatch(dim, 3));
                }
                Ok(S2Function::from_coeffs(coeffs)?.into())
            }
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            SphereFunction::Zonal(_) => Representation::Zonal,
            SphereFunction::S2(_) => Representation::S2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SphereFunction::Zonal(f) => f.dim(),
            SphereFunction::S2(_) => 3,
        }
    }

    pub fn band_limit(&self) -> usize {
        match self {
            SphereFunction::Zonal(f) => f.band_limit(),
            SphereFunction::S2(f) => f.band_limit(),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        match self {
            SphereFunction::Zonal(f) => f.coeffs(),
            SphereFunction::S2(f) => f.coeffs(),
        }
    }

    /// Values at the quadrature nodes of the function's own space.
    pub fn node_values(&self) -> &[f64] {
        match self {
            SphereFunction::Zonal(f) => f.node_values(),
            SphereFunction::S2(f) => f.grid_values(),
        }
    }

    fn quadrature_of(&self, values: &[f64]) -> f64 {
        match self {
            SphereFunction::Zonal(f) => integrate(values, f.space().rule.as_ref()),
            SphereFunction::S2(f) => integrate(values, &f.space().grid),
        }
        .expect("node values match their own space")
    }

    pub fn spectrum(&self) -> DegreeSpectrum {
        let mut energies = vec![0.0; self.band_limit() + 1];
        match self {
            SphereFunction::Zonal(f) => {
                for (e, a) in energies.iter_mut().zip(f.coeffs()) {
                    *e = a * a;
                }
            }
            SphereFunction::S2(f) => {
                for (i, a) in f.coeffs().iter().enumerate() {
                    energies[S2Function::degree_of(i)] += a * a;
                }
            }
        }
        DegreeSpectrum { energies }
    }

    /// Integral against the normalized measure.
    pub fn mean(&self) -> f64 {
        self.quadrature_of(self.node_values())
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.node_values().iter().map(|v| v * v).collect();
        self.quadrature_of(&sq).max(0.0).sqrt()
    }

    /// Inner product by quadrature on the finer of the two spaces.
    pub fn inner(&self, other: &SphereFunction) -> Result<f64> {
        self.check_compatible(other)?;
        let band = self.band_limit().max(other.band_limit());
        let a = self.with_band_limit(band).0;
        let b = other.with_band_limit(band).0;
        let prod: Vec<f64> = a
            .node_values()
            .iter()
            .zip(b.node_values())
            .map(|(x, y)| x * y)
            .collect();
        Ok(a.quadrature_of(&prod))
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }

    /// Value at a point of `R^d \ {0}` through the degree-0 homogeneous extension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SphereFunction::Zonal(f) => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                f.eval((x[x.len() - 1] / r).clamp(-1.0, 1.0))
            }
            SphereFunction::S2(f) => f.eval([x[0], x[1], x[2]]),
        }
    }

    /// Coefficient-space map `a -> m(k) a` on each degree `k`.
    pub fn map_degrees<F: Fn(usize, f64) -> f64>(&self, m: F) -> Self {
        match self {
            SphereFunction::Zonal(f) => f.map_coeffs(m).into(),
            SphereFunction::S2(f) => f.map_coeffs(m).into(),
        }
    }

    /// The degree-`k` component `H_k^f`.
    pub fn project_degree(&self, k: usize) -> Result<Self> {
        if k > self.band_limit() {
            return Err(Error::BandLimit {
                degree: k,
                band_limit: self.band_limit(),
            });
        }
        Ok(self.map_degrees(|j, a| if j == k { a } else { 0.0 }))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_degrees(|_, a| c * a)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs().to_vec();
        coeffs[0] += c;
        Self::from_coeffs(self.representation(), self.dim(), coeffs).expect("same space")
    }

    fn check_compatible(&self, other: &SphereFunction) -> Result<()> {
        if self.representation() != other.representation() {
            return Err(Error::Representation(
                "zonal and S2 functions cannot be combined",
            ));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// `self + c * other`, on the larger band limit.
    pub fn axpy(&self, c: f64, other: &SphereFunction) -> Result<Self> {
        self.check_compatible(other)?;
        let band = self.band_limit().max(other.band_limit());
        let a = self.with_band_limit(band).0;
        let b = other.with_band_limit(band).0;
        let coeffs = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| x + c * y)
            .collect();
        Self::from_coeffs(self.representation(), self.dim(), coeffs)
    }

    /// Pads or truncates to `band_limit`; returns the discarded energy.
    pub fn with_band_limit(&self, band_limit: usize) -> (Self, f64) {
        match self {
            SphereFunction::Zonal(f) => {
                let (g, lost) = f.with_band_limit(band_limit);
                (g.into(), lost)
            }
            SphereFunction::S2(f) => {
                let (g, lost) = f.with_band_limit(band_limit);
                (g.into(), lost)
            }
        }
    }

    /// Applies `f` to the values on the grid of the `band_limit` space and projects back.
    pub fn map_values<F: Fn(f64) -> f64>(&self, band_limit: usize, f: F) -> Result<Self> {
        Ok(match self {
            SphereFunction::Zonal(g) => g.map_pointwise(band_limit, |_, v| f(v))?.into(),
            SphereFunction::S2(g) => g.map_pointwise(band_limit, |_, v| f(v))?.into(),
        })
    }

    /// Minimum over the function's own quadrature nodes.
    pub fn node_min(&self) -> f64 {
        self.node_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn node_max(&self) -> f64 {
        self.node_values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
