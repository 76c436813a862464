//! Spectral multipliers and the `U_alpha` approximation norm.
//!
//! The smooth cutoff is the two-sided step built from `psi(s) = exp(-1/s)`:
//!
//! ```text
//!   step(x) = psi(x) / (psi(x) + psi(1 - x)),   Theta(s) = 1 - step(s - 1)
//! ```
//!
//! so `Theta = 1` on `[0, 1]`, `Theta = 0` on `[2, inf)`, it is `C^inf` and
//! symmetric about `s = 3/2` where it equals one half.

use super::SphereFunction;

fn psi(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// The smooth cutoff `Theta(s)`.
pub fn theta(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let x = s - 1.0;
    let (a, b) = (psi(x), psi(1.0 - x));
    1.0 - a / (a + b)
}

/// Degree weights `k -> Theta(k / n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCutoff {
    pub n: usize,
}

impl ThetaCutoff {
    pub fn weight(&self, k: usize) -> f64 {
        theta(k as f64 / self.n as f64)
    }
}

pub fn theta_cutoff(n: usize) -> ThetaCutoff {
    ThetaCutoff { n: n.max(1) }
}

/// `sum_k m(k) H_k^f`, exact in coefficient space.
pub fn apply_multiplier<M: Fn(usize) -> f64>(f: &SphereFunction, m: M) -> SphereFunction {
    f.map_degrees(|k, a| m(k) * a)
}

/// `max(||f||_inf, max_{1 <= n <= n_max} n^alpha * ||f - f_{<=n}||_2)`.
///
/// The best `L^2` approximation by polynomials of degree `n` is the spectral
/// truncation, so the tail of the degree spectrum is the exact distance.
pub fn u_alpha_norm(f: &SphereFunction, alpha: f64, n_max: usize) -> f64 {
    let spectrum = f.spectrum();
    let tails = (1..=n_max).map(|n| (n as f64).powf(alpha) * spectrum.tail(n));
    tails.fold(f.sup_norm(), f64::max)
}
