//! Numerics for the intersection-body map near the Euclidean ball.
//!
//! Functions on the sphere are band-limited and carried in two forms:
//! zonal profiles on `S^(d-1)` and real spherical harmonics on `S^2`. The
//! guide in `book/` walks through the modules; its code blocks run as
//! doc-tests of this crate.

pub mod body;
pub mod error;
pub mod experiments;
pub mod harmonics;
pub mod iteration;
pub mod quadrature;
pub mod radon;
pub mod scaling;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/harmonics.md")]
    mod harmonics {}
    #[doc = include_str!("../../../book/src/radon.md")]
    mod radon {}
    #[doc = include_str!("../../../book/src/star_bodies.md")]
    mod star_bodies {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    mod iteration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
