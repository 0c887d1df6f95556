//! Exact and high-precision computation of the piecewise polynomials γ_k(c),
//! the Hankel-determinant identities around them, elliptic aliquot integrals and
//! divisor-variance experiments.

pub mod aliquot;
pub mod cli;
pub mod divisor;
pub mod error;
pub mod exactpoly;
pub mod gammaft;
pub mod hankel;
pub mod hp;
pub mod special;
pub mod toda;

pub use error::{Error, Result};
