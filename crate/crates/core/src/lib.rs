//! Rigorous numerics and exact algebra for the generalized Euler-Mascheroni,
//! Euler-Gompertz and Eta constants: the moments of the standard Gumbel
//! distribution and their relatives.

pub mod asymptotics;
pub mod bell;
pub mod cli;
pub mod consts;
pub mod det;
pub mod error;
pub mod exact;
pub mod interval;
pub mod jacobian;
pub mod ledger;
pub mod poly;
pub mod precision;
pub mod quadrature;
pub mod sequences;
pub mod tables;

pub use error::{Error, Result};
pub use interval::Interval;
pub use precision::PrecisionConfig;
pub use rug::{Integer, Rational};
