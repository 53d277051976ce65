#![allow(clippy::needless_range_loop)]

pub mod clifford;
pub mod error;
pub mod field;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::{CPi, CRat, PiScalar, Rational};
pub mod ratxi;
pub mod sphere;
pub mod boundary;
pub mod fixture;
pub mod oracle;
pub mod lemmas;
pub mod symbols;
pub mod report;
