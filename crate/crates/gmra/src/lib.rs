//! Generalized scaling vectors and Parseval frame wavelets from
//! matrix-valued filter systems on the torus, plus the loop-group
//! action on M-systems.

pub mod error;
pub mod rational;
pub mod scalar;

pub mod cascade;
pub mod catalog;
pub mod config;
pub mod filters;
pub mod funcalg;
pub mod lattice;
pub mod msystems;
pub mod multiplicity;
pub mod report;
pub mod wavelet;

pub use error::{Error, Result};
pub use rational::{Rat, TorusPoint};
pub use scalar::Scalar;
