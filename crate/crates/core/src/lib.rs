//! Nonsingular Bernoulli actions of free groups and of the integers.
//!
//! Marginal families, their Kakutani cocycles, conservativity criteria,
//! Radon-Nikodym products and Krieger-type classification of two-point and
//! atomic base measures.

pub mod cli;
pub mod cocycles;
pub mod criteria;
pub mod error;
pub mod group;
pub mod marginals;
pub mod num;
pub mod presets;
pub mod report;
mod pool;
pub mod typeclass;
pub mod verify;

pub use error::{Error, Result};
