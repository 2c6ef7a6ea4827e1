//! Learning sums of independent Bernoulli variables (Poisson binomial
//! distributions) and weighted sums with few distinct weights from samples.
//!
//! The crate is `no_std` and only needs `alloc`. It provides exact PMFs and
//! distances ([`dist`]), DKW-sized empirical estimates ([`empirical`]), the
//! sparse / heavy-binomial cover ([`cover`]), the pairwise-competition
//! tournament ([`selection`]), the proper learners and the unimodal histogram
//! learner ([`learner`]), and weighted sums ([`weighted`]).
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cover;
pub mod dist;
pub mod empirical;
mod error;
pub mod learner;
pub mod sampling;
pub mod selection;
pub mod weighted;

pub use error::{Error, Result};
