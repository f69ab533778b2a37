//! Privacy accounting, mechanisms and utility analysis for Dirichlet
//! posterior sampling.
//!
//! A single draw `Y ~ Dir(r·x + α)` from a Dirichlet posterior is
//! Rényi-differentially private once the prior floor `α_m = min α` is large
//! enough relative to the sensitivity of the data statistic `x`. This crate
//! provides:
//!
//! * [`specfun`]: log-gamma, digamma, trigamma and log-beta.
//! * [`divergence`]: exact Rényi and KL divergences between Dirichlet
//!   distributions, used as the oracle for every guarantee.
//! * [`accountant`]: forward guarantees, inverse solvers for `α_m` and `r`,
//!   conversion to `(ε, δ)`-DP and composition.
//! * [`mechanisms`]: the Dirichlet, Gaussian and Laplace mechanisms for
//!   normalized histograms, their utility bounds and the histogram benchmark.
//! * [`psrl`]: private posterior sampling for reinforcement learning on
//!   RiverSwim.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accountant;
pub mod divergence;
mod error;
pub mod kvconf;
pub mod mechanisms;
pub mod optim;
pub mod psrl;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// A nonnegative quantity that may be infinite.
///
/// Returned by the Rényi divergence when the shifted parameter vector leaves
/// the positive orthant and by the accountant when the requested order lies
/// outside the feasible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(&self) -> Option<f64> {
        match *self {
            Bound::Finite(v) => Some(v),
            Bound::Infinite => None,
        }
    }

    /// The value as an `f64`, with [`Bound::Infinite`] mapped to `+inf`.
    pub fn value(&self) -> f64 {
        match *self {
            Bound::Finite(v) => v,
            Bound::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}
