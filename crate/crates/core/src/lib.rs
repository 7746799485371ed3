//! Spectral bandit sampling of smart-meter voltages on radial distribution
//! feeders.
//!
//! A utility can only poll `b` of its `n` meters per round and wants to find
//! the largest voltage excursion. Voltages are modelled with LinDistFlow,
//! whose injection-to-voltage map is the inverse of a graph Laplacian; its
//! eigenbasis gives every node a feature vector, and a UCB learner with a
//! spectrally weighted regularizer chooses which meters to read.
//!
//! * [`grid`]: case parsing, Laplacians, the system Laplacian and its basis.
//! * [`powerflow`]: LinDistFlow and AC voltage magnitudes.
//! * [`loads`]: bounded random injections and their concentration bounds.
//! * [`bandit`]: reward, greedy selection, estimator, confidence widths.
//! * [`harness`]: experiments, regret traces, CSV output.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod error;
pub mod grid;
pub mod harness;
pub mod loads;
pub mod powerflow;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid-model.md")]
    mod grid_model {}
    #[doc = include_str!("../../../book/src/power-flow.md")]
    mod power_flow {}
    #[doc = include_str!("../../../book/src/concentration.md")]
    mod concentration {}
    #[doc = include_str!("../../../book/src/bandit.md")]
    mod bandit {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
