//! Computational tools for the Poisson heuristic on point counts of random
//! curves over finite fields.
//!
//! - [`exactcomb`]: exact predictions (lambda, moments, Hilbert series).
//! - [`traceformula`]: stable/unstable trace bookkeeping and the large-`q` bound.
//! - [`rmt`]: constrained Haar-random `USp(2g)` point-count experiments.
//! - [`census`]: exhaustive weighted censuses of genus 1 and 2 curves.

pub mod census;
pub mod error;
pub mod exactcomb;
pub mod rmt;
pub mod traceformula;

pub use error::{LabError, Result};
