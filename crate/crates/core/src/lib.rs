//! Coding schemes and error-probability bounds for discrete-time Gaussian
//! channels with ideal (noiseless, instantaneous) feedback.
//!
//! The crate is organised by scheme:
//!
//! - [`elias`]: linear MMSE refinement of a Gaussian source over `n` uses.
//! - [`sk`]: M-PAM at time 0 followed by Elias refinement of the noise, with
//!   the exact error probability and its closed-form upper bounds, plus the
//!   broadband limit calculators.
//! - [`highsnr`]: PAM retransmission of the receiver's decision error, whose
//!   error probability falls one exponential order per channel use.
//! - [`twophase`]: the combined scheme and its planner.
//! - [`lowerbound`]: binary and M-ary lower bounds on error probability.
//!
//! Magnitudes such as `1/g_k(x)` (a `k`-fold iterated exponential) cannot be
//! held in an `f64`; [`numerics::TowerReal`] stores them by their iterated
//! logarithms. Every Monte Carlo routine takes an [`numerics::RngContract`]
//! and produces bit-identical results for a given seed, independent of the
//! number of worker threads.

pub mod cli;
pub mod elias;
mod error;
pub mod highsnr;
pub mod lowerbound;
pub mod numerics;
pub mod report;
pub mod sk;
pub mod twophase;

pub use error::{Error, Result};
pub use numerics::{RngContract, Side, TowerReal};
