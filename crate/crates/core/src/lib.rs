//! Centralized Wi-Fi channel selection for dense neighborhoods.
//!
//! Dozens of homes packed into a city block or an apartment building share
//! two or three non-overlapping Wi-Fi channels. This crate estimates, from AP
//! telemetry, how much airtime pain each pair of homes could inflict on each
//! other, and then picks one channel per home so that the neighborhood-wide
//! pain is as small as possible.
//!
//! The pieces, in pipeline order:
//!
//! * [`estimation`] turns raw usage samples and radio-scan reports into the
//!   co-usage matrix `U`, the sensing matrix `S`, its binarized form `S^b`,
//!   and the potential-pain matrix `P = S^b ⊙ U`.
//! * [`pain`] holds the neighborhood data model and the objective
//!   `Tr(CᵀPC)` over one-hot (or row-stochastic) channel allocations `C`.
//! * [`solver`] minimizes the objective: a softmax-annealed gradient-descent
//!   solver, exhaustive enumeration, branch-and-bound, and a
//!   coordinate-descent baseline.
//! * [`synth`] generates synthetic neighborhoods with known ground truth so
//!   the whole chain and the train/test experiment are verifiable.
//! * [`harness`] runs the train/test protocol: estimate on train days, solve,
//!   freeze the allocation, evaluate on the test day.

pub mod estimation;
mod error;
pub mod harness;
pub mod io;
pub mod pain;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use pain::{AllocationMode, ChannelAllocation, Neighborhood, PainBreakdown, PainMatrix};
pub use solver::{SolverKind, SolverReport};
