//! Channel-allocation solvers.
//!
//! [`anneal`] holds the softmax-relaxed gradient-descent solver; [`exact`]
//! holds exhaustive enumeration, branch-and-bound, and a coordinate-descent
//! local-search baseline. All solvers return the same [`SolverReport`], and
//! every report's `objective` is recomputed from the returned allocation
//! through [`PainMatrix::total_pain`] rather than trusted from solver
//! internals.

pub mod anneal;
pub mod exact;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::io::MatrixDocument;
use crate::pain::{ChannelAllocation, Neighborhood, PainMatrix};
use crate::{Error, Result};

pub use anneal::{solve as solve_anneal, AnnealConfig, SolverWeights};
pub use exact::{
    solve_branch_and_bound, solve_coordinate_descent, solve_exhaustive, CoordinateDescentConfig,
    ExactConfig,
};

/// Which solving algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "anneal")]
    Anneal,
    #[serde(rename = "exhaustive")]
    Exhaustive,
    #[serde(rename = "bnb")]
    BranchAndBound,
    #[serde(rename = "cd")]
    CoordinateDescent,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Anneal => "anneal",
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::BranchAndBound => "bnb",
            SolverKind::CoordinateDescent => "cd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anneal" => Ok(SolverKind::Anneal),
            "exhaustive" => Ok(SolverKind::Exhaustive),
            "bnb" => Ok(SolverKind::BranchAndBound),
            "cd" => Ok(SolverKind::CoordinateDescent),
            other => Err(Error::invalid(
                "solver name",
                format!("`{other}` is not one of anneal, exhaustive, bnb, cd"),
            )),
        }
    }
}

/// One sampled point of the annealing trace: `[beta, step, soft pain]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample(pub f64, pub usize, pub f64);

impl TraceSample {
    pub fn beta(&self) -> f64 {
        self.0
    }

    pub fn step(&self) -> usize {
        self.1
    }

    pub fn soft_pain(&self) -> f64 {
        self.2
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solver: SolverKind,
    /// Hard allocation chosen by the solver.
    pub allocation: ChannelAllocation,
    /// Hard total pain of `allocation` on the solved matrix, recomputed.
    pub objective: f64,
    /// Soft pain (without any L2 term) at the final phase; annealing only.
    pub soft_objective_final: Option<f64>,
    pub trace: Vec<TraceSample>,
    pub restarts_used: u32,
    pub seed: Option<u64>,
    /// Solver configuration as it was actually run, for reproducibility.
    pub config: serde_json::Value,
}

impl SolverReport {
    pub(crate) fn new(
        solver: SolverKind,
        p: &PainMatrix,
        allocation: ChannelAllocation,
        config: serde_json::Value,
    ) -> Result<Self> {
        let objective = p.total_pain(&allocation)?;
        Ok(SolverReport {
            solver,
            allocation,
            objective,
            soft_objective_final: None,
            trace: Vec::new(),
            restarts_used: 1,
            seed: None,
            config,
        })
    }

    /// Attaches home ids so the report can be serialized.
    pub fn to_document(&self, neighborhood: &Neighborhood) -> Result<SolverReportDocument> {
        Ok(SolverReportDocument {
            solver: self.solver.as_str().to_string(),
            allocation: MatrixDocument::from_allocation(neighborhood, &self.allocation)?,
            objective: self.objective,
            soft_objective_final: self.soft_objective_final,
            trace: self.trace.clone(),
            restarts_used: self.restarts_used,
            seed: self.seed,
            config: self.config.clone(),
        })
    }
}

/// Serializable form of [`SolverReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReportDocument {
    pub solver: String,
    pub allocation: MatrixDocument,
    pub objective: f64,
    pub soft_objective_final: Option<f64>,
    pub trace: Vec<TraceSample>,
    pub restarts_used: u32,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

/// Runs `kind` on `p` with a JSON config (missing fields take defaults).
///
/// When `seed_override` is given it wins over any seed in the config; this
/// is how the CLI `--seed` flag and the experiment harness fan-out work.
pub fn solve_with(
    kind: SolverKind,
    p: &PainMatrix,
    num_channels: usize,
    config: &serde_json::Value,
    seed_override: Option<u64>,
) -> Result<SolverReport> {
    fn from_value<T: serde::de::DeserializeOwned + Default>(v: &serde_json::Value) -> Result<T> {
        if v.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(v.clone())
            .map_err(|e| Error::invalid("solver config", e.to_string()))
    }

    match kind {
        SolverKind::Anneal => {
            let mut cfg: AnnealConfig = from_value(config)?;
            if let Some(seed) = seed_override {
                cfg.seed = seed;
            }
            anneal::solve(p, num_channels, &cfg)
        }
        SolverKind::Exhaustive => {
            let cfg: ExactConfig = from_value(config)?;
            exact::solve_exhaustive(p, num_channels, &cfg)
        }
        SolverKind::BranchAndBound => {
            let cfg: ExactConfig = from_value(config)?;
            exact::solve_branch_and_bound(p, num_channels, &cfg)
        }
        SolverKind::CoordinateDescent => {
            let mut cfg: CoordinateDescentConfig = from_value(config)?;
            if let Some(seed) = seed_override {
                cfg.seed = seed;
            }
            exact::solve_coordinate_descent(p, num_channels, cfg.restarts, cfg.seed)
        }
    }
}
