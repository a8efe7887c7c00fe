//! Semidefinite programs for steering and incompatibility.
//!
//! Local hidden-state models are discretised over the `d^k` deterministic
//! response functions; every program is handed to a [`ConicSolver`]. The
//! default engine is [`ipm::InteriorPoint`]; `HDSTEER_SOLVER` selects an
//! engine by name.

pub mod cone;
pub mod incompat;
pub mod ipm;
pub mod steering;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::HermMatrix;

pub use cone::{ConeProblem, ConeSolution, ConicSolver, ProblemBuilder, SolveStatus};
pub use incompat::{incompatibility_eta_g, incompatibility_robustness};
pub use steering::{lhs_membership, sr_bisection_oracle, steering_robustness, LhsVerdict};

/// Default limit on the number of enumerated deterministic strategies.
pub const DEFAULT_STRATEGY_CAP: usize = 100_000;

/// A response function `x ↦ a`, outcomes numbered from 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DeterministicStrategy {
    pub assignment: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn outcome(&self, x: usize) -> usize {
        self.assignment[x]
    }
}

/// `d^k`, or a capacity error if it exceeds `cap`.
pub fn strategy_count(d: usize, k: usize, cap: usize) -> Result<usize> {
    let required = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::Capacity { required, cap });
    }
    Ok(required as usize)
}

/// All `d^k` strategies in lexicographic order (setting 0 most significant).
pub fn enumerate_strategies(d: usize, k: usize, cap: usize) -> Result<Vec<DeterministicStrategy>> {
    let count = strategy_count(d, k, cap)?;
    Ok((0..count)
        .map(|mut idx| {
            let mut assignment = vec![0; k];
            for slot in assignment.iter_mut().rev() {
                *slot = idx % d;
                idx /= d;
            }
            DeterministicStrategy { assignment }
        })
        .collect())
}

/// Solver choice and enumeration cap shared by all programs.
#[derive(Clone)]
pub struct SdpConfig {
    pub strategy_cap: usize,
    pub solver: Arc<dyn ConicSolver>,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            strategy_cap: DEFAULT_STRATEGY_CAP,
            solver: Arc::new(ipm::InteriorPoint::default()),
        }
    }
}

impl SdpConfig {
    /// Default settings with the engine named by `HDSTEER_SOLVER`, if set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(name) = std::env::var("HDSTEER_SOLVER") {
            cfg.solver = solver_by_name(&name)?;
        }
        Ok(cfg)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.strategy_cap = cap;
        self
    }
}

pub fn solver_by_name(name: &str) -> Result<Arc<dyn ConicSolver>> {
    match name {
        "" | "ipm" => Ok(Arc::new(ipm::InteriorPoint::default())),
        other => Err(Error::Capability(format!(
            "unknown conic solver '{other}' (available: ipm)"
        ))),
    }
}

/// Result of one of the steering or incompatibility programs.
#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub value: f64,
    /// Problem-specific primal blocks (LHS weights, parent elements).
    pub primal_witness: Vec<HermMatrix>,
    /// Problem-specific dual blocks (for steering: `F_{a|x}` at index `x·d + a`).
    pub dual_witness: Vec<HermMatrix>,
    pub gap: f64,
    pub status: SolveStatus,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub solver: &'static str,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub constraints: usize,
    pub blocks: usize,
}

impl Diagnostics {
    fn new(solver: &'static str, p: &ConeProblem, s: &ConeSolution) -> Self {
        Self {
            solver,
            iterations: s.iterations,
            primal_objective: s.primal_objective,
            dual_objective: s.dual_objective,
            primal_infeasibility: s.primal_infeasibility,
            dual_infeasibility: s.dual_infeasibility,
            constraints: p.num_constraints(),
            blocks: p.block_sizes().len(),
        }
    }
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
