use serde::{Deserialize, Serialize};

use crate::costs::CostBreakdown;
use crate::error::{ModelError, Result};
use crate::scenario::{RequestRef, Scenario, ServerId};

use super::validate::FeasibilityReport;

/// How one request is executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Decision {
    Local { clocks_hz: Vec<f64> },
    Offloaded { hosts: Vec<ServerId>, clocks_hz: Vec<f64> },
}

impl Decision {
    pub fn is_offloaded(&self) -> bool {
        matches!(self, Decision::Offloaded { .. })
    }

    pub fn clocks_hz(&self) -> &[f64] {
        match self {
            Decision::Local { clocks_hz } | Decision::Offloaded { clocks_hz, .. } => clocks_hz,
        }
    }
}

/// Decisions for every request, indexed `[mu][req]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub decisions: Vec<Vec<Decision>>,
}

impl Assignment {
    pub fn decision(&self, r: RequestRef) -> &Decision {
        &self.decisions[r.mu][r.req]
    }

    pub fn set(&mut self, r: RequestRef, d: Decision) {
        self.decisions[r.mu][r.req] = d;
    }

    pub fn iter(&self) -> impl Iterator<Item = (RequestRef, &Decision)> {
        self.decisions.iter().enumerate().flat_map(|(mu, ds)| {
            ds.iter().enumerate().map(move |(req, d)| (RequestRef { mu, req }, d))
        })
    }

    pub fn offloaded(&self) -> impl Iterator<Item = RequestRef> + '_ {
        self.iter().filter(|(_, d)| d.is_offloaded()).map(|(r, _)| r)
    }

    /// Errors unless there is one decision per request with one host and
    /// clock per chain stage.
    pub fn check_shape(&self, scenario: &Scenario) -> Result<()> {
        if self.decisions.len() != scenario.mus.len() {
            return Err(ModelError::IncompleteAssignment(format!(
                "{} users decided, scenario has {}",
                self.decisions.len(),
                scenario.mus.len()
            )));
        }
        for (mu, ds) in self.decisions.iter().enumerate() {
            let user = scenario.mu(mu);
            if ds.len() != user.requests.len() {
                return Err(ModelError::IncompleteAssignment(format!(
                    "user {mu}: {} decisions for {} requests",
                    ds.len(),
                    user.requests.len()
                )));
            }
            for (req, d) in ds.iter().enumerate() {
                let n = user.requests[req].chain.len();
                let ok = match d {
                    Decision::Local { clocks_hz } => clocks_hz.len() == n,
                    Decision::Offloaded { hosts, clocks_hz } => hosts.len() == n && clocks_hz.len() == n,
                };
                if !ok {
                    return Err(ModelError::IncompleteAssignment(format!(
                        "user {mu} request {req}: decision does not cover its {n} stages"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One Step-2 iteration of the iterative solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    /// Request forced to offload in this iteration; `None` for the initial solve.
    pub migrated: Option<RequestRef>,
    pub delta_z: f64,
    pub accepted: bool,
    /// Objective after the iteration (the previous one when rejected).
    pub objective: f64,
}

/// Intermediate quantities of one placement-and-allocation pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AllocationRecord {
    /// Delay-constraint multiplier of the clock estimate, per offloaded request.
    pub estimate_multipliers: Vec<(RequestRef, f64)>,
    /// Equality multipliers of the remote allocation problem, per placed request.
    pub delay_multipliers: Vec<(RequestRef, f64)>,
    /// Per-stage time budgets (backhaul plus compute) of each placed request.
    pub slack_vars: Vec<(RequestRef, Vec<f64>)>,
    /// Capacity left on each server after placement, using estimated clocks.
    pub free_capacity_hz: Vec<f64>,
    /// Server ranking metric at the start of the second placement phase.
    pub ranking: Vec<f64>,
    /// Requests whose chain could not be placed.
    pub unplaced: Vec<RequestRef>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub steps: Vec<TraceStep>,
    pub last_allocation: AllocationRecord,
}

impl SolverTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.objective).collect()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].objective <= w[0].objective)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub algorithm: String,
    pub objective: f64,
    pub per_mu: Vec<CostBreakdown>,
    pub offloaded_requests: usize,
    pub offloaded_bits: f64,
    /// Mean over users of local plus transmit energy.
    pub avg_energy_j: f64,
    /// Requests that fit neither locally nor remotely.
    pub unserved: Vec<RequestRef>,
    pub feasibility: FeasibilityReport,
}

/// Everything a solver returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub assignment: Assignment,
    pub report: SolutionReport,
    pub trace: SolverTrace,
}
