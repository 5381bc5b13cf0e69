use serde::{Deserialize, Serialize};

use super::graph::{BackhaulGraph, FunctionId, ServerId};
use crate::error::{ModelError, Result};

/// A base station cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Edge server co-located with this base station.
    pub bs_server: ServerId,
    pub position: [f64; 2],
    pub antennas: u32,
    pub bandwidth_hz: f64,
    /// Indices into [`Scenario::mus`].
    pub mus: Vec<usize>,
}

/// One stage of a service function chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStage {
    pub function: FunctionId,
    /// Data ratio of this stage relative to the raw request input.
    pub xi: f64,
    pub cycles_per_bit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRequest {
    pub data_fraction: f64,
    pub chain: Vec<ChainStage>,
}

impl ServiceRequest {
    /// Bits entering the chain, `zeta * u`.
    pub fn input_bits(&self, total_input_bits: f64) -> f64 {
        self.data_fraction * total_input_bits
    }

    /// CPU cycles needed by each stage.
    pub fn stage_cycles(&self, total_input_bits: f64) -> impl Iterator<Item = f64> + '_ {
        let bits = self.input_bits(total_input_bits);
        self.chain.iter().map(move |s| bits * s.xi * s.cycles_per_bit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobileUser {
    pub cell: usize,
    /// Index of this user within its cell; co-channel peers share it.
    pub index: usize,
    pub position: [f64; 2],
    pub max_clock_hz: f64,
    pub kappa: f64,
    pub total_input_bits: f64,
    pub deadline_s: f64,
    pub energy_budget_j: f64,
    pub compute_budget: f64,
    pub tx_power_w: f64,
    /// Weight of this user's cost in the remote allocation objective.
    pub slave_weight: f64,
    pub requests: Vec<ServiceRequest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceParams {
    pub eta: f64,
    /// Dollars per cycle at the reference clock.
    pub vartheta: f64,
    pub f_ref_hz: f64,
}

impl Default for PriceParams {
    fn default() -> Self {
        Self { eta: 1.0, vartheta: 2.5e-12, f_ref_hz: 1e9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub theta_tx: f64,
    pub theta_cp: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { theta_tx: 0.8, theta_cp: 0.2 }
    }
}

/// Identifies request `req` of mobile user `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RequestRef {
    pub mu: usize,
    pub req: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub graph: BackhaulGraph,
    pub cells: Vec<Cell>,
    pub mus: Vec<MobileUser>,
    pub pathloss_exponent: f64,
    pub weights: Weights,
    pub price: PriceParams,
    pub seed: u64,
    /// Upper bound applied to every SIR; also stands in for the interference
    /// term when there is a single cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sir_cap: Option<f64>,
}

impl Scenario {
    pub fn mu(&self, mu: usize) -> &MobileUser {
        &self.mus[mu]
    }

    pub fn request(&self, r: RequestRef) -> &ServiceRequest {
        &self.mus[r.mu].requests[r.req]
    }

    pub fn home_server(&self, mu: usize) -> ServerId {
        self.cells[self.mus[mu].cell].bs_server
    }

    pub fn cell_of(&self, mu: usize) -> &Cell {
        &self.cells[self.mus[mu].cell]
    }

    /// All requests in (user, request) order.
    pub fn requests(&self) -> impl Iterator<Item = RequestRef> + '_ {
        self.mus
            .iter()
            .enumerate()
            .flat_map(|(mu, m)| (0..m.requests.len()).map(move |req| RequestRef { mu, req }))
    }

    pub fn request_count(&self) -> usize {
        self.mus.iter().map(|m| m.requests.len()).sum()
    }

    /// Per-link delay assumed for one hop before a placement is known.
    pub fn hop_delay_s(&self) -> f64 {
        self.graph.max_setup_delay()
    }

    /// Checks the structural invariants of the scenario.
    pub fn validate(&self) -> Result<()> {
        let w = self.weights;
        if !(w.theta_tx >= 0.0 && w.theta_cp >= 0.0 && ((w.theta_tx + w.theta_cp) - 1.0).abs() < 1e-12) {
            return Err(ModelError::Config(format!(
                "weights must be non-negative and sum to 1, got ({}, {})",
                w.theta_tx, w.theta_cp
            )));
        }
        let p = self.price;
        if !(p.vartheta > 0.0 && p.f_ref_hz > 0.0 && p.eta.is_finite()) {
            return Err(ModelError::Config("invalid price parameters".into()));
        }
        let mut seen = vec![false; self.mus.len()];
        for (ci, c) in self.cells.iter().enumerate() {
            if c.bs_server >= self.graph.len() || !self.graph.server(c.bs_server).is_edge {
                return Err(ModelError::Config(format!(
                    "cell {ci} is not attached to an edge server"
                )));
            }
            if !(c.bandwidth_hz > 0.0) {
                return Err(ModelError::Config(format!("cell {ci} has no bandwidth")));
            }
            if (c.antennas as usize) < 8 * c.mus.len() {
                return Err(ModelError::Config(format!(
                    "cell {ci}: {} antennas for {} users (need at least 8 per user)",
                    c.antennas,
                    c.mus.len()
                )));
            }
            for &m in &c.mus {
                if m >= self.mus.len() || seen[m] || self.mus[m].cell != ci {
                    return Err(ModelError::Config(format!(
                        "user {m} listed inconsistently in cell {ci}"
                    )));
                }
                seen[m] = true;
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(ModelError::Config(format!("user {m} belongs to no cell")));
        }
        for (i, m) in self.mus.iter().enumerate() {
            let positive = [
                m.max_clock_hz,
                m.kappa,
                m.deadline_s,
                m.energy_budget_j,
                m.compute_budget,
                m.total_input_bits,
            ];
            if positive.iter().any(|v| !(*v > 0.0)) || !(m.tx_power_w >= 0.0) {
                return Err(ModelError::Config(format!("user {i} has a non-positive parameter")));
            }
            let zeta: f64 = m.requests.iter().map(|r| r.data_fraction).sum();
            if zeta > 1.0 + 1e-12 {
                return Err(ModelError::Config(format!(
                    "user {i}: data fractions sum to {zeta} > 1"
                )));
            }
            for (ri, r) in m.requests.iter().enumerate() {
                if r.chain.is_empty() {
                    return Err(ModelError::EmptyChain);
                }
                if !(r.data_fraction >= 0.0 && r.data_fraction <= 1.0) {
                    return Err(ModelError::Config(format!(
                        "user {i} request {ri}: data fraction {} outside [0, 1]",
                        r.data_fraction
                    )));
                }
                if r.chain.iter().any(|s| !(s.xi > 0.0 && s.cycles_per_bit > 0.0)) {
                    return Err(ModelError::Config(format!(
                        "user {i} request {ri}: non-positive ratio or cycle cost"
                    )));
                }
            }
        }
        Ok(())
    }
}
