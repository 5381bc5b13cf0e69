use std::path::Path;

use serde::{Deserialize, Serialize};

use super::graph::{FunctionId, ServerId, TopologyKind};
use super::model::{PriceParams, Weights};
use crate::error::{ModelError, Result};

/// Generator settings. Every field has a default, so a config file only
/// needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Seed used when the caller does not pass one explicitly.
    pub seed: u64,
    pub topology: TopologyConfig,
    pub cells: CellsConfig,
    pub mus_per_cell: usize,
    pub requests_per_mu: usize,
    pub u_bits: f64,
    pub deadline_s: f64,
    pub budgets: BudgetConfig,
    pub price: PriceParams,
    pub weights: Weights,
    pub radio: RadioConfig,
    pub mu: MuConfig,
    pub chain: ChainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    /// Assigned to edge servers cyclically, one edge server per cell.
    pub edge_capacities_ghz: Vec<f64>,
    pub core_capacities_ghz: Vec<f64>,
    pub setup_delay_s: f64,
    pub blacklist: Vec<Blacklist>,
}

/// Functions a server cannot execute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blacklist {
    pub server: ServerId,
    pub functions: Vec<FunctionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellsConfig {
    pub count: usize,
    /// Distance between neighbouring base stations on the square grid.
    pub spacing_m: f64,
    pub min_distance_m: f64,
    pub max_distance_m: f64,
    pub antennas: u32,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub energy_j: f64,
    pub compute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub pathloss_exponent: f64,
    pub tx_power_w: f64,
    pub sir_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuConfig {
    pub clock_choices_ghz: Vec<f64>,
    pub kappa: f64,
    pub slave_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Size of the function catalogue.
    pub function_types: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Relative weights of the lengths `min_length..=max_length`; uniform when absent or empty.
    pub length_weights: Option<Vec<f64>>,
    pub cycles_per_bit: [f64; 2],
    /// Range of each stage's output/input data ratio.
    pub output_ratio: [f64; 2],
    /// Explicit per-request data fractions; an equal split when absent.
    pub data_fractions: Option<Vec<f64>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            topology: TopologyConfig::default(),
            cells: CellsConfig::default(),
            mus_per_cell: 8,
            requests_per_mu: 5,
            u_bits: 0.8e6,
            deadline_s: 0.8,
            budgets: BudgetConfig::default(),
            price: PriceParams::default(),
            weights: Weights::default(),
            radio: RadioConfig::default(),
            mu: MuConfig::default(),
            chain: ChainConfig::default(),
        }
    }
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            kind: TopologyKind::FullMesh,
            edge_capacities_ghz: vec![1.7, 3.6, 3.8, 4.5],
            core_capacities_ghz: Vec::new(),
            setup_delay_s: 0.01,
            blacklist: Vec::new(),
        }
    }
}

impl Default for CellsConfig {
    fn default() -> Self {
        Self {
            count: 4,
            spacing_m: 1600.0,
            min_distance_m: 100.0,
            max_distance_m: 800.0,
            antennas: 128,
            bandwidth_hz: 300e3,
        }
    }
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { energy_j: 0.1, compute: 0.035 }
    }
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { pathloss_exponent: 3.8, tx_power_w: 1e-3, sir_cap: None }
    }
}

impl Default for MuConfig {
    fn default() -> Self {
        Self { clock_choices_ghz: vec![0.5, 0.6, 0.7, 0.8], kappa: 1e-26, slave_weight: 1.0 }
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            function_types: 6,
            min_length: 1,
            max_length: 2,
            length_weights: Some(vec![0.9, 0.1]),
            cycles_per_bit: [200.0, 500.0],
            output_ratio: [0.5, 1.0],
            data_fractions: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Per-request data fractions.
    pub fn data_fractions(&self) -> Vec<f64> {
        match &self.chain.data_fractions {
            Some(z) => z.clone(),
            None => vec![1.0 / self.requests_per_mu as f64; self.requests_per_mu],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ModelError::Config(msg));
        let positive = [
            ("u_bits", self.u_bits),
            ("deadline_s", self.deadline_s),
            ("budgets.energy_j", self.budgets.energy_j),
            ("budgets.compute", self.budgets.compute),
            ("cells.spacing_m", self.cells.spacing_m),
            ("cells.min_distance_m", self.cells.min_distance_m),
            ("cells.bandwidth_hz", self.cells.bandwidth_hz),
            ("topology.setup_delay_s", self.topology.setup_delay_s),
            ("radio.pathloss_exponent", self.radio.pathloss_exponent),
            ("mu.kappa", self.mu.kappa),
            ("mu.slave_weight", self.mu.slave_weight),
            ("price.vartheta", self.price.vartheta),
            ("price.f_ref_hz", self.price.f_ref_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.radio.tx_power_w >= 0.0) {
            return bad("radio.tx_power_w must be non-negative".into());
        }
        if self.cells.count == 0 || self.mus_per_cell == 0 || self.requests_per_mu == 0 {
            return bad("cells.count, mus_per_cell and requests_per_mu must be at least 1".into());
        }
        if self.cells.max_distance_m < self.cells.min_distance_m {
            return bad("cells.max_distance_m is below cells.min_distance_m".into());
        }
        if (self.cells.antennas as usize) < 8 * self.mus_per_cell {
            return bad(format!(
                "cells.antennas = {} is too small for {} users per cell",
                self.cells.antennas, self.mus_per_cell
            ));
        }
        let caps = self
            .topology
            .edge_capacities_ghz
            .iter()
            .chain(&self.topology.core_capacities_ghz);
        if self.topology.edge_capacities_ghz.is_empty() || caps.clone().any(|c| !(*c > 0.0)) {
            return bad("server capacities must be non-empty and positive".into());
        }
        if self.mu.clock_choices_ghz.is_empty() || self.mu.clock_choices_ghz.iter().any(|c| !(*c > 0.0)) {
            return bad("mu.clock_choices_ghz must be non-empty and positive".into());
        }
        let ch = &self.chain;
        if ch.min_length == 0 || ch.max_length < ch.min_length || ch.max_length > ch.function_types {
            return bad(format!(
                "chain lengths [{}, {}] invalid for {} function types",
                ch.min_length, ch.max_length, ch.function_types
            ));
        }
        if let Some(w) = ch.length_weights.as_ref().filter(|w| !w.is_empty()) {
            if w.len() != ch.max_length - ch.min_length + 1
                || w.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
                || !w.iter().any(|v| *v > 0.0)
            {
                return bad(format!("chain.length_weights needs {} non-negative weights", ch.max_length - ch.min_length + 1));
            }
        }
        for (name, [lo, hi]) in [("cycles_per_bit", ch.cycles_per_bit), ("output_ratio", ch.output_ratio)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return bad(format!("chain.{name} range [{lo}, {hi}] invalid"));
            }
        }
        if let Some(z) = &ch.data_fractions {
            if z.len() != self.requests_per_mu {
                return bad(format!(
                    "{} data fractions for {} requests per user",
                    z.len(),
                    self.requests_per_mu
                ));
            }
            if z.iter().any(|v| !(*v >= 0.0 && *v <= 1.0)) {
                return bad("data fractions must lie in [0, 1]".into());
            }
            let total: f64 = z.iter().sum();
            if total > 1.0 + 1e-12 {
                return bad(format!("data fractions sum to {total} > 1"));
            }
        }
        let w = self.weights;
        if !(w.theta_tx >= 0.0 && w.theta_cp >= 0.0 && ((w.theta_tx + w.theta_cp) - 1.0).abs() < 1e-12) {
            return bad(format!(
                "weights must be non-negative and sum to 1, got ({}, {})",
                w.theta_tx, w.theta_cp
            ));
        }
        if let Some(cap) = self.radio.sir_cap {
            if !(cap > 0.0) {
                return bad("radio.sir_cap must be positive".into());
            }
        }
        Ok(())
    }
}
