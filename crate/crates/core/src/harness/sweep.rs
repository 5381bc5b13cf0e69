use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{solve_gojra, solve_hoda};
use crate::error::{ModelError, Result};
use crate::jcora::{solve_jcora, Constraint, Solution};
use crate::scenario::{generate_scenario, Scenario, ScenarioConfig, TopologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gtda,
    Gojra,
    Hoda,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Gtda, Algorithm::Gojra, Algorithm::Hoda];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gtda => "gtda",
            Algorithm::Gojra => "gojra",
            Algorithm::Hoda => "hoda",
        }
    }

    pub fn solve(self, scenario: &Scenario) -> Result<Solution> {
        match self {
            Algorithm::Gtda => solve_jcora(scenario),
            Algorithm::Gojra => solve_gojra(scenario),
            Algorithm::Hoda => solve_hoda(scenario),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::Parse(format!("unknown algorithm `{s}` (expected gtda, gojra or hoda)")))
    }
}

/// The scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Total input bits per user.
    InputDataSize,
    /// Uplink bandwidth of every cell, Hz.
    Bandwidth,
    /// Deadline, seconds.
    Deadline,
    MusPerCell,
    /// Compute budget per user.
    ComputeBudget,
    /// Backhaul topology name.
    Topology,
    /// Transmit-energy weight; the compute weight is its complement.
    ThetaWeights,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::InputDataSize => "input_data_size",
            SweepParam::Bandwidth => "bandwidth",
            SweepParam::Deadline => "deadline",
            SweepParam::MusPerCell => "mus_per_cell",
            SweepParam::ComputeBudget => "compute_budget",
            SweepParam::Topology => "topology",
            SweepParam::ThetaWeights => "theta_weights",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A swept value: a number, or a name for the topology sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Name(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<SweepValue>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// Settings shared by every cell of the sweep.
    #[serde(default)]
    pub base: ScenarioConfig,
}

impl SweepSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() || self.algorithms.is_empty() {
            return Err(ModelError::Config("sweep needs at least one value, algorithm and seed".into()));
        }
        for v in &self.values {
            self.config_for(v)?.validate()?;
        }
        Ok(())
    }

    /// The base config with the swept parameter set to `value`.
    pub fn config_for(&self, value: &SweepValue) -> Result<ScenarioConfig> {
        let mut cfg = self.base.clone();
        let num = || match value {
            SweepValue::Number(v) => Ok(*v),
            SweepValue::Name(s) => Err(ModelError::Config(format!("{} expects numbers, got `{s}`", self.param))),
        };
        match self.param {
            SweepParam::InputDataSize => cfg.u_bits = num()?,
            SweepParam::Bandwidth => cfg.cells.bandwidth_hz = num()?,
            SweepParam::Deadline => cfg.deadline_s = num()?,
            SweepParam::ComputeBudget => cfg.budgets.compute = num()?,
            SweepParam::MusPerCell => {
                let v = num()?;
                if !(v >= 1.0 && v.fract() == 0.0) {
                    return Err(ModelError::Config(format!("mus_per_cell must be a positive integer, got {v}")));
                }
                cfg.mus_per_cell = v as usize;
            }
            SweepParam::ThetaWeights => {
                let v = num()?;
                cfg.weights.theta_tx = v;
                cfg.weights.theta_cp = 1.0 - v;
            }
            SweepParam::Topology => {
                cfg.topology.kind = match value {
                    SweepValue::Name(s) => s.parse::<TopologyKind>()?,
                    SweepValue::Number(v) => {
                        return Err(ModelError::Config(format!("topology expects names, got {v}")))
                    }
                }
            }
        }
        Ok(cfg)
    }
}

/// One (value, algorithm, seed) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub param: String,
    pub value: String,
    pub algo: String,
    pub topology: String,
    pub seed: u64,
    pub objective: f64,
    #[serde(rename = "avg_energy_J")]
    pub avg_energy_j: f64,
    pub offloaded_bits: f64,
    pub feasible: bool,
}

/// Violation count and worst magnitude of one constraint in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub value: String,
    pub algo: String,
    pub seed: u64,
    pub constraint: Constraint,
    pub violations: usize,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub param: String,
    pub value: String,
    pub algo: String,
    pub topology: String,
    pub runs: usize,
    pub failed: usize,
    pub objective_mean: f64,
    pub objective_std: f64,
    #[serde(rename = "avg_energy_J_mean")]
    pub avg_energy_j_mean: f64,
    #[serde(rename = "avg_energy_J_std")]
    pub avg_energy_j_std: f64,
    pub offloaded_bits_mean: f64,
    pub offloaded_bits_std: f64,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    pub constraints: Vec<ConstraintRow>,
    /// Error messages of failed cells, keyed like the rows.
    pub failures: Vec<(String, String, u64, String)>,
}

impl ResultsTable {
    /// Aggregate for one value label and algorithm.
    pub fn aggregate(&self, value: &str, algo: Algorithm) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.value == value && a.algo == algo.name())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct Cell {
    vi: usize,
    algo: Algorithm,
    seed: u64,
    row: ResultRow,
    checks: Vec<ConstraintRow>,
    error: Option<String>,
}

fn run_cell(spec: &SweepSpec, vi: usize, algo: Algorithm, seed: u64) -> Cell {
    let value = &spec.values[vi];
    let mut row = ResultRow {
        param: spec.param.name().into(),
        value: value.to_string(),
        algo: algo.name().into(),
        topology: spec.base.topology.kind.to_string(),
        seed,
        objective: f64::NAN,
        avg_energy_j: f64::NAN,
        offloaded_bits: f64::NAN,
        feasible: false,
    };
    let outcome = spec.config_for(value).and_then(|cfg| {
        row.topology = cfg.topology.kind.to_string();
        let scenario = generate_scenario(&cfg, seed)?;
        algo.solve(&scenario)
    });
    match outcome {
        Ok(sol) => {
            let r = &sol.report;
            row.objective = r.objective;
            row.avg_energy_j = r.avg_energy_j;
            row.offloaded_bits = r.offloaded_bits;
            row.feasible = r.feasibility.is_feasible();
            let checks = r
                .feasibility
                .checks
                .iter()
                .map(|c| ConstraintRow {
                    value: row.value.clone(),
                    algo: row.algo.clone(),
                    seed,
                    constraint: c.constraint,
                    violations: c.violations,
                    worst: c.worst,
                })
                .collect();
            Cell { vi, algo, seed, row, checks, error: None }
        }
        Err(e) => Cell { vi, algo, seed, row, checks: Vec::new(), error: Some(e.to_string()) },
    }
}

/// Solves every (value, algorithm, seed) cell, in parallel, and aggregates
/// per (value, algorithm). Row order is canonical: value in spec order, then
/// algorithm, then seed. A failing cell yields a row with NaN metrics and
/// `feasible = false`.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultsTable> {
    spec.validate()?;
    let mut algos = spec.algorithms.clone();
    algos.sort_unstable();
    algos.dedup();
    let jobs: Vec<(usize, Algorithm, u64)> = (0..spec.values.len())
        .flat_map(|vi| algos.iter().flat_map(move |&a| spec.seeds.iter().map(move |&s| (vi, a, s))))
        .collect();
    let mut cells: Vec<Cell> = jobs.par_iter().map(|&(vi, a, s)| run_cell(spec, vi, a, s)).collect();
    cells.sort_by_key(|c| (c.vi, c.algo, c.seed));

    let mut table = ResultsTable::default();
    for group in cells.chunk_by(|x, y| x.vi == y.vi && x.algo == y.algo) {
        let ok: Vec<&ResultRow> = group.iter().filter(|c| c.error.is_none()).map(|c| &c.row).collect();
        let col = |f: fn(&ResultRow) -> f64| mean_std(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        let (om, os) = col(|r| r.objective);
        let (em, es) = col(|r| r.avg_energy_j);
        let (bm, bs) = col(|r| r.offloaded_bits);
        let first = &group[0].row;
        table.aggregates.push(Aggregate {
            param: first.param.clone(),
            value: first.value.clone(),
            algo: first.algo.clone(),
            topology: first.topology.clone(),
            runs: group.len(),
            failed: group.len() - ok.len(),
            objective_mean: om,
            objective_std: os,
            avg_energy_j_mean: em,
            avg_energy_j_std: es,
            offloaded_bits_mean: bm,
            offloaded_bits_std: bs,
            feasible_fraction: group.iter().filter(|c| c.row.feasible).count() as f64 / group.len() as f64,
        });
    }
    for c in cells {
        if let Some(e) = c.error {
            table.failures.push((c.row.value.clone(), c.row.algo.clone(), c.seed, e));
        }
        table.constraints.extend(c.checks);
        table.rows.push(c.row);
    }
    Ok(table)
}
