use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ScenarioConfig;
use super::graph::{build_topology, FunctionId};
use super::model::{Cell, ChainStage, MobileUser, Scenario, ServiceRequest};
use crate::error::{ModelError, Result};

/// Independent random substreams, one per kind of draw.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Placement = 1,
    Clock = 2,
    CycleCost = 3,
    Chain = 4,
    Ratio = 5,
}

fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

/// Generates a scenario. Equal `(config, seed)` pairs give identical results.
///
/// Cells sit on a square grid, one edge server per cell. Each user is placed
/// at a uniform angle and a uniform distance from its base station, draws its
/// clock from the configured set and one cycle cost per catalogue function.
/// Chains pick distinct functions; the data ratio of stage `l` is the product
/// of the output ratios of stages `0..l`.
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let ghz = 1e9;
    let n_cells = config.cells.count;
    let edge_caps: Vec<f64> = (0..n_cells)
        .map(|i| config.topology.edge_capacities_ghz[i % config.topology.edge_capacities_ghz.len()] * ghz)
        .collect();
    let core_caps: Vec<f64> = config.topology.core_capacities_ghz.iter().map(|c| c * ghz).collect();
    let mut graph = build_topology(
        config.topology.kind,
        &edge_caps,
        &core_caps,
        config.topology.setup_delay_s,
    )?;
    let catalogue: Vec<FunctionId> = (0..config.chain.function_types).collect();
    let lengths = match config.chain.length_weights.as_ref().filter(|w| !w.is_empty()) {
        Some(w) => Some(WeightedIndex::new(w).map_err(|e| ModelError::Config(format!("chain.length_weights: {e}")))?),
        None => None,
    };
    for b in &config.topology.blacklist {
        if b.server >= graph.len() {
            return Err(ModelError::Config(format!("blacklist names missing server {}", b.server)));
        }
        graph.blacklist(b.server, &b.functions, &catalogue);
    }

    let mut placement = stream(seed, Stream::Placement);
    let mut clock = stream(seed, Stream::Clock);
    let mut cycle = stream(seed, Stream::CycleCost);
    let mut chain = stream(seed, Stream::Chain);
    let mut ratio = stream(seed, Stream::Ratio);

    let cols = (n_cells as f64).sqrt().ceil() as usize;
    let zetas = config.data_fractions();
    let mut cells = Vec::with_capacity(n_cells);
    let mut mus = Vec::with_capacity(n_cells * config.mus_per_cell);
    for ci in 0..n_cells {
        let bs = [
            (ci % cols) as f64 * config.cells.spacing_m,
            (ci / cols) as f64 * config.cells.spacing_m,
        ];
        let mut members = Vec::with_capacity(config.mus_per_cell);
        for k in 0..config.mus_per_cell {
            let angle = placement.random_range(0.0..std::f64::consts::TAU);
            let dist = placement.random_range(config.cells.min_distance_m..=config.cells.max_distance_m);
            let position = [bs[0] + dist * angle.cos(), bs[1] + dist * angle.sin()];
            let choices = &config.mu.clock_choices_ghz;
            let max_clock_hz = choices[clock.random_range(0..choices.len())] * ghz;
            let [clo, chi] = config.chain.cycles_per_bit;
            let costs: Vec<f64> = catalogue.iter().map(|_| cycle.random_range(clo..=chi)).collect();
            let requests = zetas
                .iter()
                .map(|&zeta| {
                    let len = match &lengths {
                        Some(w) => config.chain.min_length + w.sample(&mut chain),
                        None => chain.random_range(config.chain.min_length..=config.chain.max_length),
                    };
                    let funcs = rand::seq::index::sample(&mut chain, catalogue.len(), len);
                    let [rlo, rhi] = config.chain.output_ratio;
                    let mut xi = 1.0;
                    let stages = funcs
                        .iter()
                        .map(|f| {
                            let stage = ChainStage { function: f, xi, cycles_per_bit: costs[f] };
                            xi *= ratio.random_range(rlo..=rhi);
                            stage
                        })
                        .collect();
                    ServiceRequest { data_fraction: zeta, chain: stages }
                })
                .collect();
            members.push(mus.len());
            mus.push(MobileUser {
                cell: ci,
                index: k,
                position,
                max_clock_hz,
                kappa: config.mu.kappa,
                total_input_bits: config.u_bits,
                deadline_s: config.deadline_s,
                energy_budget_j: config.budgets.energy_j,
                compute_budget: config.budgets.compute,
                tx_power_w: config.radio.tx_power_w,
                slave_weight: config.mu.slave_weight,
                requests,
            });
        }
        cells.push(Cell {
            bs_server: ci,
            position: bs,
            antennas: config.cells.antennas,
            bandwidth_hz: config.cells.bandwidth_hz,
            mus: members,
        });
    }
    let scenario = Scenario {
        graph,
        cells,
        mus,
        pathloss_exponent: config.radio.pathloss_exponent,
        weights: config.weights,
        price: config.price,
        seed,
        sir_cap: config.radio.sir_cap,
    };
    scenario.validate()?;
    Ok(scenario)
}
