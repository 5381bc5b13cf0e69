//! Delay, energy, price and normalized-cost evaluators.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::jcora::{Assignment, Decision};
use crate::radio::{self, UplinkQuote};
use crate::scenario::{
    BackhaulGraph, MobileUser, PriceParams, RequestRef, Scenario, ServerId, ServiceRequest,
    Weights,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalExecQuote {
    pub delay_s: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadQuote {
    pub uplink_delay_s: f64,
    /// Backhaul delay into each stage; entry 0 is the hop from the home server.
    pub backhaul_s: Vec<f64>,
    pub compute_s: Vec<f64>,
    pub total_delay_s: f64,
    pub tx_energy_j: f64,
    pub compute_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub z: f64,
    pub z_local: f64,
    pub z_offload: f64,
    /// Normalized cost of each request.
    pub terms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub per_mu: Vec<CostBreakdown>,
    pub total: f64,
}

fn check_clock(f: f64) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonPositiveClock(f))
    }
}

/// Local delay `sum zeta xi c u / f` and energy `sum zeta xi u kappa f^2`.
///
/// The energy term deliberately carries no cycles-per-bit factor.
pub fn local_exec(request: &ServiceRequest, user: &MobileUser, clocks_hz: &[f64]) -> Result<LocalExecQuote> {
    if clocks_hz.len() != request.chain.len() {
        return Err(ModelError::IncompleteAssignment(format!(
            "{} local clocks for a chain of {}",
            clocks_hz.len(),
            request.chain.len()
        )));
    }
    let bits = request.input_bits(user.total_input_bits);
    let mut q = LocalExecQuote { delay_s: 0.0, energy_j: 0.0 };
    if bits == 0.0 {
        return Ok(q);
    }
    for (s, &f) in request.chain.iter().zip(clocks_hz) {
        check_clock(f)?;
        q.delay_s += bits * s.xi * s.cycles_per_bit / f;
        q.energy_j += bits * s.xi * user.kappa * f * f;
    }
    Ok(q)
}

/// Backhaul delay into each stage when the chain enters at `home` and stage
/// `l` runs on `hosts[l]`.
pub fn backhaul_delay(graph: &BackhaulGraph, home: ServerId, hosts: &[ServerId]) -> Result<Vec<f64>> {
    let mut prev = home;
    hosts
        .iter()
        .map(|&h| {
            if h >= graph.len() {
                return Err(ModelError::Topology(format!("server {h} does not exist")));
            }
            let d = graph
                .hop_delay(prev, h)
                .ok_or(ModelError::NotAdjacent { from: prev, to: h })?;
            prev = h;
            Ok(d)
        })
        .collect()
}

/// Time to process `cycles` at clock `f`.
pub fn server_compute_delay(cycles: f64, f_hz: f64) -> Result<f64> {
    check_clock(f_hz)?;
    Ok(cycles / f_hz)
}

/// Price per second `e^-eta (e^(f/f_ref) - 1) vartheta f_ref`.
pub fn compute_price(price: &PriceParams, f_hz: f64) -> f64 {
    (-price.eta).exp() * (f_hz / price.f_ref_hz).exp_m1() * price.vartheta * price.f_ref_hz
}

/// Price of running `cycles` at clock `f`.
pub fn compute_cost(price: &PriceParams, f_hz: f64, cycles: f64) -> Result<f64> {
    if cycles == 0.0 {
        return Ok(0.0);
    }
    Ok(compute_price(price, f_hz) * server_compute_delay(cycles, f_hz)?)
}

/// Full offload evaluation of a request with the given hosts and remote clocks.
pub fn offload_quote(
    scenario: &Scenario,
    r: RequestRef,
    uplink: &UplinkQuote,
    hosts: &[ServerId],
    clocks_hz: &[f64],
) -> Result<OffloadQuote> {
    let request = scenario.request(r);
    if hosts.len() != request.chain.len() || clocks_hz.len() != request.chain.len() {
        return Err(ModelError::IncompleteAssignment(format!(
            "user {} request {}: placement does not cover the chain",
            r.mu, r.req
        )));
    }
    let user = scenario.mu(r.mu);
    let backhaul_s = backhaul_delay(&scenario.graph, scenario.home_server(r.mu), hosts)?;
    let mut compute_s = Vec::with_capacity(hosts.len());
    let mut cost = 0.0;
    for (cycles, &f) in request.stage_cycles(user.total_input_bits).zip(clocks_hz) {
        compute_s.push(server_compute_delay(cycles, f)?);
        cost += compute_cost(&scenario.price, f, cycles)?;
    }
    let total = uplink.delay_s + backhaul_s.iter().sum::<f64>() + compute_s.iter().sum::<f64>();
    Ok(OffloadQuote {
        uplink_delay_s: uplink.delay_s,
        backhaul_s,
        compute_s,
        total_delay_s: total,
        tx_energy_j: uplink.energy_j,
        compute_cost: cost,
    })
}

/// Normalized cost of offloading: `theta_tx e_tx / E + theta_cp C / budget`.
pub fn offload_term(weights: &Weights, user: &MobileUser, tx_energy_j: f64, compute_cost: f64) -> f64 {
    weights.theta_tx * tx_energy_j / user.energy_budget_j + weights.theta_cp * compute_cost / user.compute_budget
}

/// Cost improvement of offloading a request that would otherwise run locally.
pub fn delta_z(
    weights: &Weights,
    user: &MobileUser,
    local: &LocalExecQuote,
    tx_energy_j: f64,
    compute_cost: f64,
) -> f64 {
    local.energy_j / user.energy_budget_j - offload_term(weights, user, tx_energy_j, compute_cost)
}

/// Normalized cost of one decided request.
pub fn request_term(scenario: &Scenario, r: RequestRef, decision: &Decision, uplink: &UplinkQuote) -> Result<f64> {
    let user = scenario.mu(r.mu);
    match decision {
        Decision::Local { clocks_hz } => {
            let q = local_exec(scenario.request(r), user, clocks_hz)?;
            Ok(q.energy_j / user.energy_budget_j)
        }
        Decision::Offloaded { hosts, clocks_hz } => {
            let q = offload_quote(scenario, r, uplink, hosts, clocks_hz)?;
            Ok(offload_term(&scenario.weights, user, q.tx_energy_j, q.compute_cost))
        }
    }
}

/// Per-user and system normalized cost of a complete assignment.
pub fn normalized_cost(assignment: &Assignment, scenario: &Scenario) -> Result<CostReport> {
    assignment.check_shape(scenario)?;
    let mut per_mu = Vec::with_capacity(scenario.mus.len());
    for (mu, user) in scenario.mus.iter().enumerate() {
        let mut b = CostBreakdown { z: 0.0, z_local: 0.0, z_offload: 0.0, terms: Vec::new() };
        for req in 0..user.requests.len() {
            let r = RequestRef { mu, req };
            let d = assignment.decision(r);
            let uplink = match d {
                Decision::Local { .. } => UplinkQuote { sir: 0.0, rate_bps: 0.0, delay_s: 0.0, energy_j: 0.0 },
                Decision::Offloaded { .. } => radio::uplink_quote(scenario, r)?,
            };
            let term = request_term(scenario, r, d, &uplink)?;
            match d {
                Decision::Local { .. } => b.z_local += term,
                Decision::Offloaded { .. } => b.z_offload += term,
            }
            b.terms.push(term);
        }
        b.z = b.z_local + b.z_offload;
        per_mu.push(b);
    }
    let total = per_mu.iter().map(|b| b.z).sum();
    Ok(CostReport { per_mu, total })
}
