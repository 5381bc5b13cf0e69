//! Comparison algorithms that never use the backhaul.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::jcora::{
    allocate, assemble, build_report, step0_offloads, PlacementMode, Prepared, Solution, SolverTrace,
};
use crate::scenario::{RequestRef, Scenario};

/// Relative headroom kept on home servers while selecting offloads.
const SELECTION_MARGIN: f64 = 1e-9;

fn finish(scenario: &Scenario, prep: &Prepared, name: &str, chosen: &[RequestRef]) -> Result<Solution> {
    let alloc = allocate(scenario, prep, chosen, PlacementMode::HomeOnly)?;
    let assignment = assemble(scenario, prep, &alloc);
    let report = build_report(scenario, prep, name, &assignment)?;
    let trace = SolverTrace { steps: Vec::new(), last_allocation: alloc.record };
    Ok(Solution { assignment, report, trace })
}

/// Tracks estimated free capacity of every home server during selection.
struct HomeBudget<'a> {
    scenario: &'a Scenario,
    prep: &'a Prepared,
    free: Vec<f64>,
}

impl<'a> HomeBudget<'a> {
    fn new(scenario: &'a Scenario, prep: &'a Prepared) -> Self {
        let free = scenario
            .graph
            .servers()
            .iter()
            .map(|s| s.capacity_hz * (1.0 - SELECTION_MARGIN))
            .collect();
        Self { scenario, prep, free }
    }

    /// Reserves home capacity for `r` when it fits and its home hosts every stage.
    fn try_take(&mut self, r: RequestRef) -> bool {
        let Some(est) = self.prep.estimate(r, true) else { return false };
        let home = self.scenario.home_server(r.mu);
        let supported = self.scenario.request(r).chain.iter().all(|st| self.scenario.graph.supports(home, st.function));
        let need = est.total_clock_hz();
        if !supported || need > self.free[home] {
            return false;
        }
        self.free[home] -= need;
        true
    }
}

/// Greedy offloading to home servers.
///
/// Requests are taken in decreasing order of input size (then decreasing
/// local clock demand) and offloaded while their estimated clocks fit on the
/// home server; the rest run locally. Clocks of the offloaded set are then
/// optimized jointly.
pub fn solve_gojra(scenario: &Scenario) -> Result<Solution> {
    let prep = Prepared::new(scenario)?;
    let mut order: Vec<RequestRef> = scenario.requests().collect();
    let bits = |r: RequestRef| scenario.request(r).input_bits(scenario.mu(r.mu).total_input_bits);
    order.sort_by(|&a, &b| {
        bits(b)
            .total_cmp(&bits(a))
            .then(prep.local_size(b).total_cmp(&prep.local_size(a)))
            .then(a.cmp(&b))
    });
    let mut budget = HomeBudget::new(scenario, &prep);
    let mut chosen: Vec<RequestRef> = order.into_iter().filter(|&r| budget.try_take(r)).collect();
    chosen.sort_unstable();
    finish(scenario, &prep, "gojra", &chosen)
}

/// Offloading by the sign of the cost reduction, decided per base station.
///
/// Requests that do not fit locally are offloaded first. Every other request
/// is offloaded when its cost reduction, evaluated for execution on the home
/// server, is positive and the home server still has room, largest
/// reduction first.
pub fn solve_hoda(scenario: &Scenario) -> Result<Solution> {
    let prep = Prepared::new(scenario)?;
    let forced = step0_offloads(scenario, &prep, true);
    let mut budget = HomeBudget::new(scenario, &prep);
    let mut chosen: BTreeSet<RequestRef> = forced.iter().copied().filter(|&r| budget.try_take(r)).collect();
    let mut gains: Vec<(RequestRef, f64)> = scenario
        .requests()
        .filter(|r| !forced.contains(r))
        .map(|r| (r, prep.estimated_delta_z(scenario, r, true)))
        .filter(|(_, dz)| *dz > 0.0)
        .collect();
    gains.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (r, _) in gains {
        if budget.try_take(r) {
            chosen.insert(r);
        }
    }
    let chosen: Vec<RequestRef> = chosen.into_iter().collect();
    finish(scenario, &prep, "hoda", &chosen)
}
