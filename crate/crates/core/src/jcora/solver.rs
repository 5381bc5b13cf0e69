use std::collections::BTreeSet;

use crate::costs::{backhaul_delay, compute_cost, local_exec, normalized_cost, offload_term, LocalExecQuote};
use crate::error::{ModelError, Result};
use crate::radio::{uplink_quote, UplinkQuote};
use crate::scenario::{RequestRef, Scenario, ServerId};

use super::assignment::{AllocationRecord, Assignment, Decision, Solution, SolutionReport, SolverTrace, TraceStep};
use super::estimate::{estimate_remote_alloc, RemoteEstimate};
use super::local::{local_allocation, split_local_offload};
use super::placement::{place_functions_gtda, place_home_only, Placement, PlacementRequest};
use super::slave::{solve_slave, SlaveRequest};
use super::validate::validate;

/// Per-request quantities that do not depend on any decision.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub uplinks: Vec<Vec<Option<UplinkQuote>>>,
    pub local_clocks: Vec<Vec<Vec<f64>>>,
    pub local_quotes: Vec<Vec<LocalExecQuote>>,
    /// Estimates reserving one backhaul hop per stage.
    pub estimates: Vec<Vec<Option<RemoteEstimate>>>,
    /// Estimates for execution entirely on the home server.
    pub home_estimates: Vec<Vec<Option<RemoteEstimate>>>,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let hop = scenario.hop_delay_s();
        let mut p = Prepared {
            uplinks: Vec::new(),
            local_clocks: Vec::new(),
            local_quotes: Vec::new(),
            estimates: Vec::new(),
            home_estimates: Vec::new(),
        };
        for (mu, user) in scenario.mus.iter().enumerate() {
            let mut up = Vec::new();
            let mut lc = Vec::new();
            let mut lq = Vec::new();
            let mut est = Vec::new();
            let mut home = Vec::new();
            for (req, request) in user.requests.iter().enumerate() {
                let clocks = local_allocation(user, request)?;
                lq.push(local_exec(request, user, &clocks)?);
                lc.push(clocks);
                let quote = uplink_quote(scenario, RequestRef { mu, req }).ok();
                let has_data = request.input_bits(user.total_input_bits) > 0.0;
                let estimate = |budget: f64| {
                    quote
                        .as_ref()
                        .filter(|_| has_data)
                        .and_then(|q| estimate_remote_alloc(user, request, &scenario.price, q, budget).ok())
                };
                est.push(estimate(hop * request.chain.len() as f64));
                home.push(estimate(0.0));
                up.push(quote);
            }
            p.uplinks.push(up);
            p.local_clocks.push(lc);
            p.local_quotes.push(lq);
            p.estimates.push(est);
            p.home_estimates.push(home);
        }
        Ok(p)
    }

    pub fn local_size(&self, r: RequestRef) -> f64 {
        self.local_clocks[r.mu][r.req].iter().sum()
    }

    pub fn estimate(&self, r: RequestRef, home_only: bool) -> Option<&RemoteEstimate> {
        let table = if home_only { &self.home_estimates } else { &self.estimates };
        table[r.mu][r.req].as_ref()
    }

    /// Normalized offload cost of `r` at its estimated clocks.
    pub fn estimated_offload_term(&self, scenario: &Scenario, r: RequestRef, home_only: bool) -> Option<f64> {
        let est = self.estimate(r, home_only)?;
        let up = self.uplinks[r.mu][r.req].as_ref()?;
        let user = scenario.mu(r.mu);
        let mut cost = 0.0;
        for (c, &f) in scenario.request(r).stage_cycles(user.total_input_bits).zip(&est.clocks_hz) {
            cost += compute_cost(&scenario.price, f, c).ok()?;
        }
        Some(offload_term(&scenario.weights, user, up.energy_j, cost))
    }

    /// Estimated cost improvement of offloading `r`; `-inf` when it cannot be offloaded.
    pub fn estimated_delta_z(&self, scenario: &Scenario, r: RequestRef, home_only: bool) -> f64 {
        let user = scenario.mu(r.mu);
        match self.estimated_offload_term(scenario, r, home_only) {
            Some(t) => self.local_quotes[r.mu][r.req].energy_j / user.energy_budget_j - t,
            None => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMode {
    /// Two-phase placement across the backhaul, estimating clocks with one
    /// backhaul hop reserved per stage.
    Cooperative,
    /// Two-phase placement across the backhaul, estimating clocks without
    /// reserving any backhaul delay.
    CooperativeOptimistic,
    /// Every chain on its user's home server.
    HomeOnly,
}

/// Placement plus clock allocation for a set of offloaded requests.
#[derive(Debug, Clone, Default)]
pub struct Allocation {
    pub offloaded: Vec<(RequestRef, Vec<ServerId>, Vec<f64>)>,
    /// Requests that could not be offloaded after all.
    pub reverted: Vec<RequestRef>,
    pub record: AllocationRecord,
}

impl Allocation {
    pub fn offloaded_set(&self) -> BTreeSet<RequestRef> {
        self.offloaded.iter().map(|(r, _, _)| *r).collect()
    }
}

/// Places `requests` and solves for their remote clocks. Requests that cannot
/// be placed, or that overload a server in the allocation step, are reverted;
/// on a capacity failure the request with the largest estimated demand on the
/// named server goes first.
pub fn allocate(scenario: &Scenario, prep: &Prepared, requests: &[RequestRef], mode: PlacementMode) -> Result<Allocation> {
    allocate_with_priority(scenario, prep, requests, mode, &BTreeSet::new())
}

/// [`allocate`] with the requests in `priority` packed ahead of the others.
pub fn allocate_with_priority(
    scenario: &Scenario,
    prep: &Prepared,
    requests: &[RequestRef],
    mode: PlacementMode,
    priority: &BTreeSet<RequestRef>,
) -> Result<Allocation> {
    let home_only = mode != PlacementMode::Cooperative;
    let mut out = Allocation::default();
    let mut inputs = Vec::with_capacity(requests.len());
    for &r in requests {
        match prep.estimate(r, home_only) {
            Some(e) => {
                out.record.estimate_multipliers.push((r, e.multiplier));
                inputs.push(PlacementRequest { request: r, clocks_hz: e.clocks_hz.clone(), priority: priority.contains(&r) });
            }
            None => out.reverted.push(r),
        }
    }
    let placement: Placement = match mode {
        PlacementMode::Cooperative | PlacementMode::CooperativeOptimistic => place_functions_gtda(scenario, &inputs),
        PlacementMode::HomeOnly => place_home_only(scenario, &inputs),
    };
    out.reverted.extend(placement.unplaced.iter().copied());
    out.record.free_capacity_hz = placement.free_capacity_hz.clone();
    out.record.ranking = placement.ranking.clone();
    let mut placed = placement.placed;
    let clocks_of = |r: RequestRef| &inputs.iter().find(|p| p.request == r).expect("placed input").clocks_hz;

    loop {
        let slave_reqs: Vec<SlaveRequest> = placed
            .iter()
            .map(|(r, hosts)| SlaveRequest {
                request: *r,
                hosts: hosts.clone(),
                uplink: prep.uplinks[r.mu][r.req].expect("offloadable requests have an uplink"),
            })
            .collect();
        match solve_slave(scenario, &slave_reqs) {
            Ok(sol) => {
                for (i, (r, hosts)) in placed.iter().enumerate() {
                    out.offloaded.push((*r, hosts.clone(), sol.clocks_hz[i].clone()));
                    out.record.delay_multipliers.push((*r, sol.delay_multipliers[i]));
                    out.record.slack_vars.push((*r, sol.slack_vars[i].clone()));
                }
                break;
            }
            Err(ModelError::CapacityInfeasible { server }) => {
                let victim = placed
                    .iter()
                    .enumerate()
                    .map(|(i, (r, hosts))| {
                        let load: f64 = hosts.iter().zip(clocks_of(*r)).filter(|(h, _)| **h == server).map(|(_, f)| f).sum();
                        (i, load)
                    })
                    .filter(|(_, load)| *load > 0.0)
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i);
                let Some(i) = victim else {
                    return Err(ModelError::CapacityInfeasible { server });
                };
                let (r, _) = placed.remove(i);
                out.reverted.push(r);
            }
            Err(e) => return Err(e),
        }
    }
    if mode != PlacementMode::HomeOnly {
        repair(scenario, prep, &mut out)?;
    }
    out.reverted.sort_unstable();
    out.record.unplaced = out.reverted.clone();
    Ok(out)
}

/// Host sequences tried per reverted request.
const REPAIR_ATTEMPTS: usize = 3;
/// Requests with more candidate host sequences than this are not repaired.
const REPAIR_MAX_PATHS: usize = 4096;

/// Host sequences for the chain of `r`, each stage adjacent to the previous
/// one and the first adjacent to the home server.
fn host_paths(scenario: &Scenario, r: RequestRef) -> Vec<Vec<ServerId>> {
    let g = &scenario.graph;
    let n = g.servers().len();
    let chain = &scenario.request(r).chain;
    if (n as f64).powi(chain.len() as i32) > REPAIR_MAX_PATHS as f64 {
        return Vec::new();
    }
    let mut paths = vec![Vec::new()];
    for stage in chain {
        let mut next = Vec::new();
        for p in &paths {
            let prev = p.last().copied().unwrap_or_else(|| scenario.home_server(r.mu));
            for m in 0..n {
                if g.supports(m, stage.function) && g.hop_delay(prev, m).is_some() {
                    let mut q = p.clone();
                    q.push(m);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths
}

/// Retries reverted requests on explicit host sequences with uneven clocks.
/// Candidates are ranked by the delay left over when every stage gets an
/// equal-work share of the capacity still free on its host; each attempt
/// re-solves the allocation with the candidate added.
fn repair(scenario: &Scenario, prep: &Prepared, out: &mut Allocation) -> Result<()> {
    let mut pending = std::mem::take(&mut out.reverted);
    pending.sort_by(|a, b| prep.local_size(*a).total_cmp(&prep.local_size(*b)).then(a.cmp(b)));
    for r in pending {
        let user = scenario.mu(r.mu);
        let (Some(up), true) = (prep.uplinks[r.mu][r.req], prep.estimate(r, true).is_some()) else {
            out.reverted.push(r);
            continue;
        };
        let mut free: Vec<f64> = scenario.graph.servers().iter().map(|s| s.capacity_hz).collect();
        for (_, hosts, clocks) in &out.offloaded {
            for (h, f) in hosts.iter().zip(clocks) {
                free[*h] -= f;
            }
        }
        let cycles: Vec<f64> = scenario.request(r).stage_cycles(user.total_input_bits).collect();
        let mut cands: Vec<(f64, Vec<ServerId>)> = host_paths(scenario, r)
            .into_iter()
            .filter_map(|hosts| {
                let mut roots = vec![0.0; free.len()];
                for (h, c) in hosts.iter().zip(&cycles) {
                    roots[*h] += c.sqrt();
                }
                let mut time = up.delay_s + backhaul_delay(&scenario.graph, scenario.home_server(r.mu), &hosts).ok()?.iter().sum::<f64>();
                for (m, s) in roots.iter().enumerate().filter(|(_, s)| **s > 0.0) {
                    if free[m] <= 0.0 {
                        return None;
                    }
                    time += s * s / free[m];
                }
                let left = user.deadline_s - time;
                (left > 0.0).then_some((left, hosts))
            })
            .collect();
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut done = false;
        for (_, hosts) in cands.into_iter().take(REPAIR_ATTEMPTS) {
            let mut reqs: Vec<SlaveRequest> = out
                .offloaded
                .iter()
                .map(|(q, h, _)| SlaveRequest { request: *q, hosts: h.clone(), uplink: prep.uplinks[q.mu][q.req].expect("offloaded") })
                .collect();
            reqs.push(SlaveRequest { request: r, hosts: hosts.clone(), uplink: up });
            match solve_slave(scenario, &reqs) {
                Ok(sol) => {
                    out.offloaded = reqs.iter().zip(&sol.clocks_hz).map(|(q, f)| (q.request, q.hosts.clone(), f.clone())).collect();
                    out.record.delay_multipliers = reqs.iter().zip(&sol.delay_multipliers).map(|(q, m)| (q.request, *m)).collect();
                    out.record.slack_vars = reqs.iter().zip(&sol.slack_vars).map(|(q, y)| (q.request, y.clone())).collect();
                    done = true;
                    break;
                }
                Err(ModelError::CapacityInfeasible { .. } | ModelError::Numerics(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if !done {
            out.reverted.push(r);
        }
    }
    Ok(())
}

/// Local execution for everything, overridden by the allocation's offloads.
pub fn assemble(scenario: &Scenario, prep: &Prepared, alloc: &Allocation) -> Assignment {
    let mut a = Assignment {
        decisions: scenario
            .mus
            .iter()
            .enumerate()
            .map(|(mu, m)| {
                (0..m.requests.len())
                    .map(|req| Decision::Local { clocks_hz: prep.local_clocks[mu][req].clone() })
                    .collect()
            })
            .collect(),
    };
    for (r, hosts, clocks) in &alloc.offloaded {
        a.set(*r, Decision::Offloaded { hosts: hosts.clone(), clocks_hz: clocks.clone() });
    }
    a
}

/// Requests that do not fit locally under the count-maximizing split.
pub fn step0_offloads(scenario: &Scenario, prep: &Prepared, home_only: bool) -> Vec<RequestRef> {
    let mut out = Vec::new();
    for (mu, user) in scenario.mus.iter().enumerate() {
        let refs: Vec<RequestRef> = (0..user.requests.len()).map(|req| RequestRef { mu, req }).collect();
        let sizes: Vec<f64> = refs.iter().map(|&r| prep.local_size(r)).collect();
        let offloadable: Vec<bool> = refs.iter().map(|&r| prep.estimate(r, home_only).is_some()).collect();
        let flags = split_local_offload(user, &sizes, &offloadable);
        out.extend(refs.iter().zip(flags).filter(|(r, f)| *f && offloadable[r.req]).map(|(r, _)| *r));
    }
    out
}

/// Requests that end up local although the user's clock capacity cannot hold them.
fn unserved(scenario: &Scenario, prep: &Prepared, a: &Assignment) -> Vec<RequestRef> {
    let mut out = Vec::new();
    for (mu, user) in scenario.mus.iter().enumerate() {
        let mut local: Vec<(f64, RequestRef)> = (0..user.requests.len())
            .map(|req| RequestRef { mu, req })
            .filter(|&r| !a.decision(r).is_offloaded())
            .map(|r| (prep.local_size(r), r))
            .collect();
        let total: f64 = local.iter().map(|(s, _)| s).sum();
        if total <= user.max_clock_hz {
            continue;
        }
        local.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut used = 0.0;
        for (s, r) in local {
            if used + s <= user.max_clock_hz {
                used += s;
            } else {
                out.push(r);
            }
        }
    }
    out
}

pub fn build_report(scenario: &Scenario, prep: &Prepared, algorithm: &str, a: &Assignment) -> Result<SolutionReport> {
    let cost = normalized_cost(a, scenario)?;
    let mut bits = 0.0;
    let mut offloaded = 0;
    let mut energy = 0.0;
    for (r, d) in a.iter() {
        let user = scenario.mu(r.mu);
        match d {
            Decision::Offloaded { .. } => {
                offloaded += 1;
                bits += scenario.request(r).input_bits(user.total_input_bits);
                energy += prep.uplinks[r.mu][r.req].map_or(0.0, |u| u.energy_j);
            }
            Decision::Local { clocks_hz } => {
                energy += local_exec(scenario.request(r), user, clocks_hz)?.energy_j;
            }
        }
    }
    let n_mu = scenario.mus.len().max(1) as f64;
    Ok(SolutionReport {
        algorithm: algorithm.to_string(),
        objective: cost.total,
        per_mu: cost.per_mu,
        offloaded_requests: offloaded,
        offloaded_bits: bits,
        avg_energy_j: energy / n_mu,
        unserved: unserved(scenario, prep, a),
        feasibility: validate(a, scenario),
    })
}

/// One master/slave pass. The master is run with and without a backhaul
/// reserve in the clock estimate; when requests are left over, both runs are
/// repeated with the leftovers packed first. The result serving more
/// requests wins, then the one with the lower objective.
fn step1(scenario: &Scenario, prep: &Prepared, offload: &[RequestRef]) -> Result<(Allocation, Assignment, f64)> {
    let mut best: Option<(Allocation, Assignment, f64)> = None;
    let modes = [PlacementMode::Cooperative, PlacementMode::CooperativeOptimistic];
    let mut runs: Vec<(PlacementMode, BTreeSet<RequestRef>)> = modes.iter().map(|&m| (m, BTreeSet::new())).collect();
    let mut k = 0;
    while k < runs.len() {
        let (mode, priority) = runs[k].clone();
        k += 1;
        let alloc = allocate_with_priority(scenario, prep, offload, mode, &priority)?;
        if priority.is_empty() && !alloc.reverted.is_empty() {
            runs.push((mode, alloc.reverted.iter().copied().collect()));
        }
        let assignment = assemble(scenario, prep, &alloc);
        let z = normalized_cost(&assignment, scenario)?.total;
        let better = match &best {
            None => true,
            Some((b, _, bz)) => {
                let (n, bn) = (alloc.offloaded.len(), b.offloaded.len());
                n > bn || (n == bn && z < *bz)
            }
        };
        if better {
            best = Some((alloc, assignment, z));
        }
    }
    Ok(best.expect("at least one mode"))
}

/// Iterative offloading, placement and allocation.
///
/// Step 0 splits every user's requests into a local set (count-maximizing
/// knapsack on the energy-optimal local clocks) and a forced-offload set.
/// Step 1 estimates remote clocks, places chains with the two-phase greedy
/// and solves the remote allocation. Step 2 repeatedly forces the local
/// request with the largest positive estimated cost improvement to offload
/// and re-runs Step 1, keeping the change only when no earlier offload is
/// lost and the objective does not increase. Each request is tried at most
/// once, so the loop ends after at most as many iterations as requests.
///
/// # Panics
///
/// Panics if the recorded objective sequence ever increases.
pub fn solve_jcora(scenario: &Scenario) -> Result<Solution> {
    let prep = Prepared::new(scenario)?;
    let mut offload = step0_offloads(scenario, &prep, false);
    let (mut alloc, mut assignment, mut objective) = step1(scenario, &prep, &offload)?;
    let mut trace = SolverTrace::default();
    trace.steps.push(TraceStep { iteration: 0, migrated: None, delta_z: 0.0, accepted: true, objective });

    let mut tried: BTreeSet<RequestRef> = BTreeSet::new();
    offload = alloc.offloaded_set().into_iter().collect();
    loop {
        let best = scenario
            .requests()
            .filter(|r| !assignment.decision(*r).is_offloaded() && !tried.contains(r))
            .map(|r| (r, prep.estimated_delta_z(scenario, r, false)))
            .filter(|(_, dz)| *dz > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((r, dz)) = best else { break };
        tried.insert(r);
        let mut candidate = offload.clone();
        candidate.push(r);
        candidate.sort_unstable();
        let (next, next_assignment, next_objective) = step1(scenario, &prep, &candidate)?;
        let kept = next.offloaded_set();
        let accepted = candidate.iter().all(|c| kept.contains(c)) && next_objective <= objective;
        if accepted {
            alloc = next;
            assignment = next_assignment;
            objective = next_objective;
            offload = candidate;
        }
        trace.steps.push(TraceStep {
            iteration: trace.steps.len(),
            migrated: Some(r),
            delta_z: dz,
            accepted,
            objective,
        });
    }
    assert!(trace.is_non_increasing(), "objective trace increased: {:?}", trace.objectives());
    trace.last_allocation = alloc.record.clone();
    let report = build_report(scenario, &prep, "gtda", &assignment)?;
    Ok(Solution { assignment, report, trace })
}
