use serde::{Deserialize, Serialize};

use crate::costs::backhaul_delay;
use crate::error::{ModelError, NumericsError, Result};
use crate::numerics::{
    minimize_convex, ConvexFn, ConvexOptions, ConvexProgram, Hessian, KktResiduals, LinearConstraint,
};
use crate::radio::UplinkQuote;
use crate::scenario::{RequestRef, Scenario, ServerId};

/// A placed request handed to the allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaveRequest {
    pub request: RequestRef,
    pub hosts: Vec<ServerId>,
    pub uplink: UplinkQuote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaveSolution {
    /// Remote clocks per placed request and stage.
    pub clocks_hz: Vec<Vec<f64>>,
    /// Per-stage time budgets `y = backhaul + compute`.
    pub slack_vars: Vec<Vec<f64>>,
    /// Multiplier of each request's delay equality.
    pub delay_multipliers: Vec<f64>,
    /// Multiplier of each server's capacity constraint (zero when unused).
    pub capacity_multipliers: Vec<f64>,
    /// Weighted normalized compute cost.
    pub objective: f64,
    pub kkt: KktResiduals<f64>,
}

/// One stage as seen by the convex program.
#[derive(Debug, Clone, Copy)]
struct Term {
    var: usize,
    /// Cycles in units of `f_ref` cycles.
    work: f64,
    /// Backhaul delay into the stage.
    delay: f64,
    weight: f64,
}

/// `sum w (e^(a/t) - 1) t` with `t = y - delay`: price times compute time.
struct CostFn {
    terms: Vec<Term>,
}

impl ConvexFn<f64> for CostFn {
    fn value(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let dt = y[t.var] - t.delay;
            if !(dt > 0.0) {
                return f64::INFINITY;
            }
            acc += t.weight * (t.work / dt).exp_m1() * dt;
        }
        acc
    }

    fn add_gradient(&self, y: &[f64], scale: f64, grad: &mut [f64]) {
        for t in &self.terms {
            let dt = y[t.var] - t.delay;
            let u = t.work / dt;
            grad[t.var] += scale * t.weight * (u.exp_m1() - u * u.exp());
        }
    }

    fn add_hessian(&self, y: &[f64], scale: f64, hess: &mut Hessian<f64>) {
        for t in &self.terms {
            let dt = y[t.var] - t.delay;
            let u = t.work / dt;
            hess.add_diag(t.var, scale * t.weight * u * u * u.exp() / dt);
        }
    }
}

/// `sum a / (y - delay) - cap`: clock demand on one server.
struct CapacityFn {
    terms: Vec<Term>,
    cap: f64,
}

impl ConvexFn<f64> for CapacityFn {
    fn value(&self, y: &[f64]) -> f64 {
        let mut acc = -self.cap;
        for t in &self.terms {
            let dt = y[t.var] - t.delay;
            if !(dt > 0.0) {
                return f64::INFINITY;
            }
            acc += t.work / dt;
        }
        acc
    }

    fn add_gradient(&self, y: &[f64], scale: f64, grad: &mut [f64]) {
        for t in &self.terms {
            let dt = y[t.var] - t.delay;
            grad[t.var] -= scale * t.work / (dt * dt);
        }
    }

    fn add_hessian(&self, y: &[f64], scale: f64, hess: &mut Hessian<f64>) {
        for t in &self.terms {
            let dt = y[t.var] - t.delay;
            hess.add_diag(t.var, scale * 2.0 * t.work / (dt * dt * dt));
        }
    }
}

/// Optimal remote clocks for a fixed placement.
///
/// With `y` the time budget of each stage (backhaul into the stage plus its
/// compute time) the problem is
///
/// ```text
/// minimize   sum beta / budget * e^-eta vartheta f_ref (e^(f / f_ref) - 1) (y - d)
/// subject to sum_l y_l = T - t_uplink                     for every request
///            sum_(stages on m) cycles / (y - d) <= F_m     for every server
///            y >= d + cycles / F_m
/// ```
///
/// where `f = cycles / (y - d)`. Reports the server named by the infeasibility
/// certificate when no clock assignment fits.
pub fn solve_slave(scenario: &Scenario, requests: &[SlaveRequest]) -> Result<SlaveSolution> {
    let f_ref = scenario.price.f_ref_hz;
    let k = (-scenario.price.eta).exp() * scenario.price.vartheta * f_ref;
    let n_servers = scenario.graph.len();

    let mut terms: Vec<Term> = Vec::new();
    let mut host_of: Vec<ServerId> = Vec::new();
    let mut equalities = Vec::with_capacity(requests.len());
    let mut start = Vec::new();
    for sr in requests {
        let user = scenario.mu(sr.request.mu);
        let request = scenario.request(sr.request);
        if sr.hosts.len() != request.chain.len() {
            return Err(ModelError::IncompleteAssignment(format!(
                "user {} request {}: {} hosts for {} stages",
                sr.request.mu,
                sr.request.req,
                sr.hosts.len(),
                request.chain.len()
            )));
        }
        let delays = backhaul_delay(&scenario.graph, scenario.home_server(sr.request.mu), &sr.hosts)?;
        let budget = user.deadline_s - sr.uplink.delay_s;
        let slack = budget - delays.iter().sum::<f64>();
        if !(slack > 0.0) {
            return Err(ModelError::NoOffloadSlack { slack });
        }
        let cycles: Vec<f64> = request.stage_cycles(user.total_input_bits).collect();
        let total: f64 = cycles.iter().sum();
        let weight = user.slave_weight * k / user.compute_budget;
        let first = terms.len();
        for ((&c, &d), &m) in cycles.iter().zip(&delays).zip(&sr.hosts) {
            let var = terms.len();
            terms.push(Term { var, work: c / f_ref, delay: d, weight });
            host_of.push(m);
            let share = if total > 0.0 { c / total } else { 1.0 / cycles.len() as f64 };
            start.push(d + slack * share);
        }
        equalities.push(LinearConstraint::new((first..terms.len()).map(|v| (v, 1.0)).collect(), budget));
    }
    if terms.is_empty() {
        return Ok(SlaveSolution {
            clocks_hz: Vec::new(),
            slack_vars: Vec::new(),
            delay_multipliers: Vec::new(),
            capacity_multipliers: vec![0.0; n_servers],
            objective: 0.0,
            kkt: KktResiduals { stationarity: 0.0, primal: 0.0, dual: 0.0, complementarity: 0.0 },
        });
    }

    let mut used: Vec<ServerId> = host_of.clone();
    used.sort_unstable();
    used.dedup();
    let cap_of = |m: ServerId| scenario.graph.server(m).capacity_hz / f_ref;
    let lower: Vec<Option<f64>> = terms.iter().map(|t| Some(t.delay + t.work / cap_of(host_of[t.var]))).collect();
    let mut program = ConvexProgram::new(terms.len(), Box::new(CostFn { terms: terms.clone() }))
        .with_lower_bounds(lower);
    for &m in &used {
        let on_m: Vec<Term> = terms.iter().filter(|t| host_of[t.var] == m).copied().collect();
        program = program.with_inequality(Box::new(CapacityFn { terms: on_m, cap: cap_of(m) }));
    }
    for e in equalities {
        program = program.with_equality(e);
    }

    let sol = minimize_convex(&program, &start, &ConvexOptions::default()).map_err(|e| match e {
        NumericsError::Infeasible { constraint, .. } => {
            let server = if constraint < used.len() {
                used[constraint]
            } else {
                host_of[(constraint - used.len()).min(host_of.len() - 1)]
            };
            ModelError::CapacityInfeasible { server }
        }
        other => other.into(),
    })?;

    let mut clocks_hz = Vec::with_capacity(requests.len());
    let mut slack_vars = Vec::with_capacity(requests.len());
    let mut offset = 0;
    for sr in requests {
        let n = sr.hosts.len();
        let ys = sol.x[offset..offset + n].to_vec();
        let fs = terms[offset..offset + n]
            .iter()
            .zip(&ys)
            .map(|(t, &y)| t.work * f_ref / (y - t.delay))
            .collect();
        clocks_hz.push(fs);
        slack_vars.push(ys);
        offset += n;
    }
    let mut capacity_multipliers = vec![0.0; n_servers];
    for (i, &m) in used.iter().enumerate() {
        capacity_multipliers[m] = sol.inequality_multipliers[i];
    }
    Ok(SlaveSolution {
        clocks_hz,
        slack_vars,
        delay_multipliers: sol.equality_multipliers.clone(),
        capacity_multipliers,
        objective: sol.objective,
        kkt: sol.kkt,
    })
}
