use serde::{Deserialize, Serialize};

use crate::costs::{backhaul_delay, local_exec, offload_quote};
use crate::radio::uplink_quote;
use crate::scenario::Scenario;

use super::assignment::{Assignment, Decision};

/// Tolerance on delays, in seconds.
pub const DELAY_TOL_S: f64 = 1e-9;
/// Tolerance on clock capacities, in cycles per second.
pub const CAPACITY_TOL_HZ: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Sum of local clocks within the user's capacity.
    LocalCapacity,
    /// Completion time within the deadline.
    Deadline,
    /// Every stage of an offloaded request has exactly one valid host.
    SingleHost,
    /// Sum of remote clocks within each server's capacity.
    ServerCapacity,
    /// Consecutive stages on the same or linked servers.
    ChainAdjacency,
    /// Stages only on servers that provide the function.
    Library,
    /// Clocks positive wherever work is done.
    ClockDomain,
}

impl Constraint {
    pub const ALL: [Constraint; 7] = [
        Constraint::LocalCapacity,
        Constraint::Deadline,
        Constraint::SingleHost,
        Constraint::ServerCapacity,
        Constraint::ChainAdjacency,
        Constraint::Library,
        Constraint::ClockDomain,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub violations: usize,
    /// Largest violation in the constraint's unit (seconds, Hz, or a count).
    pub worst: f64,
}

impl ConstraintCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checks: Vec<ConstraintCheck>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.checks.iter().all(ConstraintCheck::passed)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, c: Constraint) -> &ConstraintCheck {
        self.checks.iter().find(|k| k.constraint == c).expect("every constraint is checked")
    }

    fn record(&mut self, c: Constraint, amount: f64) {
        let k = self.checks.iter_mut().find(|k| k.constraint == c).expect("every constraint is checked");
        k.violations += 1;
        k.worst = k.worst.max(amount);
    }
}

/// Checks an assignment against every constraint, recomputing delays from
/// the cost model. Never fails: malformed decisions are reported as violations.
pub fn validate(assignment: &Assignment, scenario: &Scenario) -> FeasibilityReport {
    let mut rep = FeasibilityReport {
        checks: Constraint::ALL
            .iter()
            .map(|&c| ConstraintCheck { constraint: c, violations: 0, worst: 0.0 })
            .collect(),
    };
    if assignment.check_shape(scenario).is_err() {
        rep.record(Constraint::SingleHost, 1.0);
        return rep;
    }
    let graph = &scenario.graph;
    let mut server_load = vec![0.0; graph.len()];
    for (mu, user) in scenario.mus.iter().enumerate() {
        let mut local_load = 0.0;
        for (req, request) in user.requests.iter().enumerate() {
            let r = crate::scenario::RequestRef { mu, req };
            let d = assignment.decision(r);
            let bits = request.input_bits(user.total_input_bits);
            let bad_clock = d.clocks_hz().iter().any(|&f| !(f.is_finite() && (f > 0.0 || (bits == 0.0 && f >= 0.0))));
            if bad_clock {
                rep.record(Constraint::ClockDomain, 1.0);
                continue;
            }
            match d {
                Decision::Local { clocks_hz } => {
                    local_load += clocks_hz.iter().sum::<f64>();
                    if let Ok(q) = local_exec(request, user, clocks_hz) {
                        let over = q.delay_s - user.deadline_s;
                        if over > DELAY_TOL_S {
                            rep.record(Constraint::Deadline, over);
                        }
                    }
                }
                Decision::Offloaded { hosts, clocks_hz } => {
                    if hosts.iter().any(|&h| h >= graph.len()) {
                        rep.record(Constraint::SingleHost, 1.0);
                        continue;
                    }
                    for (l, (&h, &f)) in hosts.iter().zip(clocks_hz).enumerate() {
                        server_load[h] += f;
                        if !graph.supports(h, request.chain[l].function) {
                            rep.record(Constraint::Library, 1.0);
                        }
                    }
                    let home = scenario.home_server(mu);
                    if backhaul_delay(graph, home, hosts).is_err() {
                        rep.record(Constraint::ChainAdjacency, 1.0);
                        continue;
                    }
                    match uplink_quote(scenario, r).and_then(|u| offload_quote(scenario, r, &u, hosts, clocks_hz)) {
                        Ok(q) => {
                            let over = q.total_delay_s - user.deadline_s;
                            if over > DELAY_TOL_S {
                                rep.record(Constraint::Deadline, over);
                            }
                        }
                        Err(_) => rep.record(Constraint::Deadline, f64::INFINITY),
                    }
                }
            }
        }
        let over = local_load - user.max_clock_hz;
        if over > CAPACITY_TOL_HZ {
            rep.record(Constraint::LocalCapacity, over);
        }
    }
    for (m, load) in server_load.iter().enumerate() {
        let over = load - graph.server(m).capacity_hz;
        if over > CAPACITY_TOL_HZ {
            rep.record(Constraint::ServerCapacity, over);
        }
    }
    rep
}
