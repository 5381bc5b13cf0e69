use serde::{Deserialize, Serialize};

use crate::costs::backhaul_delay;
use crate::numerics::{solve_knapsack, KnapsackItem};
use crate::scenario::{RequestRef, Scenario, ServerId};

/// Relative headroom kept on every server so the estimated clocks leave a
/// strictly feasible point for the allocation step.
const CAPACITY_MARGIN: f64 = 1e-9;

/// A request to place together with its estimated per-stage clocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRequest {
    pub request: RequestRef,
    pub clocks_hz: Vec<f64>,
    /// Packed ahead of every non-priority request.
    pub priority: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Hosts of every stage, for requests whose whole chain was placed.
    pub placed: Vec<(RequestRef, Vec<ServerId>)>,
    pub unplaced: Vec<RequestRef>,
    /// Capacity left on each server, measured with the estimated clocks.
    pub free_capacity_hz: Vec<f64>,
    /// Ranking metric of each server when the second phase started.
    pub ranking: Vec<f64>,
}

struct State<'a> {
    scenario: &'a Scenario,
    requests: &'a [PlacementRequest],
    hosts: Vec<Vec<Option<ServerId>>>,
    free: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(scenario: &'a Scenario, requests: &'a [PlacementRequest]) -> Self {
        Self {
            scenario,
            requests,
            hosts: requests.iter().map(|p| vec![None; p.clocks_hz.len()]).collect(),
            free: scenario.graph.servers().iter().map(|s| s.capacity_hz).collect(),
        }
    }

    fn home(&self, i: usize) -> ServerId {
        self.scenario.home_server(self.requests[i].request.mu)
    }

    fn function(&self, i: usize, l: usize) -> usize {
        self.scenario.request(self.requests[i].request).chain[l].function
    }

    /// Stage `(i, l)` may run on `m` given the hosts of its placed neighbours.
    fn compatible(&self, i: usize, l: usize, m: ServerId) -> bool {
        let g = &self.scenario.graph;
        if !g.supports(m, self.function(i, l)) {
            return false;
        }
        let prev = if l == 0 { Some(self.home(i)) } else { self.hosts[i][l - 1] };
        let Some(prev) = prev else { return false };
        if g.hop_delay(prev, m).is_none() {
            return false;
        }
        match self.hosts[i].get(l + 1).copied().flatten() {
            Some(next) => g.hop_delay(m, next).is_some(),
            None => true,
        }
    }

    /// Packs as many of `stages` as fit on `m`; returns how many were placed.
    fn value(&self, i: usize) -> f64 {
        if self.requests[i].priority {
            self.hosts.iter().map(Vec::len).sum::<usize>() as f64 + 1.0
        } else {
            1.0
        }
    }

    fn pack(&mut self, m: ServerId, stages: &[(usize, usize)]) -> usize {
        let items: Vec<KnapsackItem<f64>> = stages
            .iter()
            .enumerate()
            .map(|(k, &(i, l))| KnapsackItem::new(k, self.value(i), self.requests[i].clocks_hz[l]))
            .collect();
        let room = self.free[m] - self.scenario.graph.server(m).capacity_hz * CAPACITY_MARGIN;
        let chosen = solve_knapsack(&items, room.max(0.0));
        for &k in &chosen {
            let (i, l) = stages[k];
            self.hosts[i][l] = Some(m);
            self.free[m] -= self.requests[i].clocks_hz[l];
        }
        chosen.len()
    }

    /// Every home server packs the stages of its own users.
    fn home_phase(&mut self) {
        let mut homes: Vec<ServerId> = (0..self.requests.len()).map(|i| self.home(i)).collect();
        homes.sort_unstable();
        homes.dedup();
        for m in homes {
            let stages: Vec<(usize, usize)> = (0..self.requests.len())
                .filter(|&i| self.home(i) == m)
                .flat_map(|i| (0..self.hosts[i].len()).map(move |l| (i, l)))
                .filter(|&(i, l)| self.scenario.graph.supports(m, self.function(i, l)))
                .collect();
            self.pack(m, &stages);
        }
    }

    /// Every home server packs whole chains of its own users.
    fn home_phase_whole(&mut self) {
        let g = &self.scenario.graph;
        let mut homes: Vec<ServerId> = (0..self.requests.len()).map(|i| self.home(i)).collect();
        homes.sort_unstable();
        homes.dedup();
        for m in homes {
            let cands: Vec<usize> = (0..self.requests.len())
                .filter(|&i| self.home(i) == m)
                .filter(|&i| (0..self.hosts[i].len()).all(|l| g.supports(m, self.function(i, l))))
                .collect();
            let items: Vec<KnapsackItem<f64>> = cands
                .iter()
                .enumerate()
                .map(|(k, &i)| KnapsackItem::new(k, self.value(i), self.requests[i].clocks_hz.iter().sum()))
                .collect();
            let room = self.free[m] - g.server(m).capacity_hz * CAPACITY_MARGIN;
            for k in solve_knapsack(&items, room.max(0.0)) {
                let i = cands[k];
                for l in 0..self.hosts[i].len() {
                    self.hosts[i][l] = Some(m);
                    self.free[m] -= self.requests[i].clocks_hz[l];
                }
            }
        }
    }

    fn ranking(&self) -> Vec<f64> {
        let g = &self.scenario.graph;
        (0..g.len())
            .map(|m| self.free[m] / g.in_neighbors(m).len().max(1) as f64)
            .collect()
    }

    /// Remaining stages go to servers in decreasing rank, repeated until no
    /// stage can be added.
    fn cooperative_phase(&mut self) -> Vec<f64> {
        let first = self.ranking();
        loop {
            let rank = self.ranking();
            let mut order: Vec<ServerId> = (0..rank.len()).collect();
            order.sort_by(|&a, &b| rank[b].total_cmp(&rank[a]).then(a.cmp(&b)));
            let mut progress = 0;
            for m in order {
                let stages: Vec<(usize, usize)> = (0..self.requests.len())
                    .flat_map(|i| (0..self.hosts[i].len()).map(move |l| (i, l)))
                    .filter(|&(i, l)| self.hosts[i][l].is_none() && self.compatible(i, l, m))
                    .collect();
                if !stages.is_empty() {
                    progress += self.pack(m, &stages);
                }
            }
            if progress == 0 {
                return first;
            }
        }
    }

    fn finish(mut self, ranking: Vec<f64>) -> Placement {
        let mut out = Placement::default();
        for i in 0..self.requests.len() {
            let r = self.requests[i].request;
            let complete: Option<Vec<ServerId>> = self.hosts[i].iter().copied().collect();
            let valid = complete.filter(|h| {
                backhaul_delay(&self.scenario.graph, self.home(i), h).is_ok()
                    && h.iter().enumerate().all(|(l, &m)| self.scenario.graph.supports(m, self.function(i, l)))
            });
            match valid {
                Some(h) => out.placed.push((r, h)),
                None => {
                    for (l, host) in self.hosts[i].iter_mut().enumerate() {
                        if let Some(m) = host.take() {
                            self.free[m] += self.requests[i].clocks_hz[l];
                        }
                    }
                    out.unplaced.push(r);
                }
            }
        }
        out.free_capacity_hz = self.free;
        out.ranking = ranking;
        out
    }
}

/// Two-phase greedy placement.
///
/// Phase one solves one knapsack per home server over the stages of its own
/// users, maximizing the number of stages packed (priority requests first). Phase two ranks servers by free capacity per in-neighbour
/// and lets each pack still-unplaced stages whose chain neighbours are
/// already placed on the same or an adjacent server. Requests with any stage
/// left over are returned as unplaced and hold no capacity.
pub fn place_functions_gtda(scenario: &Scenario, requests: &[PlacementRequest]) -> Placement {
    let mut st = State::new(scenario, requests);
    st.home_phase();
    let ranking = st.cooperative_phase();
    st.finish(ranking)
}

/// Places whole chains on their home server, as many requests as fit.
pub fn place_home_only(scenario: &Scenario, requests: &[PlacementRequest]) -> Placement {
    let mut st = State::new(scenario, requests);
    st.home_phase_whole();
    let ranking = st.ranking();
    st.finish(ranking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, Blacklist, ScenarioConfig, TopologyKind};

    fn scenario(kind: TopologyKind, caps: Vec<f64>) -> Scenario {
        let mut cfg = ScenarioConfig::default();
        cfg.topology.kind = kind;
        cfg.topology.edge_capacities_ghz = caps;
        cfg.mus_per_cell = 1;
        cfg.chain.min_length = 2;
        cfg.chain.max_length = 2;
        cfg.chain.length_weights = None;
        generate_scenario(&cfg, 4).unwrap()
    }

    fn req(mu: usize, req: usize, clocks: &[f64]) -> PlacementRequest {
        PlacementRequest { request: RequestRef { mu, req }, clocks_hz: clocks.to_vec(), priority: false }
    }

    #[test]
    fn ample_home_capacity_keeps_everything_home() {
        let s = scenario(TopologyKind::FullMesh, vec![10.0]);
        let reqs = vec![req(0, 0, &[1e8, 1e8]), req(1, 0, &[2e8, 1e8])];
        let p = place_functions_gtda(&s, &reqs);
        assert!(p.unplaced.is_empty());
        assert_eq!(p.placed[0].1, vec![0, 0]);
        assert_eq!(p.placed[1].1, vec![1, 1]);
    }

    #[test]
    fn overflow_goes_to_highest_ranked_neighbour() {
        // server 0 holds one stage; server 3 has the most free capacity
        let s = scenario(TopologyKind::FullMesh, vec![1.0, 2.0, 2.5, 4.0]);
        let reqs = vec![req(0, 0, &[0.6e9, 0.6e9])];
        let p = place_functions_gtda(&s, &reqs);
        assert_eq!(p.placed.len(), 1);
        let hosts = &p.placed[0].1;
        assert_eq!(hosts.iter().filter(|&&h| h == 0).count(), 1);
        assert!(hosts.contains(&3), "{hosts:?}");
        assert_eq!(p.ranking.iter().cloned().fold(f64::MIN, f64::max), p.ranking[3]);
    }

    #[test]
    fn ring_respects_adjacency() {
        let s = scenario(TopologyKind::Ring, vec![0.1, 1.0, 9.0, 1.0]);
        let reqs = vec![req(0, 0, &[0.5e9, 0.5e9])];
        let p = place_functions_gtda(&s, &reqs);
        // server 2 is not adjacent to home 0, so the chain stays within {1, 3}
        for (_, hosts) in &p.placed {
            assert!(backhaul_delay(&s.graph, 0, hosts).is_ok());
            assert!(!hosts.contains(&2) || hosts[0] != 2);
        }
    }

    #[test]
    fn blacklisted_server_is_never_used() {
        let mut cfg = ScenarioConfig::default();
        cfg.mus_per_cell = 1;
        cfg.topology.core_capacities_ghz = vec![50.0];
        cfg.topology.edge_capacities_ghz = vec![0.05];
        cfg.topology.blacklist = vec![Blacklist { server: 4, functions: (0..6).collect() }];
        let s = generate_scenario(&cfg, 4).unwrap();
        let stages = s.request(RequestRef { mu: 0, req: 0 }).chain.len();
        let reqs = vec![req(0, 0, &vec![0.3e9; stages])];
        let p = place_functions_gtda(&s, &reqs);
        for (_, hosts) in &p.placed {
            assert!(!hosts.contains(&4));
        }
    }

    #[test]
    fn home_only_never_leaves_home() {
        let s = scenario(TopologyKind::FullMesh, vec![0.5]);
        let reqs = vec![req(0, 0, &[0.2e9, 0.2e9]), req(0, 1, &[0.2e9, 0.2e9])];
        let p = place_home_only(&s, &reqs);
        assert_eq!(p.placed.len(), 1);
        assert_eq!(p.unplaced.len(), 1);
        assert!(p.placed[0].1.iter().all(|&h| h == 0));
        assert!((p.free_capacity_hz[0] - 0.1e9).abs() < 1.0);
    }
}
