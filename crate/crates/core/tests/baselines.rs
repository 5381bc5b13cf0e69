mod common;

use proptest::prelude::*;

use mec_sfc::baselines::{solve_gojra, solve_hoda};
use mec_sfc::jcora::{local_allocation, validate, Decision, Prepared, Solution};
use mec_sfc::radio::uplink_quote;
use mec_sfc::scenario::{generate_scenario, RequestRef, Scenario, TopologyKind};

use common::paper_defaults;

fn stays_home(sol: &Solution, s: &Scenario) -> bool {
    sol.assignment.iter().all(|(r, d)| match d {
        Decision::Offloaded { hosts, .. } => hosts.iter().all(|h| *h == s.home_server(r.mu)),
        Decision::Local { .. } => true,
    })
}

#[test]
fn gojra_fills_huge_home_servers() {
    let mut cfg = paper_defaults();
    cfg.topology.edge_capacities_ghz = vec![1000.0];
    let s = generate_scenario(&cfg, 3).unwrap();
    let sol = solve_gojra(&s).unwrap();
    for r in s.requests() {
        let up = uplink_quote(&s, r).unwrap();
        if up.delay_s < s.mu(r.mu).deadline_s {
            assert!(sol.assignment.decision(r).is_offloaded(), "{r:?} stayed local");
        }
    }
    assert!(sol.report.feasibility.is_feasible());
}

#[test]
fn tiny_home_servers_keep_everything_local() {
    let mut cfg = paper_defaults();
    cfg.topology.edge_capacities_ghz = vec![1e-6];
    cfg.mu.clock_choices_ghz = vec![20.0];
    let s = generate_scenario(&cfg, 4).unwrap();
    for sol in [solve_gojra(&s).unwrap(), solve_hoda(&s).unwrap()] {
        assert_eq!(sol.report.offloaded_requests, 0);
        assert!(sol.report.feasibility.is_feasible());
    }
}

#[test]
fn hoda_without_gain_is_all_local() {
    let mut cfg = paper_defaults();
    cfg.mu.clock_choices_ghz = vec![20.0];
    let s = generate_scenario(&cfg, 5).unwrap();
    let prep = Prepared::new(&s).unwrap();
    assert!(s.requests().all(|r| prep.estimated_delta_z(&s, r, true) <= 0.0));
    let sol = solve_hoda(&s).unwrap();
    for (r, d) in sol.assignment.iter() {
        let expect = local_allocation(s.mu(r.mu), s.request(r)).unwrap();
        assert_eq!(d, &Decision::Local { clocks_hz: expect });
    }
}

#[test]
fn hoda_offloads_profitable_request() {
    let mut cfg = paper_defaults();
    cfg.cells.count = 1;
    cfg.radio.sir_cap = Some(1000.0);
    cfg.mus_per_cell = 1;
    cfg.requests_per_mu = 1;
    cfg.budgets.compute = 1000.0;
    cfg.mu.kappa = 1e-24;
    let s = generate_scenario(&cfg, 3).unwrap();
    let r = RequestRef { mu: 0, req: 0 };
    let prep = Prepared::new(&s).unwrap();
    assert!(prep.estimated_delta_z(&s, r, true) > 0.0);
    let sol = solve_hoda(&s).unwrap();
    assert!(sol.assignment.decision(r).is_offloaded());
}

#[test]
fn baselines_are_clean_on_default_seeds() {
    for seed in 0..10 {
        let s = generate_scenario(&paper_defaults(), seed).unwrap();
        for sol in [solve_gojra(&s).unwrap(), solve_hoda(&s).unwrap()] {
            assert!(validate(&sol.assignment, &s).is_feasible(), "{} seed {seed}", sol.report.algorithm);
            assert!(stays_home(&sol, &s));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn baselines_never_leave_home(seed in 0u64..10_000, kind in 0usize..4, u_bits in 0.3e6f64..1.2e6) {
        let mut cfg = paper_defaults();
        cfg.mus_per_cell = 4;
        cfg.u_bits = u_bits;
        cfg.topology.kind = TopologyKind::ALL[kind];
        cfg.topology.core_capacities_ghz = vec![10.0];
        let s = generate_scenario(&cfg, seed).unwrap();
        for sol in [solve_gojra(&s).unwrap(), solve_hoda(&s).unwrap()] {
            prop_assert!(stays_home(&sol, &s));
            let rep = validate(&sol.assignment, &s);
            prop_assert!(rep.is_feasible() || !sol.report.unserved.is_empty());
        }
    }
}
