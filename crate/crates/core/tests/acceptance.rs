//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mec_sfc::baselines::{solve_gojra, solve_hoda};
use mec_sfc::costs::{backhaul_delay, local_exec};
use mec_sfc::error::ModelError;
use mec_sfc::jcora::{estimate_remote_alloc, local_allocation, solve_jcora, solve_slave, validate, SlaveRequest, Solution};
use mec_sfc::radio::uplink_quote;
use mec_sfc::scenario::{generate_scenario, RequestRef, Scenario, ScenarioConfig, ServerId, TopologyKind};

use common::{brute_force_micro, micro_config, min_energy_oracle, paper_defaults, slave_oracle, OracleTerm};

const TIE: f64 = 1e-9;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn le(a: f64, b: f64) -> bool {
    a <= b + TIE * b.abs().max(a.abs())
}

fn trace_ok(sol: &Solution) -> bool {
    sol.trace.steps.windows(2).all(|w| w[1].objective <= w[0].objective)
}

fn clean(sol: &Solution, scenario: &Scenario) -> bool {
    sol.report.feasibility.is_feasible() && validate(&sol.assignment, scenario).is_feasible()
}

fn gtda_runs(cfg: &ScenarioConfig, seeds: std::ops::Range<u64>, traces: &mut Vec<bool>) -> Vec<Solution> {
    seeds
        .map(|seed| {
            let s = generate_scenario(cfg, seed).expect("scenario");
            let sol = solve_jcora(&s).expect("gtda");
            traces.push(trace_ok(&sol));
            sol
        })
        .collect()
}

struct Runs {
    gtda: Vec<f64>,
    gojra: Vec<f64>,
    hoda: Vec<f64>,
}

fn feasibility(traces: &mut Vec<bool>) -> (Outcome, Runs) {
    let cfg = paper_defaults();
    let start = Instant::now();
    let mut runs = Runs { gtda: Vec::new(), gojra: Vec::new(), hoda: Vec::new() };
    let mut bad = Vec::new();
    for seed in 0..50 {
        let s = generate_scenario(&cfg, seed).expect("scenario");
        let g = solve_jcora(&s).expect("gtda");
        let o = solve_gojra(&s).expect("gojra");
        let h = solve_hoda(&s).expect("hoda");
        traces.push(trace_ok(&g));
        for (name, sol) in [("gtda", &g), ("gojra", &o), ("hoda", &h)] {
            if !clean(sol, &s) {
                bad.push(format!("{name}@{seed}"));
            }
        }
        runs.gtda.push(g.report.objective);
        runs.gojra.push(o.report.objective);
        runs.hoda.push(h.report.objective);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = bad.is_empty() && secs < 60.0;
    let detail = format!("150 runs, {} with violations {:?}, {secs:.2} s", bad.len(), bad);
    (Outcome { name: "all algorithms feasible on 50 seeds within 60 s", pass, detail }, runs)
}

fn local_allocation_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_e: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut n = 0;
    let mut seed = 0;
    while n < 200 {
        let mut cfg = paper_defaults();
        cfg.deadline_s = rng.random_range(0.3..1.5);
        cfg.u_bits = rng.random_range(0.2e6..1.5e6);
        cfg.chain.min_length = 1;
        cfg.chain.max_length = 3;
        cfg.chain.length_weights = None;
        let s = generate_scenario(&cfg, seed).expect("scenario");
        seed += 1;
        for r in s.requests().step_by(16) {
            if n == 200 {
                break;
            }
            let user = s.mu(r.mu);
            let req = s.request(r);
            let clocks = local_allocation(user, req).expect("local");
            let q = local_exec(req, user, &clocks).expect("quote");
            let a: Vec<f64> = req
                .stage_cycles(user.total_input_bits)
                .zip(&req.chain)
                .map(|(c, st)| c / st.cycles_per_bit * user.kappa * c * c)
                .collect();
            let oracle = min_energy_oracle(&a, user.deadline_s);
            worst_e = worst_e.max((q.energy_j - oracle).abs() / oracle);
            worst_t = worst_t.max((q.delay_s - user.deadline_s).abs() / user.deadline_s);
            n += 1;
        }
    }
    Outcome {
        name: "local allocation matches the energy oracle and meets the deadline exactly",
        pass: worst_e <= 1e-6 && worst_t <= 1e-9,
        detail: format!("{n} requests, worst energy rel err {worst_e:.2e}, worst delay rel err {worst_t:.2e}"),
    }
}

fn estimate_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut seed = 100;
    while n < 200 {
        let mut cfg = paper_defaults();
        cfg.budgets.compute = [0.035, 0.35, 3.5, 35.0][rng.random_range(0..4)];
        cfg.chain.max_length = 3;
        cfg.chain.length_weights = None;
        let s = generate_scenario(&cfg, seed).expect("scenario");
        seed += 1;
        let hop = s.hop_delay_s();
        for r in s.requests().step_by(8) {
            if n == 200 {
                break;
            }
            let user = s.mu(r.mu);
            let req = s.request(r);
            let Ok(up) = uplink_quote(&s, r) else { continue };
            let budget = if rng.random_bool(0.5) { hop * req.chain.len() as f64 } else { 0.0 };
            let Ok(est) = estimate_remote_alloc(user, req, &s.price, &up, budget) else { continue };
            let time: f64 = req.stage_cycles(user.total_input_bits).zip(&est.clocks_hz).map(|(c, f)| c / f).sum();
            let residual = (time + up.delay_s + budget - user.deadline_s).abs();
            worst = worst.max(residual);
            n += 1;
        }
    }
    Outcome {
        name: "remote clock estimate meets the delay equality",
        pass: worst <= 1e-9,
        detail: format!("{n} requests, worst residual {worst:.2e} s"),
    }
}

fn random_hosts(s: &Scenario, r: RequestRef, rng: &mut ChaCha8Rng) -> Option<Vec<ServerId>> {
    let g = &s.graph;
    let mut prev = s.home_server(r.mu);
    let mut hosts = Vec::new();
    for st in &s.request(r).chain {
        let opts: Vec<ServerId> =
            (0..g.len()).filter(|&m| g.supports(m, st.function) && g.hop_delay(prev, m).is_some()).collect();
        if opts.is_empty() {
            return None;
        }
        prev = opts[rng.random_range(0..opts.len())];
        hosts.push(prev);
    }
    Some(hosts)
}

fn slave_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst_kkt: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    let mut worst_viol: f64 = 0.0;
    let mut binding = 0;
    let mut n = 0;
    let mut seed = 200;
    while n < 50 {
        let mut cfg = paper_defaults();
        cfg.mus_per_cell = 1;
        cfg.requests_per_mu = 2;
        cfg.budgets.compute = [0.035, 0.35, 3.5][rng.random_range(0..3)];
        cfg.topology.edge_capacities_ghz = vec![[0.3, 0.5, 1.0, 3.0][rng.random_range(0..4)]];
        let s = generate_scenario(&cfg, seed).expect("scenario");
        seed += 1;
        let mut reqs = Vec::new();
        for r in s.requests() {
            let Ok(up) = uplink_quote(&s, r) else { continue };
            let Some(hosts) = random_hosts(&s, r, &mut rng) else { continue };
            let d: f64 = backhaul_delay(&s.graph, s.home_server(r.mu), &hosts).expect("adjacent").iter().sum();
            if s.mu(r.mu).deadline_s - up.delay_s - d > 0.0 {
                reqs.push(SlaveRequest { request: r, hosts, uplink: up });
            }
        }
        if reqs.is_empty() {
            continue;
        }
        let sol = match solve_slave(&s, &reqs) {
            Ok(sol) => sol,
            Err(ModelError::CapacityInfeasible { .. }) => continue,
            Err(e) => panic!("slave failed on seed {}: {e}", seed - 1),
        };
        let f_ref = s.price.f_ref_hz;
        let k = (-s.price.eta).exp() * s.price.vartheta * f_ref;
        let mut terms = Vec::new();
        let mut budgets = Vec::new();
        for (gi, sr) in reqs.iter().enumerate() {
            let user = s.mu(sr.request.mu);
            let delays = backhaul_delay(&s.graph, s.home_server(sr.request.mu), &sr.hosts).expect("adjacent");
            let cycles = s.request(sr.request).stage_cycles(user.total_input_bits);
            for ((c, d), &m) in cycles.zip(delays).zip(&sr.hosts) {
                terms.push(OracleTerm {
                    group: gi,
                    server: m,
                    work: c / f_ref,
                    delay: d,
                    weight: user.slave_weight * k / user.compute_budget,
                });
            }
            budgets.push(user.deadline_s - sr.uplink.delay_s);
        }
        let caps: Vec<f64> = s.graph.servers().iter().map(|v| v.capacity_hz / f_ref).collect();
        let (oracle, viol) = slave_oracle(&terms, &budgets, &caps);
        worst_kkt = worst_kkt.max(sol.kkt.max());
        worst_obj = worst_obj.max((sol.objective - oracle).abs() / oracle.abs());
        worst_viol = worst_viol.max(viol);
        if sol.capacity_multipliers.iter().any(|&m| m > 0.0) {
            binding += 1;
        }
        n += 1;
    }
    Outcome {
        name: "clock allocation satisfies KKT and matches the convex oracle",
        pass: worst_kkt <= 1e-8 && worst_obj <= 1e-6,
        detail: format!(
            "{n} instances ({binding} with a binding server), worst KKT {worst_kkt:.2e}, worst objective rel err {worst_obj:.2e}, oracle violation {worst_viol:.1e}"
        ),
    }
}

fn dominance(runs: &Runs) -> Outcome {
    let (g, o, h) = (mean(&runs.gtda), mean(&runs.gojra), mean(&runs.hoda));
    let wins = (0..runs.gtda.len()).filter(|&i| le(runs.gtda[i], runs.gojra[i]) && le(runs.gtda[i], runs.hoda[i])).count();
    let frac = wins as f64 / runs.gtda.len() as f64;
    Outcome {
        name: "cooperative solver beats or ties both baselines",
        pass: le(g, o) && le(g, h) && frac >= 0.9,
        detail: format!("mean Z gtda {g:.4e} gojra {o:.4e} hoda {h:.4e}, wins or ties on {:.0}% of seeds", frac * 100.0),
    }
}

fn topology_check(traces: &mut Vec<bool>) -> Outcome {
    let mut means = Vec::new();
    let mut hoda_bs = 0.0;
    for kind in [TopologyKind::FullMesh, TopologyKind::MeshCenterCloud, TopologyKind::Ring, TopologyKind::MeshCenterBs] {
        let mut cfg = paper_defaults();
        cfg.topology.kind = kind;
        cfg.topology.core_capacities_ghz = vec![10.0];
        let z: Vec<f64> = gtda_runs(&cfg, 0..20, traces).iter().map(|s| s.report.objective).collect();
        means.push(mean(&z));
        if kind == TopologyKind::MeshCenterBs {
            let h: Vec<f64> = (0..20)
                .map(|seed| solve_hoda(&generate_scenario(&cfg, seed).expect("scenario")).expect("hoda").report.objective)
                .collect();
            hoda_bs = mean(&h);
        }
    }
    let (fm, mcc, ring, mcbs) = (means[0], means[1], means[2], means[3]);
    let gap = (mcbs - hoda_bs).abs() / hoda_bs;
    Outcome {
        name: "topology ordering and mesh-centre-BS closeness to home-only",
        pass: le(fm, mcc) && le(mcc, ring) && gap <= 0.15,
        detail: format!(
            "mean Z full-mesh {fm:.4e} centre-cloud {mcc:.4e} ring {ring:.4e} centre-bs {mcbs:.4e} (hoda {hoda_bs:.4e}, gap {:.1}%)",
            gap * 100.0
        ),
    }
}

fn weights_check(traces: &mut Vec<bool>) -> Outcome {
    let z = |tx: f64, traces: &mut Vec<bool>| {
        let mut cfg = paper_defaults();
        cfg.weights.theta_tx = tx;
        cfg.weights.theta_cp = 1.0 - tx;
        mean(&gtda_runs(&cfg, 0..20, traces).iter().map(|s| s.report.objective).collect::<Vec<_>>())
    };
    let high = z(0.8, traces);
    let low = z(0.3, traces);
    let drop = 1.0 - high / low;
    Outcome {
        name: "transmit-heavy weights lower the cost by at least 10%",
        pass: drop >= 0.10,
        detail: format!("mean Z (0.8,0.2) {high:.4e} vs (0.3,0.7) {low:.4e}, {:.1}% lower", drop * 100.0),
    }
}

fn trends_check(traces: &mut Vec<bool>) -> Outcome {
    let sweep = |set: &dyn Fn(&mut ScenarioConfig, f64), values: &[f64], metric: &dyn Fn(&Solution) -> f64, traces: &mut Vec<bool>| {
        values
            .iter()
            .map(|&v| {
                let mut cfg = paper_defaults();
                set(&mut cfg, v);
                mean(&gtda_runs(&cfg, 0..10, traces).iter().map(metric).collect::<Vec<_>>())
            })
            .collect::<Vec<f64>>()
    };
    let z = sweep(&|c, v| c.u_bits = v, &[0.4e6, 0.8e6, 1.2e6], &|s| s.report.objective, traces);
    let e = sweep(&|c, v| c.deadline_s = v, &[0.6, 0.8, 1.0], &|s| s.report.avg_energy_j, traces);
    let b = sweep(&|c, v| c.budgets.compute = v, &[0.035, 0.35, 3.5], &|s| s.report.offloaded_bits, traces);
    let z_ok = le(z[0], z[1]) && le(z[1], z[2]);
    let e_ok = le(e[1], e[0]) && le(e[2], e[1]);
    let b_ok = le(b[0], b[1]) && le(b[1], b[2]) && (b[2] - b[1]) <= (b[1] - b[0]);
    Outcome {
        name: "cost rises with data size, energy falls with deadline, offloading saturates with budget",
        pass: z_ok && e_ok && b_ok,
        detail: format!(
            "Z {:.3e}/{:.3e}/{:.3e}, energy {:.3e}/{:.3e}/{:.3e} J, offloaded {:.3e}/{:.3e}/{:.3e} bit",
            z[0], z[1], z[2], e[0], e[1], e[2], b[0], b[1], b[2]
        ),
    }
}

fn micro_check(traces: &mut Vec<bool>) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut n = 0;
    let mut seed = 0;
    while n < 20 {
        let s = generate_scenario(&micro_config(seed), seed).expect("scenario");
        seed += 1;
        let Some(best) = brute_force_micro(&s) else { continue };
        let sol = solve_jcora(&s).expect("gtda");
        traces.push(trace_ok(&sol));
        let ratio = sol.report.objective / best;
        if !clean(&sol, &s) || ratio > 1.10 {
            bad.push(seed - 1);
        }
        worst = worst.max(ratio);
        n += 1;
    }
    Outcome {
        name: "cooperative solver within 10% of exhaustive search on micro-instances",
        pass: bad.is_empty(),
        detail: format!("{n} instances, worst ratio {worst:.4}, failing seeds {bad:?}"),
    }
}

fn main() -> ExitCode {
    let mut traces = Vec::new();
    let (c1, runs) = feasibility(&mut traces);
    let mut outcomes = vec![c1, local_allocation_check(), estimate_check(), slave_check(), dominance(&runs)];
    outcomes.push(topology_check(&mut traces));
    outcomes.push(weights_check(&mut traces));
    outcomes.push(trends_check(&mut traces));
    outcomes.push(micro_check(&mut traces));
    let bad = traces.iter().filter(|t| !**t).count();
    outcomes.push(Outcome {
        name: "objective trace never increases",
        pass: bad == 0,
        detail: format!("{} traces, {bad} increasing", traces.len()),
    });
    let mut failed = 0;
    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
