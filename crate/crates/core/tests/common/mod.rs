//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the library's solvers; the oracles work from the
//! model formulas directly.

#![allow(dead_code)]

use mec_sfc::radio::uplink_quote;
use mec_sfc::scenario::{RequestRef, Scenario, ScenarioConfig};

pub fn paper_defaults() -> ScenarioConfig {
    ScenarioConfig::default()
}

/// Projects `z` onto `{y : sum y = b, y >= lb}` by bisection on the shift.
pub fn project_capped_simplex(z: &[f64], lb: &[f64], b: f64) -> Vec<f64> {
    let total = |tau: f64| z.iter().zip(lb).map(|(zi, li)| (zi - tau).max(*li)).sum::<f64>();
    let mut hi = z.iter().zip(lb).map(|(zi, li)| zi - li).fold(f64::NEG_INFINITY, f64::max);
    let mut lo = z.iter().cloned().fold(f64::INFINITY, f64::min) - b.abs() - 1.0;
    while total(lo) < b {
        lo -= (hi - lo).abs() + 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    z.iter().zip(lb).map(|(zi, li)| (zi - tau).max(*li)).collect()
}

/// Projected gradient with backtracking over a product of capped simplices.
/// `groups[g]` lists the coordinates whose sum must equal `budgets[g]`.
pub fn projected_gradient(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    groups: &[Vec<usize>],
    budgets: &[f64],
    lb: &[f64],
    start: Vec<f64>,
    iters: usize,
) -> Vec<f64> {
    let project = |z: &[f64]| {
        let mut out = z.to_vec();
        for (g, idx) in groups.iter().enumerate() {
            let zs: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
            let ls: Vec<f64> = idx.iter().map(|&i| lb[i]).collect();
            for (k, v) in project_capped_simplex(&zs, &ls, budgets[g]).into_iter().enumerate() {
                out[idx[k]] = v;
            }
        }
        out
    };
    let mut x = project(&start);
    let mut fx = f(&x);
    let mut step = 1.0;
    for _ in 0..iters {
        let g = grad(&x);
        let mut accepted = false;
        for _ in 0..80 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let y = project(&cand);
            let fy = f(&y);
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            let dist: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            if fy.is_finite() && fy <= fx + lin + dist / (2.0 * step) {
                let moved = dist.sqrt();
                x = y;
                fx = fy;
                step *= 1.5;
                accepted = true;
                if moved <= 1e-15 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                    return x;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// Minimum of `sum_l a_l / d_l^2` subject to `sum_l d_l = t`, by projected
/// gradient on the delays. Returns the minimal value.
pub fn min_energy_oracle(a: &[f64], t: f64) -> f64 {
    let scale = a.iter().sum::<f64>() / (t * t);
    let f = |d: &[f64]| d.iter().zip(a).map(|(di, ai)| ai / (di * di)).sum::<f64>() / scale;
    let g = |d: &[f64]| d.iter().zip(a).map(|(di, ai)| -2.0 * ai / (di * di * di) / scale).collect::<Vec<_>>();
    let n = a.len();
    let lb = vec![t * 1e-9; n];
    let start = vec![t / n as f64; n];
    let d = projected_gradient(&f, &g, &[(0..n).collect()], &[t], &lb, start, 200_000);
    f(&d) * scale
}

/// One stage of an allocation instance.
#[derive(Debug, Clone, Copy)]
pub struct OracleTerm {
    pub group: usize,
    pub server: usize,
    /// Cycles over the reference clock.
    pub work: f64,
    /// Backhaul delay into the stage.
    pub delay: f64,
    pub weight: f64,
}

/// Minimizes `sum w (e^(a/t) - 1) t`, `t = y - delay`, subject to per-group
/// budgets and per-server `sum a / t <= cap`, by an augmented Lagrangian on
/// the capacities with projected-gradient inner solves. Returns the
/// objective and the worst capacity violation.
pub fn slave_oracle(terms: &[OracleTerm], budgets: &[f64], caps: &[f64]) -> (f64, f64) {
    let n = terms.len();
    let raw = |y: &[f64]| {
        terms
            .iter()
            .zip(y)
            .map(|(t, yi)| {
                let dt = yi - t.delay;
                if dt <= 0.0 {
                    f64::INFINITY
                } else {
                    t.weight * (t.work / dt).exp_m1() * dt
                }
            })
            .sum::<f64>()
    };
    let load = |y: &[f64]| {
        let mut h: Vec<f64> = caps.iter().map(|c| -c).collect();
        for (t, yi) in terms.iter().zip(y) {
            h[t.server] += t.work / (yi - t.delay);
        }
        h
    };
    let lb: Vec<f64> = terms.iter().map(|t| t.delay + t.work / caps[t.server]).collect();
    let groups: Vec<Vec<usize>> =
        (0..budgets.len()).map(|g| (0..n).filter(|&i| terms[i].group == g).collect()).collect();
    let mut y: Vec<f64> = vec![0.0; n];
    for (g, idx) in groups.iter().enumerate() {
        let slack = budgets[g] - idx.iter().map(|&i| terms[i].delay).sum::<f64>();
        for &i in idx {
            y[i] = terms[i].delay + slack / idx.len() as f64;
        }
    }
    let scale = raw(&y).abs().max(1e-300);
    let used: Vec<bool> = (0..caps.len()).map(|m| terms.iter().any(|t| t.server == m)).collect();
    let mut nu = vec![0.0; caps.len()];
    let mut rho = 1.0;
    let mut last_viol = f64::INFINITY;
    for _ in 0..60 {
        let (nu_c, rho_c) = (nu.clone(), rho);
        let phi = |y: &[f64]| {
            let h = load(y);
            let pen: f64 = (0..caps.len())
                .filter(|&m| used[m])
                .map(|m| (h[m] + nu_c[m] / rho_c).max(0.0).powi(2))
                .sum();
            raw(y) / scale + 0.5 * rho_c * pen
        };
        let grad = |y: &[f64]| {
            let h = load(y);
            terms
                .iter()
                .zip(y)
                .map(|(t, yi)| {
                    let dt = yi - t.delay;
                    let u = t.work / dt;
                    let obj = t.weight * (u.exp_m1() - u * u.exp()) / scale;
                    let act = (h[t.server] + nu_c[t.server] / rho_c).max(0.0);
                    obj - rho_c * act * t.work / (dt * dt)
                })
                .collect::<Vec<_>>()
        };
        y = projected_gradient(&phi, &grad, &groups, budgets, &lb, y, 20_000);
        let h = load(&y);
        let viol = (0..caps.len()).filter(|&m| used[m]).map(|m| h[m].max(0.0)).fold(0.0, f64::max);
        for m in 0..caps.len() {
            nu[m] = (nu[m] + rho * h[m]).max(0.0);
        }
        if viol <= 1e-13 && last_viol <= 1e-12 {
            break;
        }
        if viol > 0.25 * last_viol {
            rho *= 10.0;
        }
        last_viol = viol;
    }
    let viol = load(&y).iter().zip(&used).filter(|(_, u)| **u).map(|(h, _)| h.max(0.0)).fold(0.0, f64::max);
    (raw(&y), viol)
}

/// Normalized cost of one request evaluated from the model formulas.
pub struct MicroEval<'a> {
    pub scenario: &'a Scenario,
}

impl MicroEval<'_> {
    fn price(&self, f: f64) -> f64 {
        let p = &self.scenario.price;
        (-p.eta).exp() * (f / p.f_ref_hz).exp_m1() * p.vartheta * p.f_ref_hz
    }

    /// Stage cycles of a request.
    pub fn cycles(&self, r: RequestRef) -> Vec<f64> {
        let u = self.scenario.mu(r.mu);
        let q = self.scenario.request(r);
        q.chain.iter().map(|s| q.data_fraction * u.total_input_bits * s.xi * s.cycles_per_bit).collect()
    }

    /// Local energy over the energy budget at clocks `f`.
    pub fn local_term(&self, r: RequestRef, f: &[f64]) -> f64 {
        let u = self.scenario.mu(r.mu);
        let q = self.scenario.request(r);
        let e: f64 = q
            .chain
            .iter()
            .zip(f)
            .map(|(s, fi)| q.data_fraction * s.xi * u.total_input_bits * u.kappa * fi * fi)
            .sum();
        e / u.energy_budget_j
    }

    /// Weighted transmit energy plus weighted compute cost.
    pub fn offload_term(&self, r: RequestRef, f: &[f64]) -> f64 {
        let u = self.scenario.mu(r.mu);
        let w = &self.scenario.weights;
        let up = uplink_quote(self.scenario, r).unwrap();
        let cost: f64 = self.cycles(r).iter().zip(f).map(|(c, fi)| self.price(*fi) * c / fi).sum();
        w.theta_tx * up.energy_j / u.energy_budget_j + w.theta_cp * cost / u.compute_budget
    }
}

/// Splits a time budget between one or two stages: share `s` of the time to
/// the first stage.
fn split(cycles: &[f64], time: f64, s: f64) -> Option<Vec<f64>> {
    if time <= 0.0 {
        return None;
    }
    match cycles.len() {
        1 => Some(vec![cycles[0] / time]),
        2 => Some(vec![cycles[0] / (time * s), cycles[1] / (time * (1.0 - s))]),
        _ => None,
    }
}

/// Exhaustive optimum of a micro-instance: one user, every offload pattern,
/// every placement over the servers, and the time split of each two-stage
/// request on a 5-level grid refined around the incumbent. Returns `None`
/// when no combination is feasible.
pub fn brute_force_micro(scenario: &Scenario) -> Option<f64> {
    let ev = MicroEval { scenario };
    let reqs: Vec<RequestRef> = scenario.requests().collect();
    let n_srv = scenario.graph.len();
    let user = scenario.mu(0);
    let home = scenario.home_server(0);
    let hop = |a: usize, b: usize| if a == b { Some(0.0) } else { scenario.graph.setup_delay(a, b) };
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << reqs.len()) {
        let offl: Vec<bool> = (0..reqs.len()).map(|i| mask >> i & 1 == 1).collect();
        // every host vector for every offloaded request
        let mut placements: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for (i, &r) in reqs.iter().enumerate() {
            let len = scenario.request(r).chain.len();
            let opts: Vec<Vec<usize>> = if offl[i] {
                (0..n_srv.pow(len as u32))
                    .map(|mut code| {
                        (0..len)
                            .map(|_| {
                                let h = code % n_srv;
                                code /= n_srv;
                                h
                            })
                            .collect()
                    })
                    .collect()
            } else {
                vec![Vec::new()]
            };
            placements = placements
                .into_iter()
                .flat_map(|p| opts.iter().map(move |o| {
                    let mut q = p.clone();
                    q.push(o.clone());
                    q
                }))
                .collect();
        }
        for hosts in placements {
            // time available for computation, per request
            let mut times = Vec::new();
            let mut ok = true;
            for (i, &r) in reqs.iter().enumerate() {
                if offl[i] {
                    let h = &hosts[i];
                    let lib = h.iter().zip(&scenario.request(r).chain).all(|(&m, st)| scenario.graph.supports(m, st.function));
                    let mut prev = home;
                    let mut backhaul = 0.0;
                    for &m in h {
                        match hop(prev, m) {
                            Some(d) => backhaul += d,
                            None => ok = false,
                        }
                        prev = m;
                    }
                    let up = uplink_quote(scenario, r).unwrap();
                    ok &= lib;
                    times.push(user.deadline_s - up.delay_s - backhaul);
                } else {
                    times.push(user.deadline_s);
                }
            }
            if !ok || times.iter().any(|t| *t <= 0.0) {
                continue;
            }
            let eval = |shares: &[f64]| -> f64 {
                let mut z = 0.0;
                let mut local = 0.0;
                let mut load = vec![0.0; n_srv];
                for (i, &r) in reqs.iter().enumerate() {
                    let Some(f) = split(&ev.cycles(r), times[i], shares[i]) else { return f64::INFINITY };
                    if offl[i] {
                        for (m, fi) in hosts[i].iter().zip(&f) {
                            load[*m] += fi;
                        }
                        z += ev.offload_term(r, &f);
                    } else {
                        local += f.iter().sum::<f64>();
                        z += ev.local_term(r, &f);
                    }
                }
                let fits = local <= user.max_clock_hz
                    && load.iter().enumerate().all(|(m, l)| *l <= scenario.graph.server(m).capacity_hz);
                if fits { z } else { f64::INFINITY }
            };
            // grid over the split of each two-stage request, refined around the best point
            let dims: Vec<usize> = (0..reqs.len()).filter(|&i| scenario.request(reqs[i]).chain.len() == 2).collect();
            let mut center = vec![0.5; reqs.len()];
            let mut width = 0.8;
            let mut local_best = f64::INFINITY;
            for _ in 0..40 {
                let levels: Vec<f64> = (0..5).map(|k| (k as f64 / 4.0 - 0.5) * width).collect();
                let mut best_here = (local_best, center.clone());
                let combos = 5usize.pow(dims.len() as u32);
                for code in 0..combos {
                    let mut s = center.clone();
                    let mut c = code;
                    for &d in &dims {
                        s[d] = (center[d] + levels[c % 5]).clamp(1e-6, 1.0 - 1e-6);
                        c /= 5;
                    }
                    let z = eval(&s);
                    if z < best_here.0 {
                        best_here = (z, s);
                    }
                }
                local_best = best_here.0;
                center = best_here.1;
                width *= 0.6;
                if dims.is_empty() {
                    break;
                }
            }
            best = best.min(local_best);
        }
    }
    best.is_finite().then_some(best)
}

/// One user, two requests, one edge and one core server: small enough to
/// enumerate. Capacities and budgets vary with the seed so that offloading,
/// placement and capacity all matter in some instances.
pub fn micro_config(seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    let pick = |k: u64, xs: &[f64]| xs[((seed / k) % xs.len() as u64) as usize];
    cfg.cells.count = 1;
    cfg.radio.sir_cap = Some(pick(1, &[200.0, 1000.0, 5000.0]));
    cfg.mus_per_cell = 1;
    cfg.requests_per_mu = 2;
    cfg.chain.function_types = 3;
    cfg.chain.min_length = 1;
    cfg.chain.max_length = 2;
    cfg.chain.length_weights = None;
    cfg.mu.clock_choices_ghz = vec![pick(3, &[0.1, 0.2, 0.4])];
    cfg.topology.edge_capacities_ghz = vec![pick(7, &[0.15, 0.3, 0.6])];
    cfg.topology.core_capacities_ghz = vec![pick(11, &[0.3, 0.8])];
    cfg.budgets.compute = pick(5, &[0.035, 0.35, 3.5]);
    cfg
}
