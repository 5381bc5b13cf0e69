use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::numerics::{find_root, lambert_w0};
use crate::radio::UplinkQuote;
use crate::scenario::{MobileUser, PriceParams, ServiceRequest};

/// Pre-placement estimate of the remote clocks of one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteEstimate {
    pub clocks_hz: Vec<f64>,
    /// Multiplier of the per-request delay constraint.
    pub multiplier: f64,
    /// Time left for remote computation.
    pub slack_s: f64,
}

impl RemoteEstimate {
    pub fn total_clock_hz(&self) -> f64 {
        self.clocks_hz.iter().sum()
    }
}

/// Clock (in units of `f_ref`) that minimizes normalized compute cost for a
/// scaled multiplier `m = budget * mu / (e^-eta vartheta f_ref)`:
/// `x = W0((m - 1) / e) + 1`.
pub fn clock_for_multiplier(m: f64) -> Result<f64> {
    Ok(lambert_w0((m - 1.0) / std::f64::consts::E)? + 1.0)
}

/// Estimates the remote clocks of a request before it is placed.
///
/// Minimizing `sum C_l / budget` subject to `sum cycles_l / f_l = slack`
/// gives the same clock for every stage, expressed through Lambert W in the
/// delay multiplier. The multiplier is found by root search on the delay
/// residual; single-stage requests are solved directly. `hop_budget_s` is
/// the backhaul delay reserved for the whole chain.
pub fn estimate_remote_alloc(
    user: &MobileUser,
    request: &ServiceRequest,
    price: &PriceParams,
    uplink: &UplinkQuote,
    hop_budget_s: f64,
) -> Result<RemoteEstimate> {
    if request.chain.is_empty() {
        return Err(ModelError::EmptyChain);
    }
    let slack = user.deadline_s - uplink.delay_s - hop_budget_s;
    if !(slack > 0.0) {
        return Err(ModelError::NoOffloadSlack { slack });
    }
    let cycles: Vec<f64> = request.stage_cycles(user.total_input_bits).collect();
    let total: f64 = cycles.iter().sum();
    let k = (-price.eta).exp() * price.vartheta * price.f_ref_hz;
    let to_multiplier = |m: f64| m * k / user.compute_budget;
    if total == 0.0 {
        return Ok(RemoteEstimate { clocks_hz: vec![0.0; cycles.len()], multiplier: 0.0, slack_s: slack });
    }
    if cycles.len() == 1 {
        let f = total / slack;
        let x = f / price.f_ref_hz;
        // invert x = W0((m - 1)/e) + 1
        let m = (x - 1.0) * x.exp() + 1.0;
        return Ok(RemoteEstimate { clocks_hz: vec![f], multiplier: to_multiplier(m), slack_s: slack });
    }
    let residual = |m: f64| match clock_for_multiplier(m) {
        Ok(x) if x > 0.0 => total / (x * price.f_ref_hz) - slack,
        _ => f64::INFINITY,
    };
    let mut hi = 1.0;
    while residual(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(ModelError::NoOffloadSlack { slack });
        }
    }
    let m = find_root(residual, 0.0, hi, 1e-13)?;
    let x = clock_for_multiplier(m)?;
    Ok(RemoteEstimate {
        clocks_hz: vec![x * price.f_ref_hz; cycles.len()],
        multiplier: to_multiplier(m),
        slack_s: slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, ScenarioConfig};

    fn quote(delay: f64) -> UplinkQuote {
        UplinkQuote { sir: 1.0, rate_bps: 1e6, delay_s: delay, energy_j: 0.0 }
    }

    #[test]
    fn single_stage_is_direct() {
        let s = generate_scenario(&ScenarioConfig::default(), 2).unwrap();
        let (u, r) = s
            .mus
            .iter()
            .find_map(|u| u.requests.iter().find(|r| r.chain.len() == 1).map(|r| (u, r)))
            .unwrap();
        let e = estimate_remote_alloc(u, r, &s.price, &quote(0.1), 0.01).unwrap();
        let cycles: f64 = r.stage_cycles(u.total_input_bits).sum();
        assert!((e.clocks_hz[0] - cycles / (u.deadline_s - 0.11)).abs() < 1e-3);
        assert!(e.multiplier > 0.0);
    }

    #[test]
    fn multi_stage_back_substitution() {
        let s = generate_scenario(&ScenarioConfig::default(), 2).unwrap();
        let mut checked = 0;
        for u in &s.mus {
            for r in u.requests.iter().filter(|r| r.chain.len() > 1) {
                let hop = 0.01 * r.chain.len() as f64;
                let e = estimate_remote_alloc(u, r, &s.price, &quote(0.05), hop).unwrap();
                let delay: f64 = r.stage_cycles(u.total_input_bits).zip(&e.clocks_hz).map(|(c, f)| c / f).sum();
                assert!((delay - (u.deadline_s - 0.05 - hop)).abs() <= 1e-9);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn no_slack_is_rejected() {
        let s = generate_scenario(&ScenarioConfig::default(), 2).unwrap();
        let u = &s.mus[0];
        let r = &u.requests[0];
        assert!(matches!(
            estimate_remote_alloc(u, r, &s.price, &quote(u.deadline_s - 0.02), 0.03),
            Err(ModelError::NoOffloadSlack { .. })
        ));
    }
}
