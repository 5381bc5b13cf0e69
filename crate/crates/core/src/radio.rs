//! Uplink model: SIR in the many-antenna limit, Shannon rate, transmit delay and energy.
//!
//! The interferers of user `k` in cell `s` are the users with the same index
//! `k` in every other cell. With channel gain `r^-gamma`,
//!
//! ```text
//! SIR = 1 / sum_{q != s} (r_sks / r_qks)^(2 gamma)
//! ```
//!
//! where `r_qks` is the distance from the co-channel user in cell `q` to base
//! station `s`. There is no noise term.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::scenario::{RequestRef, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkQuote {
    pub sir: f64,
    pub rate_bps: f64,
    pub delay_s: f64,
    pub energy_j: f64,
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// SIR of user `mu` at its own base station.
pub fn compute_sir(scenario: &Scenario, mu: usize) -> Result<f64> {
    let user = scenario.mu(mu);
    let bs = scenario.cell_of(mu).position;
    let own = distance(user.position, bs);
    let exponent = 2.0 * scenario.pathloss_exponent;
    let mut interference = 0.0;
    let mut peers = 0;
    for (q, cell) in scenario.cells.iter().enumerate() {
        if q == user.cell {
            continue;
        }
        if let Some(&peer) = cell.mus.iter().find(|&&m| scenario.mus[m].index == user.index) {
            let d = distance(scenario.mus[peer].position, bs);
            // (own / d)^(2 gamma), in log space to stay finite for extreme ratios
            interference += (exponent * (own.ln() - d.ln())).exp();
            peers += 1;
        }
    }
    let sir = if peers == 0 {
        scenario.sir_cap.ok_or(ModelError::SirUndefined { mu })?
    } else {
        1.0 / interference
    };
    Ok(match scenario.sir_cap {
        Some(cap) => sir.min(cap),
        None => sir,
    })
}

/// Shannon rate `W log2(1 + sir)`.
pub fn rate(bandwidth_hz: f64, sir: f64) -> f64 {
    bandwidth_hz * sir.ln_1p() / std::f64::consts::LN_2
}

/// Uplink delay and energy for sending `bits` at `rate_bps` with `power_w`.
pub fn quote_from_rate(sir: f64, rate_bps: f64, bits: f64, power_w: f64) -> UplinkQuote {
    let delay_s = if bits == 0.0 { 0.0 } else { bits / rate_bps };
    UplinkQuote { sir, rate_bps, delay_s, energy_j: power_w * delay_s }
}

pub fn uplink_quote(scenario: &Scenario, r: RequestRef) -> Result<UplinkQuote> {
    let sir = compute_sir(scenario, r.mu)?;
    let user = scenario.mu(r.mu);
    let bits = scenario.request(r).input_bits(user.total_input_bits);
    let rate_bps = rate(scenario.cell_of(r.mu).bandwidth_hz, sir);
    Ok(quote_from_rate(sir, rate_bps, bits, user.tx_power_w))
}

/// Uplink quotes for every request, indexed `[mu][req]`.
pub fn uplink_table(scenario: &Scenario) -> Result<Vec<Vec<UplinkQuote>>> {
    scenario
        .mus
        .iter()
        .enumerate()
        .map(|(mu, m)| {
            (0..m.requests.len())
                .map(|req| uplink_quote(scenario, RequestRef { mu, req }))
                .collect()
        })
        .collect()
}
