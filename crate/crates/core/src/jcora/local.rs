use crate::error::{ModelError, Result};
use crate::numerics::{solve_knapsack, KnapsackItem};
use crate::scenario::{MobileUser, ServiceRequest};

/// Energy-optimal local clocks that meet the deadline exactly.
///
/// Stationarity of the energy Lagrangian gives `f_l ∝ c_l^(1/3)` and the tight
/// delay constraint fixes the scale:
///
/// ```text
/// f_l = c_l^(1/3) * zeta * u * (sum_j xi_j c_j^(2/3)) / T
/// ```
///
/// A variant with an extra energy-budget factor and exponents
/// `c^(4/3) * sum c^(-1/3)` does not satisfy the delay constraint.
pub fn local_allocation(user: &MobileUser, request: &ServiceRequest) -> Result<Vec<f64>> {
    if request.chain.is_empty() {
        return Err(ModelError::EmptyChain);
    }
    if !(user.deadline_s > 0.0) {
        return Err(ModelError::Config(format!("deadline {} s is not positive", user.deadline_s)));
    }
    let bits = request.input_bits(user.total_input_bits);
    if request.chain.len() == 1 {
        let s = request.chain[0];
        return Ok(vec![bits * s.xi * s.cycles_per_bit / user.deadline_s]);
    }
    let weight: f64 = request.chain.iter().map(|s| s.xi * s.cycles_per_bit.powf(2.0 / 3.0)).sum();
    Ok(request
        .chain
        .iter()
        .map(|s| s.cycles_per_bit.cbrt() * bits * weight / user.deadline_s)
        .collect())
}

/// Chooses which requests stay local.
///
/// `sizes[i]` is the total local clock demand of request `i`. The selection
/// maximizes the number of local requests within the user's clock capacity;
/// among equal counts smaller demands win. Requests marked not offloadable
/// are worth more than every offloadable one together, so they are kept local
/// whenever they fit. Returns one offload flag per request.
pub fn split_local_offload(user: &MobileUser, sizes: &[f64], offloadable: &[bool]) -> Vec<bool> {
    debug_assert_eq!(sizes.len(), offloadable.len());
    let heavy = (sizes.len() + 1) as f64;
    let items: Vec<KnapsackItem<f64>> = sizes
        .iter()
        .zip(offloadable)
        .enumerate()
        .map(|(i, (&s, &o))| KnapsackItem::new(i, if o { 1.0 } else { heavy }, s))
        .collect();
    // stay strictly inside the capacity so re-summing in another order cannot overshoot
    let keep = solve_knapsack(&items, user.max_clock_hz * (1.0 - 1e-12));
    (0..sizes.len()).map(|i| keep.binary_search(&i).is_err()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::local_exec;
    use crate::scenario::{generate_scenario, ChainStage, ScenarioConfig};

    fn user() -> MobileUser {
        let mut u = generate_scenario(&ScenarioConfig::default(), 1).unwrap().mus[0].clone();
        u.deadline_s = 0.8;
        u.total_input_bits = 0.8e6;
        u
    }

    fn request(cs: &[f64]) -> ServiceRequest {
        ServiceRequest {
            data_fraction: 1.0,
            chain: cs
                .iter()
                .enumerate()
                .map(|(i, &c)| ChainStage { function: i, xi: 1.0, cycles_per_bit: c })
                .collect(),
        }
    }

    #[test]
    fn two_function_example() {
        let u = user();
        let r = request(&[250.0, 500.0]);
        let f = local_allocation(&u, &r).unwrap();
        assert!((f[0] - 0.64685e9).abs() < 1e5, "{f:?}");
        assert!((f[1] - 0.81498e9).abs() < 1e5, "{f:?}");
        let d0 = 0.8e6 * 250.0 / f[0];
        let d1 = 0.8e6 * 500.0 / f[1];
        assert!((d0 - 0.3092).abs() < 1e-4 && (d1 - 0.4908).abs() < 1e-4);
        let q = local_exec(&r, &u, &f).unwrap();
        assert!((q.delay_s - 0.8).abs() < 1e-12);
    }

    #[test]
    fn single_function_and_homogeneity() {
        let mut u = user();
        let r = request(&[300.0]);
        assert_eq!(local_allocation(&u, &r).unwrap(), vec![0.8e6 * 300.0 / 0.8]);
        let r = request(&[210.0, 330.0, 480.0]);
        let f1 = local_allocation(&u, &r).unwrap();
        u.deadline_s *= 2.0;
        let f2 = local_allocation(&u, &r).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert!((a / b - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_chain_rejected() {
        assert!(matches!(local_allocation(&user(), &request(&[])), Err(ModelError::EmptyChain)));
    }

    #[test]
    fn split_extremes() {
        let mut u = user();
        u.max_clock_hz = 1e12;
        assert_eq!(split_local_offload(&u, &[1e8, 2e8, 3e8], &[true; 3]), vec![false; 3]);
        u.max_clock_hz = 0.0;
        assert_eq!(split_local_offload(&u, &[1e8, 2e8, 3e8], &[true; 3]), vec![true; 3]);
        u.max_clock_hz = 3.5e8;
        // count-maximal: the two smallest
        assert_eq!(split_local_offload(&u, &[3e8, 1e8, 2e8], &[true; 3]), vec![true, false, false]);
        // a request that cannot be offloaded is kept local first
        assert_eq!(split_local_offload(&u, &[3e8, 1e8, 2e8], &[false, true, true]), vec![false, true, true]);
    }
}
