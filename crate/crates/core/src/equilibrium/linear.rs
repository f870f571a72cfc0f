//! Closed-form equilibrium for the identity inner transform: consumption is
//! `F(c)` times Katz-Bonacich centrality, so under the uncorrelated
//! assumption outcomes do not depend on the network at all.

use serde::Serialize;

use crate::equilibrium::{equilibrium_utility, foc_residual, EquilibriumResult, SolveMethod};
use crate::error::{Error, Result};
use crate::net::{bonacich, uncorrelated_centrality, ReferenceProfile, WeightedNetwork};
use crate::utility::EquilibriumParams;

fn positive_gain(params: &EquilibriumParams) -> Result<f64> {
    let gain = params.utility.sub.inv_deriv(params.cost);
    if !gain.is_finite() || gain <= 0.0 {
        return Err(Error::Parameter(format!(
            "F(c) = {gain} at c = {}; the equilibrium gain must be positive",
            params.cost
        )));
    }
    Ok(gain)
}

/// Solves the game in closed form: `x_i = F(c) C_b_i`,
/// `u_i = f(F(c)) - c x_i + b alpha_i`. Requires the identity inner
/// transform.
pub fn solve_linear(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
) -> Result<EquilibriumResult> {
    if !params.utility.inner.is_identity() {
        return Err(Error::Parameter(
            "closed form requires the identity inner transform; use solve_nonlinear".into(),
        ));
    }
    let gain = positive_gain(params)?;
    let centrality = bonacich(net, prof)?;
    let consumption: Vec<f64> = centrality.centrality.iter().map(|c| gain * c).collect();
    let utility = equilibrium_utility(prof, params, &consumption);
    let residual_norm = foc_residual(net, prof, params, &consumption);
    Ok(EquilibriumResult {
        consumption,
        utility,
        centrality,
        method: SolveMethod::ClosedForm,
        iterations: 0,
        residual_norm,
    })
}

/// Network-free fast path: consumption per agent under the uncorrelated
/// assumption, `F(c) (1 + alpha_i / (1 - alpha_bar))`.
pub fn consumption_uncorrelated(alpha: &[f64], params: &EquilibriumParams) -> Result<Vec<f64>> {
    let gain = positive_gain(params)?;
    let centrality = uncorrelated_centrality(alpha)?;
    Ok(centrality.iter().map(|c| gain * c).collect())
}

/// Number of grid points used for the empirical CDF comparisons.
pub const DOMINANCE_GRID: usize = 512;

/// Empirical-CDF comparison of equilibrium consumption generated by two
/// samples of reference strengths. `a_over_b` means sample A's consumption
/// distribution dominates sample B's.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub grid: Vec<f64>,
    pub cdf_a: Vec<f64>,
    pub cdf_b: Vec<f64>,
    pub fosd_a_over_b: bool,
    pub fosd_b_over_a: bool,
    pub sosd_a_over_b: bool,
    pub sosd_b_over_a: bool,
}

fn empirical_cdf(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&t| sorted.partition_point(|&x| x <= t) as f64 / n)
        .collect()
}

/// Integrated CDF at each grid point, computed exactly from the sorted
/// sample as the expected shortfall `E[(t - X)^+]`.
fn integrated_cdf(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    for &x in sorted {
        prefix.push(prefix.last().unwrap() + x);
    }
    grid.iter()
        .map(|&t| {
            let k = sorted.partition_point(|&x| x <= t);
            (k as f64 * t - prefix[k]) / n
        })
        .collect()
}

const DOMINANCE_TOL: f64 = 1e-9;

fn dominates(lower: &[f64], upper: &[f64]) -> bool {
    lower.iter().zip(upper).all(|(l, u)| *l <= u + DOMINANCE_TOL)
}

/// First- and second-order stochastic dominance verdicts for equilibrium
/// consumption under two reference-strength samples, computed on a shared
/// 512-point grid over the pooled support. Both samples must have mean
/// strength below one.
pub fn stochastic_dominance_check(
    alpha_samples_a: &[f64],
    alpha_samples_b: &[f64],
    params: &EquilibriumParams,
) -> Result<DominanceReport> {
    let mut x_a = consumption_uncorrelated(alpha_samples_a, params)?;
    let mut x_b = consumption_uncorrelated(alpha_samples_b, params)?;
    x_a.sort_by(|p, q| p.total_cmp(q));
    x_b.sort_by(|p, q| p.total_cmp(q));

    let lo = x_a[0].min(x_b[0]);
    let hi = x_a[x_a.len() - 1].max(x_b[x_b.len() - 1]);
    let span = (hi - lo).max(f64::EPSILON);
    let grid: Vec<f64> = (0..DOMINANCE_GRID)
        .map(|k| lo + span * k as f64 / (DOMINANCE_GRID - 1) as f64)
        .collect();

    let cdf_a = empirical_cdf(&x_a, &grid);
    let cdf_b = empirical_cdf(&x_b, &grid);
    let int_a = integrated_cdf(&x_a, &grid);
    let int_b = integrated_cdf(&x_b, &grid);

    Ok(DominanceReport {
        // A dominates B when A's CDF sits below B's everywhere.
        fosd_a_over_b: dominates(&cdf_a, &cdf_b),
        fosd_b_over_a: dominates(&cdf_b, &cdf_a),
        sosd_a_over_b: dominates(&int_a, &int_b),
        sosd_b_over_a: dominates(&int_b, &int_a),
        grid,
        cdf_a,
        cdf_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::erdos_renyi_row_normalized;
    use crate::utility::{SubUtility, UtilitySpec};
    use approx::assert_abs_diff_eq;

    fn sqrt_params() -> EquilibriumParams {
        EquilibriumParams::new(1.0, 0.0, UtilitySpec::linear(SubUtility::scaled_sqrt())).unwrap()
    }

    #[test]
    fn constant_half_alpha_consumes_two() {
        // F(1) = 1 under f(z) = 2 sqrt(z), and C_b = 2 at alpha = 0.5.
        let (net, _) = erdos_renyi_row_normalized(10, 0.4, 3).unwrap();
        let prof = ReferenceProfile::constant(10, 0.5).unwrap();
        let res = solve_linear(&net, &prof, &sqrt_params()).unwrap();
        for x in &res.consumption {
            assert_abs_diff_eq!(*x, 2.0, epsilon = 1e-10);
        }
        assert!(res.residual_norm < 1e-8);
    }

    #[test]
    fn zero_alpha_is_isolated_optimum() {
        let (net, _) = erdos_renyi_row_normalized(6, 0.5, 4).unwrap();
        let prof = ReferenceProfile::constant(6, 0.0).unwrap();
        let params = sqrt_params();
        let res = solve_linear(&net, &prof, &params).unwrap();
        let gain = params.utility.sub.inv_deriv(params.cost);
        for (x, u) in res.consumption.iter().zip(&res.utility) {
            assert_abs_diff_eq!(*x, gain, epsilon = 1e-12);
            let expected_u = params.utility.sub.value(gain) - params.cost * gain;
            assert_abs_diff_eq!(*u, expected_u, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_alpha_outcomes_ignore_rewiring() {
        let prof = ReferenceProfile::constant(20, 0.35).unwrap();
        let params = sqrt_params();
        let mut previous: Option<EquilibriumResult> = None;
        for seed in 0..10 {
            let (net, _) = erdos_renyi_row_normalized(20, 0.3, 500 + seed).unwrap();
            let res = solve_linear(&net, &prof, &params).unwrap();
            if let Some(prev) = &previous {
                for i in 0..20 {
                    assert_abs_diff_eq!(res.consumption[i], prev.consumption[i], epsilon = 1e-9);
                    assert_abs_diff_eq!(res.utility[i], prev.utility[i], epsilon = 1e-9);
                }
            }
            previous = Some(res);
        }
    }

    #[test]
    fn consumption_above_reference() {
        let (net, _) = erdos_renyi_row_normalized(15, 0.3, 11).unwrap();
        let alpha: Vec<f64> = (0..15).map(|i| 0.1 + 0.05 * (i % 10) as f64).collect();
        let prof = ReferenceProfile::new(alpha).unwrap();
        let res = solve_linear(&net, &prof, &sqrt_params()).unwrap();
        for i in 0..15 {
            let reference = prof.alpha()[i] * net.row_dot(i, &res.consumption);
            assert!(res.consumption[i] > reference);
        }
    }

    #[test]
    fn own_alpha_is_strictly_beneficial_to_consumption() {
        // finite-difference check on the uncorrelated closed form
        let params = sqrt_params();
        let alpha = vec![0.3, 0.5, 0.7];
        let base = consumption_uncorrelated(&alpha, &params).unwrap();
        let mut bumped_alpha = alpha.clone();
        bumped_alpha[1] += 1e-6;
        let bumped = consumption_uncorrelated(&bumped_alpha, &params).unwrap();
        assert!(bumped[1] > base[1]);
    }

    #[test]
    fn fosd_detects_entrywise_shift() {
        let params = sqrt_params();
        let a: Vec<f64> = (0..200).map(|i| 0.2 + 0.003 * i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.1).collect();
        let report = stochastic_dominance_check(&a, &b, &params).unwrap();
        assert!(report.fosd_b_over_a);
        assert!(!report.fosd_a_over_b);
        // FOSD implies SOSD
        assert!(report.sosd_b_over_a);
    }

    #[test]
    fn identical_samples_weakly_dominate_both_ways() {
        let params = sqrt_params();
        let a = vec![0.2, 0.4, 0.6, 0.3];
        let report = stochastic_dominance_check(&a, &a, &params).unwrap();
        assert!(report.fosd_a_over_b && report.fosd_b_over_a);
        assert!(report.sosd_a_over_b && report.sosd_b_over_a);
    }

    #[test]
    fn mean_preserving_spread_is_sosd_dominated() {
        let params = sqrt_params();
        // B concentrated at 0.5; A is a symmetric spread around 0.5.
        let b = vec![0.5; 400];
        let a: Vec<f64> = (0..200)
            .flat_map(|i| {
                let eps = 0.2 * (i as f64 + 0.5) / 200.0;
                [0.5 - eps, 0.5 + eps]
            })
            .collect();
        let report = stochastic_dominance_check(&a, &b, &params).unwrap();
        assert!(report.sosd_b_over_a, "degenerate sample should SOSD-dominate its spread");
        assert!(!report.fosd_b_over_a);
        assert!(!report.fosd_a_over_b);
    }

    #[test]
    fn dominance_rejects_infeasible_means() {
        let params = sqrt_params();
        let a = vec![0.5, 0.5];
        let b = vec![1.2, 0.9];
        assert!(stochastic_dominance_check(&a, &b, &params).is_err());
    }
}
