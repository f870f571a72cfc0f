//! Portfolio allocation under social comparisons: each agent splits wealth
//! between a risk-free asset and equity, and her effective wealth
//! `z_i = w r_f (1 - alpha_i) + w r_p (lambda_i - alpha_i sum_j g_ij lambda_j)`
//! nets out the comparison terms. Quadratic utility admits a closed form in
//! the network resolvent; general utilities are solved as a fixed point of
//! the simultaneous first-order conditions `E[r_p f'(z_i)] = 0`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::net::{bonacich, ReferenceProfile, WeightedNetwork};
use crate::solvers::bracketed_root;
use crate::utility::SubUtility;

/// Two-asset allocation problem on a comparison network. Equity returns are
/// a finite discrete distribution, so expectations are exact sums.
#[derive(Debug, Clone)]
pub struct PortfolioProblem {
    pub wealth: f64,
    pub risk_free: f64,
    /// Equity gross-return support as `(return, probability)` pairs.
    pub returns: Vec<(f64, f64)>,
    pub utility: SubUtility,
    pub net: WeightedNetwork,
    pub prof: ReferenceProfile,
}

impl PortfolioProblem {
    pub fn new(
        wealth: f64,
        risk_free: f64,
        returns: Vec<(f64, f64)>,
        utility: SubUtility,
        net: WeightedNetwork,
        prof: ReferenceProfile,
    ) -> Result<Self> {
        if !(wealth > 0.0) {
            return Err(Error::Parameter(format!("wealth {wealth} must be positive")));
        }
        if !(risk_free > 0.0) {
            return Err(Error::Parameter(format!("gross risk-free return {risk_free} must be positive")));
        }
        if net.n() != prof.n() {
            return Err(Error::InvalidInput(format!(
                "network has {} agents but profile has {}",
                net.n(),
                prof.n()
            )));
        }
        if returns.len() < 2 {
            return Err(Error::Parameter("need at least two return states".into()));
        }
        let mass: f64 = returns.iter().map(|(_, p)| p).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("return probabilities sum to {mass}, expected 1")));
        }
        if returns.iter().any(|(r, p)| !r.is_finite() || *p < 0.0) {
            return Err(Error::Parameter("returns must be finite with nonnegative probabilities".into()));
        }
        let mean: f64 = returns.iter().map(|(r, p)| r * p).sum();
        if mean <= risk_free {
            return Err(Error::Parameter(format!(
                "expected equity return {mean} must exceed the risk-free return {risk_free}"
            )));
        }
        if !returns.iter().any(|(r, p)| *p > 0.0 && *r < risk_free) {
            return Err(Error::Parameter(
                "some state must have a negative equity premium, otherwise equity dominates".into(),
            ));
        }
        Ok(Self { wealth, risk_free, returns, utility, net, prof })
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    fn premium_moments(&self) -> (f64, f64) {
        let m1 = self.returns.iter().map(|(r, p)| (r - self.risk_free) * p).sum();
        let m2 = self
            .returns
            .iter()
            .map(|(r, p)| (r - self.risk_free) * (r - self.risk_free) * p)
            .sum();
        (m1, m2)
    }

    /// Effective wealth of agent `i` in a given return state.
    pub fn effective_wealth(&self, i: usize, lambdas: &[f64], premium: f64) -> f64 {
        let a = self.prof.alpha()[i];
        let reference = self.net.row_dot(i, lambdas);
        self.wealth * self.risk_free * (1.0 - a)
            + self.wealth * premium * (lambdas[i] - a * reference)
    }

    /// Per-agent residual of the allocation first-order condition
    /// `E[r_p f'(z_i)]`.
    pub fn allocation_residuals(&self, lambdas: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                self.returns
                    .iter()
                    .map(|(r, p)| {
                        let rp = r - self.risk_free;
                        p * rp * self.utility.deriv(self.effective_wealth(i, lambdas, rp))
                    })
                    .sum()
            })
            .collect()
    }
}

/// Quadratic coefficients `a0 + a1 z + a2 z^2` with `a1 > 0`, `a2 < 0`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl QuadraticParams {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0) || !(a2 < 0.0) {
            return Err(Error::Parameter(format!(
                "quadratic utility needs a1 > 0 and a2 < 0, got a1={a1}, a2={a2}"
            )));
        }
        Ok(Self { a0, a1, a2 })
    }
}

/// Closed-form equity shares under quadratic utility:
/// `lambda* = kappa1 B 1 + kappa2 B alpha` with
/// `kappa1 = (-a1/(2 a2 w) - r_f) E[r_p]/E[r_p^2]`,
/// `kappa2 = r_f E[r_p]/E[r_p^2]`, and `B` the network resolvent.
pub fn lambda_closed_form(problem: &PortfolioProblem, quad: &QuadraticParams) -> Result<Vec<f64>> {
    let (m1, m2) = problem.premium_moments();
    if m2 <= 0.0 {
        return Err(Error::Parameter("degenerate return distribution: E[r_p^2] = 0".into()));
    }
    let ratio = m1 / m2;
    let kappa1 = (-quad.a1 / (2.0 * quad.a2 * problem.wealth) - problem.risk_free) * ratio;
    let kappa2 = problem.risk_free * ratio;
    let centrality = bonacich(&problem.net, &problem.prof)?;
    let alpha_vec = DVector::from_column_slice(problem.prof.alpha());
    let b_alpha = &centrality.resolvent * alpha_vec;
    Ok((0..problem.n())
        .map(|i| kappa1 * centrality.centrality[i] + kappa2 * b_alpha[i])
        .collect())
}

const SWEEP_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 10_000;

/// Admissible open interval for agent `i`'s share given opponents: the
/// range where effective wealth stays inside the utility's domain in every
/// return state. Quadratic utilities are unrestricted.
fn share_bounds(problem: &PortfolioProblem, i: usize, lambdas: &[f64]) -> (f64, f64) {
    match &problem.utility {
        SubUtility::Quadratic { .. } => (-1e6, 1e6),
        _ => {
            // z > 0 in each state bounds lambda on the side the state's
            // premium points to
            let a = problem.prof.alpha()[i];
            let reference = a * problem.net.row_dot(i, lambdas);
            let base = problem.risk_free * (1.0 - a);
            let mut lo = -1e6f64;
            let mut hi = 1e6f64;
            for (r, p) in &problem.returns {
                if *p == 0.0 {
                    continue;
                }
                let rp = r - problem.risk_free;
                if rp > 0.0 {
                    lo = lo.max(reference - base / rp);
                } else if rp < 0.0 {
                    hi = hi.min(reference - base / rp);
                }
            }
            (lo, hi)
        }
    }
}

/// Best-response share for one agent: the root of the strictly decreasing
/// `E[r_p f'(z_i(lambda))]` inside the admissible interval.
fn best_share(problem: &PortfolioProblem, i: usize, lambdas: &[f64]) -> Result<f64> {
    let a = problem.prof.alpha()[i];
    let reference = a * problem.net.row_dot(i, lambdas);
    let base = problem.wealth * problem.risk_free * (1.0 - a);
    let psi = |lambda: f64| -> f64 {
        problem
            .returns
            .iter()
            .map(|(r, p)| {
                let rp = r - problem.risk_free;
                let z = base + problem.wealth * rp * (lambda - reference);
                let d = problem.utility.deriv(z);
                if d.is_nan() {
                    // outside the domain: push the search back inside
                    return if rp > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
                }
                p * rp * d
            })
            .sum()
    };
    let (mut lo, mut hi) = share_bounds(problem, i, lambdas);
    // shrink the open interval until the residual is evaluable
    let mut width = hi - lo;
    let mut psi_lo = psi(lo + 1e-12 * width);
    let mut psi_hi = psi(hi - 1e-12 * width);
    let mut guard = 0;
    while !(psi_lo > 0.0) || !(psi_hi < 0.0) {
        guard += 1;
        if guard > 60 {
            return Err(Error::Infeasible(format!(
                "no interior allocation for agent {i}: residuals ({psi_lo:.3e}, {psi_hi:.3e})"
            )));
        }
        width *= 0.5;
        lo = lo.max(hi - 2.0 * width);
        hi = hi.min(lo + 2.0 * width);
        psi_lo = psi(lo + 1e-12 * width);
        psi_hi = psi(hi - 1e-12 * width);
    }
    // negate to match the increasing-root contract
    let neg = |x: f64| -psi(x);
    Ok(bracketed_root(lo, hi, -psi_lo, -psi_hi, neg, SWEEP_TOL))
}

/// Solves the simultaneous allocation first-order conditions by
/// Gauss-Seidel sweeps over agents. Works for any strictly concave utility;
/// under quadratic utility it agrees with [`lambda_closed_form`].
pub fn solve_allocations(problem: &PortfolioProblem) -> Result<Vec<f64>> {
    let n = problem.n();
    let mut lambdas = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        let mut sup_change = 0.0f64;
        for i in 0..n {
            let updated = best_share(problem, i, &lambdas)?;
            sup_change = sup_change.max((updated - lambdas[i]).abs());
            lambdas[i] = updated;
        }
        if sup_change < SWEEP_TOL * 10.0 {
            return Ok(lambdas);
        }
    }
    Err(Error::Convergence(format!(
        "allocation fixed point not reached in {MAX_SWEEPS} sweeps"
    )))
}

/// Outcome of bumping agent `j`'s reference strength on equity shares.
#[derive(Debug, Clone)]
pub struct DaraStaticReport {
    pub agent: usize,
    pub delta: f64,
    /// Absolute-risk-aversion slope check: true when `-f''/f'` falls as
    /// effective wealth rises.
    pub is_dara: bool,
    pub lambda_base: Vec<f64>,
    pub lambda_bumped: Vec<f64>,
    pub lambda_change: Vec<f64>,
    /// Agents whose allocation sits outside [0, 1] in either solve.
    pub corner: Vec<bool>,
    pub own_strictly_down: bool,
    pub others_weakly_down: bool,
}

/// Numeric slope of absolute risk aversion `-f''/f'` across a wealth range.
fn dara_check(utility: &SubUtility, z_lo: f64, z_hi: f64) -> bool {
    let steps = 8;
    let mut prev: Option<f64> = None;
    for k in 0..=steps {
        let z = z_lo + (z_hi - z_lo) * k as f64 / steps as f64;
        let h = 1e-6 * z.abs().max(1.0);
        let f2 = (utility.deriv(z + h) - utility.deriv(z - h)) / (2.0 * h);
        let ara = -f2 / utility.deriv(z);
        if let Some(p) = prev {
            if ara >= p {
                return false;
            }
        }
        prev = Some(ara);
    }
    true
}

/// Solves the allocation game at `alpha` and with `alpha_j += delta`, and
/// reports whether agent `j` cut equity strictly and everyone else weakly.
/// Under increasing absolute risk aversion (quadratic) the direction
/// reverses; `is_dara` records which case applies.
pub fn dara_comparative_static(
    problem: &PortfolioProblem,
    j: usize,
    delta: f64,
) -> Result<DaraStaticReport> {
    if delta < 0.0 {
        return Err(Error::Parameter("delta must be nonnegative".into()));
    }
    let lambda_base = solve_allocations(problem)?;
    let bumped_prof = problem.prof.with_bumped(j, delta)?;
    let bumped_problem = PortfolioProblem { prof: bumped_prof, ..problem.clone() };
    let lambda_bumped = solve_allocations(&bumped_problem)?;

    let z_probe = problem.wealth * problem.risk_free;
    let is_dara = dara_check(&problem.utility, 0.25 * z_probe, 2.0 * z_probe);

    let lambda_change: Vec<f64> = lambda_bumped
        .iter()
        .zip(&lambda_base)
        .map(|(b, a)| b - a)
        .collect();
    let corner: Vec<bool> = lambda_base
        .iter()
        .zip(&lambda_bumped)
        .map(|(a, b)| !(0.0..=1.0).contains(a) || !(0.0..=1.0).contains(b))
        .collect();
    let own_strictly_down = lambda_change[j] < 0.0;
    let others_weakly_down = lambda_change
        .iter()
        .enumerate()
        .all(|(i, d)| i == j || *d <= 1e-9);

    Ok(DaraStaticReport {
        agent: j,
        delta,
        is_dara,
        lambda_base,
        lambda_bumped,
        lambda_change,
        corner,
        own_strictly_down,
        others_weakly_down,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::erdos_renyi_row_normalized;
    use approx::assert_abs_diff_eq;

    fn small_premium_returns() -> Vec<(f64, f64)> {
        vec![(0.85, 0.3), (1.0, 0.4), (1.2, 0.3)]
    }

    fn quad_problem(n: usize, alpha: f64, seed: u64) -> (PortfolioProblem, QuadraticParams) {
        let (net, _) = erdos_renyi_row_normalized(n, 0.4, seed).unwrap();
        let prof = ReferenceProfile::constant(n, alpha).unwrap();
        let quad = QuadraticParams::new(0.0, 4.0, -1.0).unwrap();
        let problem = PortfolioProblem::new(
            1.0,
            1.0,
            small_premium_returns(),
            SubUtility::quadratic(0.0, 4.0, -1.0).unwrap(),
            net,
            prof,
        )
        .unwrap();
        (problem, quad)
    }

    #[test]
    fn problem_validation_catches_bad_distributions() {
        let (net, _) = erdos_renyi_row_normalized(3, 1.0, 1).unwrap();
        let prof = ReferenceProfile::constant(3, 0.2).unwrap();
        let u = SubUtility::power(0.3).unwrap();
        // probabilities off
        assert!(PortfolioProblem::new(1.0, 1.0, vec![(0.9, 0.5), (1.2, 0.4)], u.clone(), net.clone(), prof.clone()).is_err());
        // no negative-premium state
        assert!(PortfolioProblem::new(1.0, 1.0, vec![(1.1, 0.5), (1.2, 0.5)], u.clone(), net.clone(), prof.clone()).is_err());
        // premium not positive on average
        assert!(PortfolioProblem::new(1.0, 1.0, vec![(0.5, 0.5), (1.2, 0.5)], u, net, prof).is_err());
    }

    #[test]
    fn zero_alpha_matches_single_agent_mean_variance() {
        let (problem, quad) = quad_problem(5, 0.0, 2);
        let lambdas = lambda_closed_form(&problem, &quad).unwrap();
        let (m1, m2) = problem.premium_moments();
        let expected = (-quad.a1 / (2.0 * quad.a2 * problem.wealth) - problem.risk_free) * m1 / m2;
        for l in &lambdas {
            assert_abs_diff_eq!(*l, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_alpha_gives_symmetric_shares() {
        let (problem, quad) = quad_problem(7, 0.45, 3);
        let lambdas = lambda_closed_form(&problem, &quad).unwrap();
        for l in &lambdas {
            assert_abs_diff_eq!(*l, lambdas[0], epsilon = 1e-10);
        }
    }

    #[test]
    fn closed_form_satisfies_the_first_order_conditions() {
        let (net, _) = erdos_renyi_row_normalized(6, 0.5, 9).unwrap();
        let alpha: Vec<f64> = (0..6).map(|i| 0.1 + 0.1 * i as f64).collect();
        let prof = ReferenceProfile::new(alpha).unwrap();
        let quad = QuadraticParams::new(1.0, 5.0, -0.8).unwrap();
        let problem = PortfolioProblem::new(
            2.0,
            1.0,
            small_premium_returns(),
            SubUtility::quadratic(1.0, 5.0, -0.8).unwrap(),
            net,
            prof,
        )
        .unwrap();
        let lambdas = lambda_closed_form(&problem, &quad).unwrap();
        for resid in problem.allocation_residuals(&lambdas) {
            assert!(resid.abs() < 1e-8, "residual {resid}");
        }
    }

    #[test]
    fn sweep_solver_agrees_with_closed_form_under_quadratic() {
        let (problem, quad) = quad_problem(6, 0.3, 5);
        let closed = lambda_closed_form(&problem, &quad).unwrap();
        let swept = solve_allocations(&problem).unwrap();
        for (a, b) in closed.iter().zip(&swept) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
    }

    #[test]
    fn dara_power_utility_cuts_equity_when_comparisons_strengthen() {
        let (net, _) = erdos_renyi_row_normalized(5, 0.6, 21).unwrap();
        let prof = ReferenceProfile::constant(5, 0.3).unwrap();
        let problem = PortfolioProblem::new(
            1.0,
            1.0,
            vec![(0.8, 0.3), (1.0, 0.4), (1.25, 0.3)],
            SubUtility::power(0.3).unwrap(),
            net,
            prof,
        )
        .unwrap();
        let report = dara_comparative_static(&problem, 2, 0.1).unwrap();
        assert!(report.is_dara);
        assert!(report.own_strictly_down, "change {:?}", report.lambda_change);
        assert!(report.others_weakly_down);
        assert!(!report.corner.iter().any(|c| *c), "lambdas {:?}", report.lambda_base);
    }

    #[test]
    fn quadratic_utility_inverts_the_direction() {
        let (problem, _) = quad_problem(5, 0.3, 8);
        let report = dara_comparative_static(&problem, 1, 0.1).unwrap();
        assert!(!report.is_dara);
        assert!(
            report.lambda_change[1] > 0.0,
            "expected inverted response, got {:?}",
            report.lambda_change
        );
    }

    #[test]
    fn zero_delta_changes_nothing() {
        let (problem, _) = quad_problem(4, 0.25, 13);
        let report = dara_comparative_static(&problem, 0, 0.0).unwrap();
        for d in &report.lambda_change {
            assert_abs_diff_eq!(*d, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn golden_section_oracle_matches_closed_form() {
        // derivative-free maximizer of E[f(z_i)] agent by agent at the
        // closed-form point
        let (problem, quad) = quad_problem(6, 0.4, 30);
        let lambdas = lambda_closed_form(&problem, &quad).unwrap();
        for i in 0..problem.n() {
            let objective = |li: f64| -> f64 {
                problem
                    .returns
                    .iter()
                    .map(|(r, p)| {
                        let rp = r - problem.risk_free;
                        let mut trial = lambdas.clone();
                        trial[i] = li;
                        p * problem.utility.value(problem.effective_wealth(i, &trial, rp))
                    })
                    .sum()
            };
            let mut lo = lambdas[i] - 1.0;
            let mut hi = lambdas[i] + 1.0;
            let phi = 0.5 * (3.0 - 5.0f64.sqrt());
            for _ in 0..120 {
                let a = lo + phi * (hi - lo);
                let b = hi - phi * (hi - lo);
                if objective(a) < objective(b) {
                    lo = a;
                } else {
                    hi = b;
                }
            }
            let argmax = 0.5 * (lo + hi);
            assert_abs_diff_eq!(argmax, lambdas[i], epsilon = 1e-6);
        }
    }
}
