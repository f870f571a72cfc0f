//! Gauss-Seidel fixed point for the consumption game with a nonlinear inner
//! transform. Each agent's scalar first-order condition
//! `m(x_i) - alpha_i sum_j g_ij m(x_j) = F(c / m'(x_i))` has a strictly
//! increasing left side and strictly decreasing right side, so the sweep
//! solves one monotone root per agent and iterates to the unique
//! equilibrium.

use crate::equilibrium::{equilibrium_utility, foc_residual, EquilibriumResult, SolveMethod};
use crate::error::{Error, Result};
use crate::net::{bonacich, ReferenceProfile, WeightedNetwork};
use crate::utility::EquilibriumParams;

/// Stopping rules for the sweep and the per-agent scalar root finder.
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    pub max_iterations: usize,
    /// Sup-norm tolerance on the action change per sweep.
    pub tolerance: f64,
    /// Width tolerance for each scalar root.
    pub root_tolerance: f64,
    /// Starting actions; all zeros when absent.
    pub initial: Option<Vec<f64>>,
    /// Record (sweep, sup-change) pairs for the iteration trace.
    pub record_trace: bool,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
            root_tolerance: 1e-12,
            initial: None,
            record_trace: false,
        }
    }
}

impl FixedPointConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) || !(self.root_tolerance > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Upper bound on equilibrium actions: `m(A)(1 - max alpha) > F(c / m'(A))`
/// guarantees nobody best-responds above `A` when nobody plays above `A`.
#[derive(Debug, Clone, Copy)]
pub struct ActionBound {
    pub upper: f64,
}

const MAX_DOUBLINGS: usize = 1_000;
const SAFETY_FACTOR: f64 = 2.0;

/// Smallest `A` satisfying the bound inequality for the largest reference
/// strength, found by doubling then bisection, times a safety factor of two.
pub fn action_upper_bound(prof: &ReferenceProfile, params: &EquilibriumParams) -> Result<ActionBound> {
    let alpha_max = prof.max_alpha();
    let inner = &params.utility.inner;
    let sub = &params.utility.sub;
    let satisfied = |a: f64| -> bool {
        let rhs = sub.inv_deriv(params.cost / inner.deriv(a));
        if rhs.is_nan() {
            return false;
        }
        inner.value(a) * (1.0 - alpha_max) > rhs
    };

    let mut hi = 1.0;
    let mut doublings = 0;
    while !satisfied(hi) {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::ExistenceFailure(format!(
                "no finite action bound found below 2^{MAX_DOUBLINGS}; \
                 max alpha = {alpha_max}"
            )));
        }
        hi *= 2.0;
    }
    let mut lo = if doublings == 0 { 0.0 } else { hi / 2.0 };
    while hi - lo > 1e-9 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if satisfied(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ActionBound { upper: SAFETY_FACTOR * hi })
}

use crate::solvers::bracketed_root;

/// Best response of agent `i` given current opponent actions, as the root
/// of the agent's first-order condition inside `[0, a_hat]`.
pub fn scalar_best_response(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    i: usize,
    m_values: &[f64],
    a_hat: f64,
    root_tolerance: f64,
) -> Result<f64> {
    let inner = &params.utility.inner;
    let sub = &params.utility.sub;
    let reference = prof.alpha()[i] * net.row_dot(i, m_values);
    let h = |x: f64| -> f64 {
        let rhs = sub.inv_deriv(params.cost / inner.deriv(x));
        if rhs.is_nan() {
            // out-of-domain probe; the gain requirement cannot be met here
            return f64::NEG_INFINITY;
        }
        inner.value(x) - reference - rhs
    };
    let h_lo = h(0.0);
    if h_lo >= 0.0 {
        // unconstrained root would be nonpositive; actions are bounded below
        return Ok(0.0);
    }
    let h_hi = h(a_hat);
    if !(h_hi >= 0.0) {
        return Err(Error::Convergence(format!(
            "best response of agent {i} escapes the action bound {a_hat} (h = {h_hi})"
        )));
    }
    Ok(bracketed_root(0.0, a_hat, h_lo, h_hi, h, root_tolerance))
}

/// Solves the game by Gauss-Seidel iteration over agents in fixed order,
/// sweeping until the sup-norm action change drops below tolerance.
pub fn solve_nonlinear(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    config: &FixedPointConfig,
) -> Result<EquilibriumResult> {
    let trace = solve_nonlinear_traced(net, prof, params, config)?;
    Ok(trace.0)
}

/// Like [`solve_nonlinear`] but also returns the per-sweep sup-change trace
/// when `config.record_trace` is set.
pub fn solve_nonlinear_traced(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    config: &FixedPointConfig,
) -> Result<(EquilibriumResult, Vec<(usize, f64)>)> {
    config.validate()?;
    let n = net.n();
    if prof.n() != n {
        return Err(Error::InvalidInput(format!(
            "network has {n} agents but profile has {}",
            prof.n()
        )));
    }
    let a_hat = action_upper_bound(prof, params)?.upper;
    let mut actions = match &config.initial {
        Some(x0) => {
            if x0.len() != n {
                return Err(Error::Parameter(format!(
                    "initial vector has length {}, expected {n}",
                    x0.len()
                )));
            }
            x0.clone()
        }
        None => vec![0.0; n],
    };
    for x in &mut actions {
        *x = x.clamp(0.0, a_hat);
    }
    let inner = &params.utility.inner;
    let mut m_values: Vec<f64> = actions.iter().map(|&x| inner.value(x)).collect();
    let mut trace = Vec::new();

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < config.max_iterations {
        sweeps += 1;
        let mut sup_change = 0.0f64;
        for i in 0..n {
            let updated =
                scalar_best_response(net, prof, params, i, &m_values, a_hat, config.root_tolerance)?;
            sup_change = sup_change.max((updated - actions[i]).abs());
            actions[i] = updated;
            m_values[i] = inner.value(updated);
        }
        if config.record_trace {
            trace.push((sweeps, sup_change));
        }
        if sup_change < config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "fixed point not reached in {} sweeps; last residual {:.3e}",
            config.max_iterations,
            foc_residual(net, prof, params, &actions)
        )));
    }

    let utility = equilibrium_utility(prof, params, &actions);
    let residual_norm = foc_residual(net, prof, params, &actions);
    let centrality = bonacich(net, prof)?;
    Ok((
        EquilibriumResult {
            consumption: actions,
            utility,
            centrality,
            method: SolveMethod::FixedPoint,
            iterations: sweeps,
            residual_norm,
        },
        trace,
    ))
}

/// Outcome of bumping one agent's reference strength.
#[derive(Debug, Clone)]
pub struct AlphaStaticReport {
    pub agent: usize,
    pub delta: f64,
    pub consumption_change: Vec<f64>,
    pub utility_change: Vec<f64>,
    pub consumption_weakly_up: bool,
    pub own_consumption_strictly_up: bool,
    pub utility_weakly_down: bool,
    pub own_utility_strictly_down: bool,
}

const WEAK_TOL: f64 = 1e-9;

/// Solves at `alpha` and at `alpha` with `alpha_j += delta`, and checks the
/// monotone responses: consumption weakly up everywhere and strictly up for
/// `j`, utility weakly down everywhere and strictly down for `j`.
pub fn comparative_static_alpha(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    j: usize,
    delta: f64,
    config: &FixedPointConfig,
) -> Result<AlphaStaticReport> {
    if delta < 0.0 {
        return Err(Error::Parameter(format!("delta {delta} must be nonnegative")));
    }
    let base = solve_nonlinear(net, prof, params, config)?;
    let bumped_prof = prof.with_bumped(j, delta)?;
    let bumped = solve_nonlinear(net, &bumped_prof, params, config)?;

    let consumption_change: Vec<f64> = bumped
        .consumption
        .iter()
        .zip(&base.consumption)
        .map(|(b, a)| b - a)
        .collect();
    let utility_change: Vec<f64> = bumped
        .utility
        .iter()
        .zip(&base.utility)
        .map(|(b, a)| b - a)
        .collect();

    Ok(AlphaStaticReport {
        agent: j,
        delta,
        consumption_weakly_up: consumption_change.iter().all(|d| *d >= -WEAK_TOL),
        own_consumption_strictly_up: consumption_change[j] > 0.0,
        utility_weakly_down: utility_change.iter().all(|d| *d <= WEAK_TOL),
        own_utility_strictly_down: utility_change[j] < 0.0,
        consumption_change,
        utility_change,
    })
}

/// Outcome of raising the marginal cost by `delta`.
#[derive(Debug, Clone)]
pub struct CostStaticReport {
    pub delta: f64,
    pub consumption_change: Vec<f64>,
    pub utility_change: Vec<f64>,
    /// Finite-difference `dx_i / dc`.
    pub consumption_sensitivity: Vec<f64>,
    /// Per-agent check of `dx/dc < min(-x/c, m'(x)/(c m''(x)))`.
    pub sensitivity_condition: Vec<bool>,
    pub consumption_strictly_down: bool,
    /// True when every agent meeting the sensitivity condition saw utility rise.
    pub condition_implies_utility_gain: bool,
}

/// Solves at `c` and `c + delta`; reports the finite-difference cost
/// sensitivities and, agent by agent, whether the sufficient condition for
/// a welfare gain held and whether utility actually rose.
pub fn comparative_static_cost(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    delta: f64,
    config: &FixedPointConfig,
) -> Result<CostStaticReport> {
    if params.cost + delta <= 0.0 {
        return Err(Error::Parameter(format!(
            "perturbed cost {} must stay positive",
            params.cost + delta
        )));
    }
    if delta == 0.0 {
        return Err(Error::Parameter("cost delta must be nonzero".into()));
    }
    let base = solve_nonlinear(net, prof, params, config)?;
    let bumped_params =
        EquilibriumParams::new(params.cost + delta, params.link_benefit, params.utility.clone())?;
    let bumped = solve_nonlinear(net, prof, &bumped_params, config)?;

    let inner = &params.utility.inner;
    let consumption_change: Vec<f64> = bumped
        .consumption
        .iter()
        .zip(&base.consumption)
        .map(|(b, a)| b - a)
        .collect();
    let utility_change: Vec<f64> = bumped
        .utility
        .iter()
        .zip(&base.utility)
        .map(|(b, a)| b - a)
        .collect();
    let consumption_sensitivity: Vec<f64> =
        consumption_change.iter().map(|d| d / delta).collect();

    let sensitivity_condition: Vec<bool> = base
        .consumption
        .iter()
        .zip(&consumption_sensitivity)
        .map(|(&x, &dxdc)| {
            let m1 = inner.deriv(x);
            let m2 = inner.second(x);
            // with a linear inner transform the curvature term degenerates
            // and the sufficient condition cannot hold
            let curvature_bound = if m2 < 0.0 {
                m1 / (params.cost * m2)
            } else {
                f64::NEG_INFINITY
            };
            dxdc < (-x / params.cost).min(curvature_bound)
        })
        .collect();

    let condition_implies_utility_gain = sensitivity_condition
        .iter()
        .zip(&utility_change)
        .all(|(cond, du)| !cond || *du > 0.0);

    Ok(CostStaticReport {
        delta,
        consumption_strictly_down: consumption_change.iter().all(|d| *d < 0.0),
        condition_implies_utility_gain,
        consumption_change,
        utility_change,
        consumption_sensitivity,
        sensitivity_condition,
    })
}
