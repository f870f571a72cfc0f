//! Nash equilibria of the consumption game: the closed-form solution when
//! the inner transform is the identity, and the fixed-point solver for
//! nonlinear inner transforms.

pub mod linear;
pub mod nonlinear;

pub use linear::{consumption_uncorrelated, solve_linear, stochastic_dominance_check, DominanceReport};
pub use nonlinear::{
    action_upper_bound, comparative_static_alpha, comparative_static_cost, solve_nonlinear,
    ActionBound, AlphaStaticReport, CostStaticReport, FixedPointConfig,
};

use crate::net::{CentralityResult, ReferenceProfile, WeightedNetwork};
use crate::utility::EquilibriumParams;

/// How an equilibrium was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedForm,
    FixedPoint,
}

/// Equilibrium consumption and utility, with solver diagnostics.
#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub consumption: Vec<f64>,
    pub utility: Vec<f64>,
    pub centrality: CentralityResult,
    pub method: SolveMethod,
    pub iterations: usize,
    /// Sup-norm of the first-order-condition residuals at the solution.
    pub residual_norm: f64,
}

/// Sup-norm residual of the per-agent first-order condition
/// `m(x_i) - alpha_i sum_j g_ij m(x_j) = F(c / m'(x_i))`.
pub fn foc_residual(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    actions: &[f64],
) -> f64 {
    let inner = &params.utility.inner;
    let sub = &params.utility.sub;
    let m_vals: Vec<f64> = actions.iter().map(|&x| inner.value(x)).collect();
    (0..net.n())
        .map(|i| {
            let reference = prof.alpha()[i] * net.row_dot(i, &m_vals);
            let rhs = sub.inv_deriv(params.cost / inner.deriv(actions[i]));
            (m_vals[i] - reference - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Equilibrium utility `u_i = f(F(c / m'(x_i))) - c x_i + b alpha_i`,
/// obtained by substituting the first-order condition back into the
/// utility function (rows of `g` sum to one, so the linking term is
/// `b alpha_i`).
pub(crate) fn equilibrium_utility(
    prof: &ReferenceProfile,
    params: &EquilibriumParams,
    actions: &[f64],
) -> Vec<f64> {
    let inner = &params.utility.inner;
    let sub = &params.utility.sub;
    actions
        .iter()
        .zip(prof.alpha())
        .map(|(&x, &a)| {
            let gain = sub.inv_deriv(params.cost / inner.deriv(x));
            sub.value(gain) - params.cost * x + params.link_benefit * a
        })
        .collect()
}
