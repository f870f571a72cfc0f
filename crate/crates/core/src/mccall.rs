//! Reservation wages for the sequential job-search model with a social
//! reference point: the searcher accepts the first offer `w` whose payoff
//! `f(w - R)` beats the value of searching again.
//!
//! The reservation wage solves
//! `f(wbar - R) = beta/(1-beta) * int_wbar^Z [f(w' - R) - f(wbar - R)] dG(w')`.
//! The exogenous-`R` case is a scalar root; the endogenous case iterates
//! reference points `R_i = alpha_i sum_j g_ij wbar_j` to a unique fixed
//! point.

use std::fmt;
use std::sync::Arc;

use statrs::distribution::{Beta, Continuous, ContinuousCDF};

use crate::equilibrium::FixedPointConfig;
use crate::error::{Error, Result};
use crate::net::{ReferenceProfile, WeightedNetwork};
use crate::utility::SubUtility;

/// User-supplied offer distribution on `[0, Z]`.
pub struct CustomDistribution {
    pub z: f64,
    pub cdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub pdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
}

/// Wage-offer distribution with bounded support `[0, Z]`, `G(0) = 0`,
/// `G(Z) = 1`.
#[derive(Clone)]
pub enum WageOfferDistribution {
    Uniform { z: f64 },
    /// Beta(a, b) scaled onto `[0, Z]`.
    BetaScaled { z: f64, alpha: f64, beta: f64 },
    Custom(Arc<CustomDistribution>),
}

impl fmt::Debug for WageOfferDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WageOfferDistribution::Uniform { z } => write!(f, "Uniform(0, {z})"),
            WageOfferDistribution::BetaScaled { z, alpha, beta } => {
                write!(f, "BetaScaled({alpha}, {beta}) on [0, {z}]")
            }
            WageOfferDistribution::Custom(c) => write!(f, "Custom({})", c.label),
        }
    }
}

impl WageOfferDistribution {
    pub fn uniform(z: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Parameter(format!("support bound Z = {z} must be positive")));
        }
        Ok(WageOfferDistribution::Uniform { z })
    }

    pub fn beta_scaled(z: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Parameter(format!("support bound Z = {z} must be positive")));
        }
        Beta::new(alpha, beta)
            .map_err(|e| Error::Parameter(format!("invalid beta shape ({alpha}, {beta}): {e}")))?;
        Ok(WageOfferDistribution::BetaScaled { z, alpha, beta })
    }

    pub fn z(&self) -> f64 {
        match self {
            WageOfferDistribution::Uniform { z } => *z,
            WageOfferDistribution::BetaScaled { z, .. } => *z,
            WageOfferDistribution::Custom(c) => c.z,
        }
    }

    pub fn cdf(&self, w: f64) -> f64 {
        match self {
            WageOfferDistribution::Uniform { z } => (w / z).clamp(0.0, 1.0),
            WageOfferDistribution::BetaScaled { z, alpha, beta } => {
                Beta::new(*alpha, *beta).unwrap().cdf((w / z).clamp(0.0, 1.0))
            }
            WageOfferDistribution::Custom(c) => (c.cdf)(w),
        }
    }

    pub fn pdf(&self, w: f64) -> f64 {
        match self {
            WageOfferDistribution::Uniform { z } => {
                if (0.0..=*z).contains(&w) {
                    1.0 / z
                } else {
                    0.0
                }
            }
            WageOfferDistribution::BetaScaled { z, alpha, beta } => {
                if (0.0..=*z).contains(&w) {
                    Beta::new(*alpha, *beta).unwrap().pdf(w / z) / z
                } else {
                    0.0
                }
            }
            WageOfferDistribution::Custom(c) => (c.pdf)(w),
        }
    }

    /// Checks the boundary conditions and that the density integrates to
    /// one within 1e-8.
    pub fn validate(&self) -> Result<()> {
        let z = self.z();
        if self.cdf(0.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("G(0) = {} must be 0", self.cdf(0.0))));
        }
        if (self.cdf(z) - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("G(Z) = {} must be 1", self.cdf(z))));
        }
        let mass = adaptive_simpson(|w| self.pdf(w), 0.0, z, 1e-11)?;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::Parameter(format!("density integrates to {mass}, expected 1")));
        }
        Ok(())
    }
}

/// Discount factor, offer distribution and gain utility of one searcher.
#[derive(Debug, Clone)]
pub struct McCallProblem {
    pub beta: f64,
    pub dist: WageOfferDistribution,
    pub utility: SubUtility,
}

impl McCallProblem {
    pub fn new(beta: f64, dist: WageOfferDistribution, utility: SubUtility) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Parameter(format!("discount factor {beta} outside (0, 1)")));
        }
        Ok(Self { beta, dist, utility })
    }
}

/// Scalar reservation wage with solver diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct ReservationWage {
    pub wage: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Equilibrium reservation-wage vector for the endogenous case.
#[derive(Debug, Clone)]
pub struct EndogenousWages {
    pub wages: Vec<f64>,
    /// Reference points `alpha_i sum_j g_ij wbar_j` at the fixed point.
    pub reference_points: Vec<f64>,
    pub max_residual: f64,
    pub sweeps: usize,
}

/// Composite Simpson with panel doubling (64 panels up) until successive
/// values agree within `tol`.
fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let simpson = |n: usize| -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = a + h * k as f64;
            acc += f(w) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let mut n = 64;
    let mut previous = simpson(n);
    loop {
        n *= 2;
        let current = simpson(n);
        if (current - previous).abs() < tol {
            return Ok(current);
        }
        if n >= (1 << 22) {
            return Err(Error::Convergence(format!(
                "quadrature stalled at {n} panels (last change {:.3e})",
                (current - previous).abs()
            )));
        }
        previous = current;
    }
}

/// Tail integral `int_a^b f` under the substitution `w = a + (b - a) t^3`,
/// which tames the algebraic left-endpoint singularity of power gains when
/// the lower limit sits next to the reference point.
fn tail_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let span = b - a;
    adaptive_simpson(
        |t| {
            let jacobian = 3.0 * span * t * t;
            if jacobian == 0.0 {
                return 0.0;
            }
            let v = f(a + span * t * t * t);
            if v.is_finite() {
                v * jacobian
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

const QUAD_TOL: f64 = 1e-10;

/// Residual of the reservation-wage equation at `w`, written as
/// `f(w - R) - kappa * [I(w) - f(w - R)(1 - G(w))]` with
/// `I(w) = int_w^Z f(w' - R) g(w') dw'`.
fn reservation_residual(problem: &McCallProblem, r: f64, w: f64) -> Result<f64> {
    let kappa = problem.beta / (1.0 - problem.beta);
    let z = problem.dist.z();
    let gain = problem.utility.value(w - r);
    let tail = tail_integral(
        |wp| problem.utility.value(wp - r) * problem.dist.pdf(wp),
        w,
        z,
        QUAD_TOL,
    )?;
    Ok(gain - kappa * (tail - gain * (1.0 - problem.dist.cdf(w))))
}

/// Analytic slope of the residual in `w`; the integral's own derivative
/// cancels, leaving `f'(w - R) [1 + kappa (1 - G(w))]`.
fn reservation_residual_slope(problem: &McCallProblem, r: f64, w: f64) -> f64 {
    let kappa = problem.beta / (1.0 - problem.beta);
    problem.utility.deriv(w - r) * (1.0 + kappa * (1.0 - problem.dist.cdf(w)))
}

/// Solves the reservation-wage equation for a fixed reference point by
/// Newton-Raphson with a bisection safeguard on `[R + eps, Z]`.
pub fn reservation_wage_exogenous(problem: &McCallProblem, r: f64) -> Result<ReservationWage> {
    let z = problem.dist.z();
    if r >= z {
        return Err(Error::Parameter(format!(
            "reference point {r} is at or above the top offer {z}; no acceptable wage exists"
        )));
    }
    let span = z - r;
    let scale = problem.utility.value(0.5 * span).abs().max(1.0);
    let root_tol = 1e-12 * scale;

    let hi0 = z;
    let h_hi0 = reservation_residual(problem, r, hi0)?;
    if h_hi0.is_nan() || h_hi0 < 0.0 {
        return Err(Error::Infeasible(format!(
            "residual at the top offer is {h_hi0:.3e}; no acceptable wage below Z = {z}"
        )));
    }

    // Bracket the root from the reference point upward. When the residual
    // is already positive a hair above R (vanishing search value), shrink
    // the gap geometrically: the equation is monotone, so the first
    // nonpositive residual closes a bracket.
    let mut eps = span * 1e-9;
    let mut lo;
    let mut h_lo;
    let mut hi = hi0;
    let mut h_hi = h_hi0;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let h = reservation_residual(problem, r, r + eps)?;
        if h.is_nan() {
            return Err(Error::Parameter(format!(
                "gain utility undefined just above the reference point {r}"
            )));
        }
        if h.abs() <= root_tol {
            return Ok(ReservationWage { wage: r + eps, residual: h, iterations });
        }
        if h <= 0.0 {
            lo = r + eps;
            h_lo = h;
            break;
        }
        hi = r + eps;
        h_hi = h;
        eps /= 256.0;
        if eps < f64::MIN_POSITIVE * 1e16 {
            // root is unrepresentably close to R
            return Ok(ReservationWage { wage: r + eps, residual: h, iterations });
        }
    }

    let mut w = 0.5 * (lo + hi);
    let mut residual = reservation_residual(problem, r, w)?;
    while residual.abs() > root_tol && iterations < 300 {
        iterations += 1;
        if residual < 0.0 {
            lo = w;
            h_lo = residual;
        } else {
            hi = w;
            h_hi = residual;
        }
        let slope = reservation_residual_slope(problem, r, w);
        let newton = w - residual / slope;
        w = if slope.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * z {
            break;
        }
        residual = reservation_residual(problem, r, w)?;
    }
    let _ = (h_lo, h_hi);
    if !(w > r && w <= z) {
        return Err(Error::Infeasible(format!(
            "solver left the admissible range: wbar = {w}, R = {r}, Z = {z}"
        )));
    }
    if residual.abs() > 1e-9 * scale {
        return Err(Error::Convergence(format!(
            "reservation-wage residual {residual:.3e} above tolerance after {iterations} iterations"
        )));
    }
    Ok(ReservationWage { wage: w, residual, iterations })
}

/// Simultaneous reservation wages on a network, by the iterative scheme:
/// guess a wage vector, form reference points `R_i = alpha_i sum_j g_ij
/// wbar_j`, re-solve every agent's scalar problem holding her `R_i` fixed,
/// and repeat until the sup-norm change is below tolerance.
pub fn reservation_wage_endogenous(
    problem: &McCallProblem,
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    config: &FixedPointConfig,
) -> Result<EndogenousWages> {
    let n = net.n();
    if prof.n() != n {
        return Err(Error::InvalidInput(format!(
            "network has {n} agents but profile has {}",
            prof.n()
        )));
    }
    let mut wages = match &config.initial {
        Some(w0) => {
            if w0.len() != n {
                return Err(Error::Parameter(format!(
                    "initial wage vector has length {}, expected {n}",
                    w0.len()
                )));
            }
            w0.clone()
        }
        None => vec![0.0; n],
    };
    let mut references = vec![0.0; n];
    let mut max_residual = 0.0f64;
    for sweep in 1..=config.max_iterations {
        for i in 0..n {
            references[i] = prof.alpha()[i] * net.row_dot(i, &wages);
        }
        let mut sup_change = 0.0f64;
        max_residual = 0.0;
        let mut next = wages.clone();
        for i in 0..n {
            let solved = reservation_wage_exogenous(problem, references[i])?;
            sup_change = sup_change.max((solved.wage - wages[i]).abs());
            next[i] = solved.wage;
            max_residual = max_residual.max(solved.residual.abs());
        }
        wages = next;
        if sup_change < config.tolerance {
            for i in 0..n {
                references[i] = prof.alpha()[i] * net.row_dot(i, &wages);
                if wages[i] <= references[i] {
                    return Err(Error::Infeasible(format!(
                        "agent {i} ended with wage {} at or below reference {}",
                        wages[i], references[i]
                    )));
                }
            }
            return Ok(EndogenousWages {
                wages,
                reference_points: references,
                max_residual,
                sweeps: sweep,
            });
        }
    }
    Err(Error::Convergence(format!(
        "endogenous reservation wages did not settle in {} sweeps",
        config.max_iterations
    )))
}

/// Discretized optimal-stopping oracle: value-iterates
/// `V(w) = max(f(w - R)/(1 - beta), beta E[V(w')])` on a wage grid and
/// returns the acceptance threshold. Agrees with the analytic solver to
/// within one grid step.
pub fn value_iteration_oracle(problem: &McCallProblem, r: f64, grid_size: usize) -> Result<f64> {
    if grid_size < 1_000 {
        return Err(Error::Parameter(format!("grid size {grid_size} below 1000")));
    }
    let z = problem.dist.z();
    let step = z / grid_size as f64;
    // cell centers with exact cell probabilities from the CDF
    let mut accept = Vec::with_capacity(grid_size);
    let mut prob = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let left = step * k as f64;
        let center = left + 0.5 * step;
        prob.push(problem.dist.cdf(left + step) - problem.dist.cdf(left));
        let gain = problem.utility.value(center - r);
        accept.push(if gain.is_nan() {
            f64::NEG_INFINITY
        } else {
            gain / (1.0 - problem.beta)
        });
    }
    // accept values are nondecreasing in the wage, so prefix sums give the
    // expectation split at the acceptance threshold in O(log n) per sweep
    let mut prob_prefix = vec![0.0];
    let mut mass_prefix = vec![0.0];
    for k in 0..grid_size {
        prob_prefix.push(prob_prefix[k] + prob[k]);
        mass_prefix.push(mass_prefix[k] + prob[k] * if accept[k].is_finite() { accept[k] } else { 0.0 });
    }
    let total_prob = prob_prefix[grid_size];
    let total_mass = mass_prefix[grid_size];

    let mut continuation = 0.0f64;
    for _ in 0..1_000_000 {
        let split = accept.partition_point(|a| *a < continuation);
        let reject_mass = prob_prefix[split] + (1.0 - total_prob).max(0.0);
        let accept_mass = total_mass - mass_prefix[split];
        let next = problem.beta * (reject_mass * continuation + accept_mass);
        let done = (next - continuation).abs() < 1e-12;
        continuation = next;
        if done {
            let split = accept.partition_point(|a| *a < continuation);
            return Ok(step * split as f64 + 0.5 * step);
        }
    }
    Err(Error::Convergence("value iteration stalled".into()))
}
