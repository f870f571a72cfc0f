//! Two-type labor market with coworker comparisons. Skilled workers trade a
//! higher absolute wage at high-productivity firms against a lower coworker
//! reference point at low-productivity firms (the big-fish motive); the
//! equilibrium sorting fraction is the fixed point of a monotone cutoff
//! map. Also includes the pairwise-stability checker for friendship
//! networks with fixed comparison budgets.
//!
//! Model closure: firms pool into two large types; average wages are
//! `wbar_H(c) = gamma k_H (c e_S + 1 - c)` and
//! `wbar_L(c) = gamma ((1 - c) e_S + c)`; a skilled worker prefers the
//! high type iff `gamma e_S (k_H - 1) >= alpha2_i (wbar_H(c) - wbar_L(c))`,
//! because her own firm choice moves only her wage and her coworker
//! reference. Aggregates (output, wage variance, welfare references) use
//! the mixing fraction `c*`; the per-worker table realizes it integrally.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Two-type economy: abilities `e_S > e_U = 1`, productivities
/// `k_H > k_L = 1`, worker surplus share `gamma`, a common total comparison
/// strength, and one friend-comparison draw `alpha1_i` per worker (coworker
/// strength is the residual `alpha_total - alpha1_i`). Workers in the first
/// half of the vector are skilled; half of all vacancies are high type.
#[derive(Debug, Clone)]
pub struct LaborEconomy {
    pub skilled_ability: f64,
    pub high_productivity: f64,
    pub surplus_share: f64,
    pub alpha_total: f64,
    pub alpha1: Vec<f64>,
    /// Common linking benefit entering welfare as `b alpha1_i`.
    pub link_benefit: f64,
    /// Scale the coworker reference by `gamma` as in the alternative model
    /// statement; off by default (the reference is already in wage units).
    pub gamma_scaled_coworker: bool,
}

impl LaborEconomy {
    pub fn new(
        skilled_ability: f64,
        high_productivity: f64,
        surplus_share: f64,
        alpha_total: f64,
        alpha1: Vec<f64>,
    ) -> Result<Self> {
        if !(skilled_ability > 1.0) {
            return Err(Error::Parameter(format!(
                "skilled ability {skilled_ability} must exceed the unskilled ability 1"
            )));
        }
        if !(high_productivity > 1.0) {
            return Err(Error::Parameter(format!(
                "high productivity {high_productivity} must exceed the low productivity 1"
            )));
        }
        if !(surplus_share > 0.0 && surplus_share < 1.0) {
            return Err(Error::Parameter(format!(
                "surplus share {surplus_share} outside (0, 1)"
            )));
        }
        if !(0.0..1.0).contains(&alpha_total) {
            return Err(Error::Parameter(format!(
                "total comparison strength {alpha_total} outside [0, 1)"
            )));
        }
        if alpha1.len() < 2 || alpha1.len() % 2 != 0 {
            return Err(Error::Parameter(format!(
                "need an even number of workers >= 2, got {}",
                alpha1.len()
            )));
        }
        for (i, a) in alpha1.iter().enumerate() {
            if !a.is_finite() || *a < 0.0 || *a > alpha_total {
                return Err(Error::Parameter(format!(
                    "alpha1[{i}] = {a} outside [0, {alpha_total}]"
                )));
            }
        }
        Ok(Self {
            skilled_ability,
            high_productivity,
            surplus_share,
            alpha_total,
            alpha1,
            link_benefit: 0.0,
            gamma_scaled_coworker: false,
        })
    }

    pub fn n_workers(&self) -> usize {
        self.alpha1.len()
    }

    pub fn n_skilled(&self) -> usize {
        self.alpha1.len() / 2
    }

    pub fn is_skilled(&self, worker: usize) -> bool {
        worker < self.n_skilled()
    }

    pub fn alpha2(&self, worker: usize) -> f64 {
        self.alpha_total - self.alpha1[worker]
    }

    pub fn wage(&self, skilled: bool, high_firm: bool) -> f64 {
        let ability = if skilled { self.skilled_ability } else { 1.0 };
        let productivity = if high_firm { self.high_productivity } else { 1.0 };
        self.surplus_share * ability * productivity
    }

    /// Average wage at each firm type when a fraction `c` of skilled
    /// workers sit in high-productivity firms.
    pub fn average_wages(&self, c: f64) -> (f64, f64) {
        let g = self.surplus_share;
        let e = self.skilled_ability;
        let high = g * self.high_productivity * (c * e + (1.0 - c));
        let low = g * ((1.0 - c) * e + c);
        (high, low)
    }

    fn coworker_scale(&self) -> f64 {
        if self.gamma_scaled_coworker {
            self.surplus_share
        } else {
            1.0
        }
    }

    /// Indifference cutoff on the coworker strength at sorting level `c`: a
    /// skilled worker prefers the high type iff `alpha2_i <= cutoff(c)`.
    fn cutoff(&self, c: f64) -> f64 {
        let (high, low) = self.average_wages(c);
        self.surplus_share * self.skilled_ability * (self.high_productivity - 1.0)
            / (self.coworker_scale() * (high - low))
    }
}

/// One worker's equilibrium position.
#[derive(Debug, Clone, Serialize)]
pub struct WorkerAssignment {
    pub worker: usize,
    pub skilled: bool,
    pub high_firm: bool,
    pub wage: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub welfare: f64,
}

/// Equilibrium sorting outcome. `sorting_fraction` is the mixing fixed
/// point; `assignments` realize it with integral headcounts (high-type
/// vacancies are filled exactly).
#[derive(Debug, Clone, Serialize)]
pub struct SortingEquilibrium {
    pub sorting_fraction: f64,
    pub alpha1_crit: f64,
    pub avg_wage_high: f64,
    pub avg_wage_low: f64,
    pub assignments: Vec<WorkerAssignment>,
    /// Total match surplus at the mixing fraction.
    pub output: f64,
    pub mean_wage: f64,
    pub wage_variance: f64,
    /// Reported alongside the variance but never asserted: the mean shifts
    /// with comparison strength, so this need not move with the variance.
    pub wage_gini: f64,
}

const BISECT_ITERS: usize = 200;
const ASSIGN_TIE_TOL: f64 = 1e-9;

/// Solves for the equilibrium sorting fraction and worker assignments.
pub fn solve_sorting(economy: &LaborEconomy) -> Result<SortingEquilibrium> {
    let n_s = economy.n_skilled();
    let alpha2: Vec<f64> = (0..economy.n_workers()).map(|i| economy.alpha2(i)).collect();
    let skilled_alpha2 = &alpha2[..n_s];

    // fraction of skilled preferring the high type at sorting level c
    let preferring = |c: f64| -> usize {
        let t = economy.cutoff(c);
        skilled_alpha2.iter().filter(|a| **a <= t).count()
    };
    let excess = |c: f64| preferring(c) as f64 / n_s as f64 - c;

    // the map is decreasing with excess(1/2) = 1/2 > 0, so bisection on
    // [1/2, 1] finds the unique crossing
    let c_star = if excess(1.0) >= 0.0 {
        1.0
    } else {
        let mut lo = 0.5;
        let mut hi = 1.0;
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if excess(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if !(c_star > 0.5) {
        return Err(Error::Convergence(format!(
            "sorting fixed point c* = {c_star} escaped (1/2, 1]"
        )));
    }

    // integral headcount consistent with weak preferences at c*
    let t_star = economy.cutoff(c_star);
    let strictly_preferring = skilled_alpha2
        .iter()
        .filter(|a| **a < t_star - ASSIGN_TIE_TOL)
        .count();
    let weakly_preferring = skilled_alpha2
        .iter()
        .filter(|a| **a <= t_star + ASSIGN_TIE_TOL)
        .count();
    let high_skilled = ((c_star * n_s as f64).round() as usize)
        .clamp(strictly_preferring, weakly_preferring)
        .min(n_s);

    // skilled workers ranked by coworker strength (strongest friend
    // comparisons first); the top block fills the high-type slots
    let mut order: Vec<usize> = (0..n_s).collect();
    order.sort_by(|&a, &b| skilled_alpha2[a].total_cmp(&skilled_alpha2[b]).then(a.cmp(&b)));
    let mut at_high = vec![false; economy.n_workers()];
    for &w in order.iter().take(high_skilled) {
        at_high[w] = true;
    }
    // unskilled workers fill the remaining high-type vacancies in index order
    let high_capacity = economy.n_workers() / 2;
    let mut high_slots_left = high_capacity - high_skilled;
    for w in n_s..economy.n_workers() {
        if high_slots_left == 0 {
            break;
        }
        at_high[w] = true;
        high_slots_left -= 1;
    }

    let alpha1_crit = if high_skilled > 0 {
        economy.alpha1[order[high_skilled - 1]]
    } else {
        f64::INFINITY
    };

    // aggregates at the mixing fraction
    let (avg_high, avg_low) = economy.average_wages(c_star);
    let e = economy.skilled_ability;
    let k = economy.high_productivity;
    let g = economy.surplus_share;
    let cells = [
        (0.5 * c_star, e * k),         // skilled at high
        (0.5 * (1.0 - c_star), e),     // skilled at low
        (0.5 * (1.0 - c_star), k),     // unskilled at high
        (0.5 * c_star, 1.0),           // unskilled at low
    ];
    let output: f64 = economy.n_workers() as f64 * cells.iter().map(|(s, y)| s * y).sum::<f64>();
    let mean_wage: f64 = cells.iter().map(|(s, y)| s * g * y).sum();
    let wage_variance: f64 = cells
        .iter()
        .map(|(s, y)| s * (g * y - mean_wage) * (g * y - mean_wage))
        .sum();
    let wage_gini: f64 = cells
        .iter()
        .flat_map(|a| cells.iter().map(move |b| a.0 * b.0 * (g * a.1 - g * b.1).abs()))
        .sum::<f64>()
        / (2.0 * mean_wage);

    let assignments: Vec<WorkerAssignment> = (0..economy.n_workers())
        .map(|w| {
            let skilled = economy.is_skilled(w);
            let high_firm = at_high[w];
            let wage = economy.wage(skilled, high_firm);
            let coworker_avg = if high_firm { avg_high } else { avg_low };
            let gain = wage
                - economy.alpha1[w] * mean_wage
                - economy.alpha2(w) * economy.coworker_scale() * coworker_avg;
            WorkerAssignment {
                worker: w,
                skilled,
                high_firm,
                wage,
                alpha1: economy.alpha1[w],
                alpha2: economy.alpha2(w),
                welfare: gain + economy.link_benefit * economy.alpha1[w],
            }
        })
        .collect();

    Ok(SortingEquilibrium {
        sorting_fraction: c_star,
        alpha1_crit,
        avg_wage_high: avg_high,
        avg_wage_low: avg_low,
        assignments,
        output,
        mean_wage,
        wage_variance,
        wage_gini,
    })
}

/// Which primitive a sorting comparative static perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortingDimension {
    /// Raise every worker's coworker strength by raising the total.
    Alpha2Shift,
    HighProductivity,
    SkilledAbility,
}

#[derive(Debug, Clone)]
pub struct SortingStaticReport {
    pub dimension: SortingDimension,
    pub delta: f64,
    pub c_base: f64,
    pub c_bumped: f64,
    pub change: f64,
    /// Sign of the change matches the model's monotonicity.
    pub direction_holds: bool,
}

const MONOTONE_TOL: f64 = 1e-9;

/// Re-solves a perturbed economy and checks the direction of the change in
/// sorting: down for stronger coworker comparisons, up for higher top-firm
/// productivity, down for higher skilled ability.
pub fn comparative_statics_sorting(
    economy: &LaborEconomy,
    dimension: SortingDimension,
    delta: f64,
) -> Result<SortingStaticReport> {
    let mut bumped = economy.clone();
    match dimension {
        SortingDimension::Alpha2Shift => {
            bumped = LaborEconomy::new(
                economy.skilled_ability,
                economy.high_productivity,
                economy.surplus_share,
                economy.alpha_total + delta,
                economy.alpha1.clone(),
            )?;
            bumped.link_benefit = economy.link_benefit;
            bumped.gamma_scaled_coworker = economy.gamma_scaled_coworker;
        }
        SortingDimension::HighProductivity => {
            bumped.high_productivity += delta;
            if bumped.high_productivity <= 1.0 {
                return Err(Error::Parameter("perturbed productivity must stay above 1".into()));
            }
        }
        SortingDimension::SkilledAbility => {
            bumped.skilled_ability += delta;
            if bumped.skilled_ability <= 1.0 {
                return Err(Error::Parameter("perturbed ability must stay above 1".into()));
            }
        }
    }
    let c_base = solve_sorting(economy)?.sorting_fraction;
    let c_bumped = solve_sorting(&bumped)?.sorting_fraction;
    let change = c_bumped - c_base;
    let direction_holds = match dimension {
        SortingDimension::Alpha2Shift | SortingDimension::SkilledAbility => {
            if delta >= 0.0 {
                change <= MONOTONE_TOL
            } else {
                change >= -MONOTONE_TOL
            }
        }
        SortingDimension::HighProductivity => {
            if delta >= 0.0 {
                change >= -MONOTONE_TOL
            } else {
                change <= MONOTONE_TOL
            }
        }
    };
    Ok(SortingStaticReport {
        dimension,
        delta,
        c_base,
        c_bumped,
        change,
        direction_holds,
    })
}

/// Effects of scaling the overall comparison strength (friend/coworker mix
/// preserved) on output, wage dispersion and skilled welfare.
#[derive(Debug, Clone)]
pub struct AggregateReport {
    pub delta: f64,
    pub output_change: f64,
    pub variance_change: f64,
    pub gini_change: f64,
    /// Per skilled worker.
    pub welfare_change: Vec<f64>,
    pub output_weakly_down: bool,
    pub variance_weakly_down: bool,
    pub welfare_weakly_down: bool,
}

/// Raises `alpha_total` by `delta`, scaling each `alpha1_i` proportionally
/// so the friend/coworker mix is unchanged, and compares output, wage
/// variance and every skilled worker's welfare.
pub fn aggregate_effects(economy: &LaborEconomy, alpha_total_delta: f64) -> Result<AggregateReport> {
    let new_total = economy.alpha_total + alpha_total_delta;
    if !(0.0..1.0).contains(&new_total) {
        return Err(Error::Parameter(format!(
            "perturbed total strength {new_total} outside [0, 1)"
        )));
    }
    let scale = if economy.alpha_total > 0.0 {
        new_total / economy.alpha_total
    } else {
        // all alpha1 are zero; they stay zero and the delta goes to alpha2
        0.0
    };
    let mut bumped = LaborEconomy::new(
        economy.skilled_ability,
        economy.high_productivity,
        economy.surplus_share,
        new_total,
        economy.alpha1.iter().map(|a| a * scale).collect(),
    )?;
    bumped.link_benefit = economy.link_benefit;
    bumped.gamma_scaled_coworker = economy.gamma_scaled_coworker;

    let base = solve_sorting(economy)?;
    let after = solve_sorting(&bumped)?;
    let n_s = economy.n_skilled();
    let welfare_change: Vec<f64> = (0..n_s)
        .map(|w| after.assignments[w].welfare - base.assignments[w].welfare)
        .collect();
    let sign = alpha_total_delta.signum();
    let weakly_down = |v: f64| sign * v <= MONOTONE_TOL;
    Ok(AggregateReport {
        delta: alpha_total_delta,
        output_change: after.output - base.output,
        variance_change: after.wage_variance - base.wage_variance,
        gini_change: after.wage_gini - base.wage_gini,
        output_weakly_down: weakly_down(after.output - base.output),
        variance_weakly_down: weakly_down(after.wage_variance - base.wage_variance),
        welfare_weakly_down: welfare_change.iter().all(|d| weakly_down(*d)),
        welfare_change,
    })
}

/// A profitable deviation found by the stability checker.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityViolation {
    pub i: usize,
    pub j: usize,
    pub kind: ViolationKind,
    /// Reference-point reduction per unit of shifted weight for the agent
    /// who strictly gains.
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// An endpoint strictly gains by moving weight off this link, onto an
    /// existing neighbor or a consenting new partner.
    Cut,
    /// Both endpoints weakly gain (one strictly) from opening this pair at
    /// weight epsilon, funded proportionally from their other links.
    Add,
}

const WAGE_TOL: f64 = 1e-9;

fn weighted_neighbor_average(weights: &DMatrix<f64>, wages: &[f64], i: usize) -> Option<f64> {
    let n = wages.len();
    let budget: f64 = (0..n).map(|j| weights[(i, j)]).sum();
    if budget <= 0.0 {
        return None;
    }
    Some((0..n).map(|j| weights[(i, j)] * wages[j]).sum::<f64>() / budget)
}

/// Checks pairwise stability of a symmetric friendship network under fixed
/// comparison budgets (row sums stay put, so every deviation reallocates
/// weight). An existing link is unstable when either endpoint can strictly
/// lower her reference point by shifting `epsilon` of it toward a poorer
/// existing neighbor, or toward a poorer outsider who weakly consents
/// (funding her side proportionally). An absent pair is unstable when
/// proportional funding weakly helps both and strictly helps one. An empty
/// list means the network is pairwise stable; in particular equal-wage
/// cliques pass and any link between unequal wages is flagged.
pub fn check_pairwise_stability(
    friend_weights: &DMatrix<f64>,
    wages: &[f64],
    epsilon: f64,
) -> Result<Vec<StabilityViolation>> {
    let n = wages.len();
    if friend_weights.nrows() != n || friend_weights.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "weight matrix is {}x{} but there are {n} wages",
            friend_weights.nrows(),
            friend_weights.ncols()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
    }
    for i in 0..n {
        if friend_weights[(i, i)] != 0.0 {
            return Err(Error::InvalidInput(format!("self-link at worker {i}")));
        }
        for j in 0..n {
            let w = friend_weights[(i, j)];
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!("bad weight at ({i}, {j}): {w}")));
            }
            if (w - friend_weights[(j, i)]).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "asymmetric weights at ({i}, {j}): {w} vs {}",
                    friend_weights[(j, i)]
                )));
            }
        }
    }

    let averages: Vec<Option<f64>> =
        (0..n).map(|i| weighted_neighbor_average(friend_weights, wages, i)).collect();

    // best wage an agent can redirect weight to, excluding one partner:
    // any existing neighbor, or any outsider whose own neighbors average at
    // least the agent's wage (she weakly consents to swap toward the agent)
    let best_redirect = |i: usize, excluding: usize| -> Option<f64> {
        let mut best: Option<f64> = None;
        for k in 0..n {
            if k == i || k == excluding {
                continue;
            }
            let reachable = if friend_weights[(i, k)] > 0.0 {
                true
            } else {
                match averages[k] {
                    Some(avg) => avg >= wages[i] - WAGE_TOL,
                    None => false,
                }
            };
            if reachable && best.is_none_or(|b| wages[k] < b) {
                best = Some(wages[k]);
            }
        }
        best
    };

    let mut violations = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if friend_weights[(i, j)] > 0.0 {
                for (a, b) in [(i, j), (j, i)] {
                    if let Some(target) = best_redirect(a, b) {
                        let gain = wages[b] - target;
                        if gain > WAGE_TOL {
                            violations.push(StabilityViolation {
                                i: a,
                                j: b,
                                kind: ViolationKind::Cut,
                                gain: gain * epsilon,
                            });
                        }
                    }
                }
            } else if let (Some(avg_i), Some(avg_j)) = (averages[i], averages[j]) {
                let gain_i = avg_i - wages[j];
                let gain_j = avg_j - wages[i];
                if gain_i >= -WAGE_TOL
                    && gain_j >= -WAGE_TOL
                    && (gain_i > WAGE_TOL || gain_j > WAGE_TOL)
                {
                    violations.push(StabilityViolation {
                        i,
                        j,
                        kind: ViolationKind::Add,
                        gain: gain_i.max(gain_j) * epsilon,
                    });
                }
            }
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn worked_economy(n: usize) -> LaborEconomy {
        // homogeneous coworker strength 0.8 (all friend weight zero)
        LaborEconomy::new(2.0, 2.0, 0.5, 0.8, vec![0.0; n]).unwrap()
    }

    #[test]
    fn no_big_fish_motive_gives_full_sorting() {
        // alpha2 = 0 everywhere: every skilled worker takes the high type
        let economy = LaborEconomy::new(1.5, 1.8, 0.4, 0.6, vec![0.6; 10]).unwrap();
        let eq = solve_sorting(&economy).unwrap();
        assert_abs_diff_eq!(eq.sorting_fraction, 1.0, epsilon = 1e-12);
        for w in 0..economy.n_skilled() {
            assert!(eq.assignments[w].high_firm);
        }
    }

    #[test]
    fn homogeneous_alpha2_hits_the_indifference_point() {
        // gamma e_S (k_H - 1) = alpha2 * gap(c) at gap(c) = 1.5 c gives
        // c* = 1 / (1.5 * 0.8) = 0.8333...
        let eq = solve_sorting(&worked_economy(60)).unwrap();
        assert_abs_diff_eq!(eq.sorting_fraction, 2.0 / (3.0 * 0.8), epsilon = 1e-6);
    }

    #[test]
    fn sorted_assignment_separates_alpha1_exactly() {
        let alpha1: Vec<f64> = (0..40).map(|i| 0.7 * ((i * 17 + 5) % 40) as f64 / 40.0).collect();
        let economy = LaborEconomy::new(1.8, 2.2, 0.5, 0.7, alpha1).unwrap();
        let eq = solve_sorting(&economy).unwrap();
        let high_min = eq
            .assignments
            .iter()
            .filter(|a| a.skilled && a.high_firm)
            .map(|a| a.alpha1)
            .fold(f64::INFINITY, f64::min);
        let low_max = eq
            .assignments
            .iter()
            .filter(|a| a.skilled && !a.high_firm)
            .map(|a| a.alpha1)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(high_min >= low_max, "high min {high_min} vs low max {low_max}");
        assert!(high_min >= eq.alpha1_crit - 1e-12);
        assert!(eq.sorting_fraction > 0.5);
    }

    #[test]
    fn vacancies_balance_exactly() {
        let alpha1: Vec<f64> = (0..30).map(|i| 0.5 * (i % 7) as f64 / 7.0).collect();
        let economy = LaborEconomy::new(1.6, 1.9, 0.45, 0.5, alpha1).unwrap();
        let eq = solve_sorting(&economy).unwrap();
        let at_high = eq.assignments.iter().filter(|a| a.high_firm).count();
        assert_eq!(at_high, economy.n_workers() / 2);
    }

    #[test]
    fn stronger_coworker_comparisons_reduce_sorting() {
        let economy = worked_economy(40);
        let report =
            comparative_statics_sorting(&economy, SortingDimension::Alpha2Shift, 0.05).unwrap();
        assert!(report.direction_holds, "change {}", report.change);
        assert!(report.change < 0.0);
    }

    #[test]
    fn productivity_and_ability_move_sorting_oppositely() {
        let alpha1: Vec<f64> = (0..20).map(|i| 0.6 * (i % 5) as f64 / 5.0).collect();
        let economy = LaborEconomy::new(1.7, 2.1, 0.5, 0.6, alpha1).unwrap();
        let up = comparative_statics_sorting(&economy, SortingDimension::HighProductivity, 0.5).unwrap();
        assert!(up.direction_holds, "k_H change {}", up.change);
        let down = comparative_statics_sorting(&economy, SortingDimension::SkilledAbility, 0.5).unwrap();
        assert!(down.direction_holds, "e_S change {}", down.change);
    }

    #[test]
    fn zero_delta_moves_nothing() {
        let economy = worked_economy(20);
        for dim in [
            SortingDimension::Alpha2Shift,
            SortingDimension::HighProductivity,
            SortingDimension::SkilledAbility,
        ] {
            let report = comparative_statics_sorting(&economy, dim, 0.0).unwrap();
            assert_abs_diff_eq!(report.change, 0.0, epsilon = 1e-12);
        }
        let agg = aggregate_effects(&economy, 0.0).unwrap();
        assert_abs_diff_eq!(agg.output_change, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn higher_alpha1_never_demotes_a_worker() {
        // raising one skilled worker's friend strength (lowering her
        // coworker strength) never moves her from high to low
        let alpha1: Vec<f64> = (0..20).map(|i| 0.5 * (i % 10) as f64 / 10.0).collect();
        let economy = LaborEconomy::new(1.6, 1.8, 0.5, 0.5, alpha1).unwrap();
        let base = solve_sorting(&economy).unwrap();
        for w in 0..economy.n_skilled() {
            if !base.assignments[w].high_firm {
                continue;
            }
            let mut bumped = economy.clone();
            bumped.alpha1[w] = (bumped.alpha1[w] + 0.1).min(bumped.alpha_total);
            let after = solve_sorting(&bumped).unwrap();
            assert!(
                after.assignments[w].high_firm,
                "worker {w} fell out of the high type after raising alpha1"
            );
            assert!(after.assignments[w].wage >= base.assignments[w].wage - 1e-12);
        }
    }

    #[test]
    fn aggregate_effects_move_weakly_down() {
        let alpha1: Vec<f64> = (0..40).map(|i| 0.35 * ((i * 13 + 3) % 40) as f64 / 40.0).collect();
        let economy = LaborEconomy::new(1.8, 2.0, 0.5, 0.5, alpha1).unwrap();
        let report = aggregate_effects(&economy, 0.2).unwrap();
        assert!(report.output_weakly_down, "output change {}", report.output_change);
        assert!(report.variance_weakly_down, "variance change {}", report.variance_change);
        assert!(report.welfare_weakly_down, "welfare changes {:?}", report.welfare_change);
    }

    fn clique(members: &[usize], n: usize, weight: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &a in members {
            for &b in members {
                if a != b {
                    m[(a, b)] = weight;
                }
            }
        }
        m
    }

    #[test]
    fn equal_wage_clique_is_stable() {
        let net = clique(&[0, 1, 2, 3], 4, 0.1);
        let wages = vec![2.0; 4];
        let violations = check_pairwise_stability(&net, &wages, 0.01).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn two_equal_wage_cliques_are_stable() {
        let mut net = clique(&[0, 1, 2], 6, 0.2);
        net += clique(&[3, 4, 5], 6, 0.15);
        let wages = vec![1.0, 1.0, 1.0, 3.0, 3.0, 3.0];
        let violations = check_pairwise_stability(&net, &wages, 0.01).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn cross_wage_link_is_flagged() {
        let mut net = clique(&[0, 1, 2], 6, 0.2);
        net += clique(&[3, 4, 5], 6, 0.15);
        // bridge between wage classes
        net[(0, 3)] = 0.05;
        net[(3, 0)] = 0.05;
        let wages = vec![1.0, 1.0, 1.0, 3.0, 3.0, 3.0];
        let violations = check_pairwise_stability(&net, &wages, 0.01).unwrap();
        assert!(
            violations
                .iter()
                .any(|v| v.kind == ViolationKind::Cut && ((v.i == 0 && v.j == 3) || (v.i == 3 && v.j == 0))),
            "{violations:?}"
        );
    }

    #[test]
    fn isolated_cross_wage_pair_is_flagged_when_poorer_targets_exist() {
        // worker 0 (poor) linked only to worker 3 (rich); workers 1, 2 poor
        // with their own links provide a consenting escape target
        let mut net = clique(&[1, 2], 4, 0.3);
        net[(0, 3)] = 0.4;
        net[(3, 0)] = 0.4;
        let wages = vec![1.0, 1.0, 1.0, 3.0];
        let violations = check_pairwise_stability(&net, &wages, 0.01).unwrap();
        assert!(
            violations
                .iter()
                .any(|v| v.kind == ViolationKind::Cut && v.i == 0 && v.j == 3),
            "{violations:?}"
        );
    }

    #[test]
    fn empty_network_is_trivially_stable() {
        let net = DMatrix::zeros(5, 5);
        let wages = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let violations = check_pairwise_stability(&net, &wages, 0.01).unwrap();
        assert!(violations.is_empty());
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let mut net = DMatrix::zeros(3, 3);
        net[(0, 1)] = 0.5;
        assert!(check_pairwise_stability(&net, &[1.0, 1.0, 1.0], 0.01).is_err());
    }

    #[test]
    fn absent_profitable_pair_is_flagged_as_add() {
        // 0 and 1 both earn 2 but are linked to richer 2 and 3; adding
        // (0, 1) funded from the rich links helps both strictly
        let mut net = DMatrix::zeros(4, 4);
        net[(0, 2)] = 0.3;
        net[(2, 0)] = 0.3;
        net[(1, 3)] = 0.3;
        net[(3, 1)] = 0.3;
        let wages = vec![2.0, 2.0, 5.0, 5.0];
        let violations = check_pairwise_stability(&net, &wages, 0.01).unwrap();
        assert!(
            violations
                .iter()
                .any(|v| v.kind == ViolationKind::Add && v.i == 0 && v.j == 1),
            "{violations:?}"
        );
    }
}
