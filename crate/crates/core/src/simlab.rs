//! End-to-end simulation experiment: draw row-normalized random networks
//! and reference strengths, solve the endogenous reservation wages on each,
//! then regress the wages on Bonacich centrality and reference strength.
//! Per-network RNG substreams keep every network's draw independent of
//! `n_networks` and of how the work is scheduled, so output is byte-stable
//! across reruns and worker counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use crate::equilibrium::FixedPointConfig;
use crate::error::{Error, Result};
use crate::mccall::{reservation_wage_endogenous, reservation_wage_exogenous, McCallProblem, WageOfferDistribution};
use crate::net::{bonacich, erdos_renyi_with_rng, ReferenceProfile};
use crate::ols::{ols, OlsFit};
use crate::utility::SubUtility;

/// Experiment parameters. The defaults are the benchmark setup: 50 agents,
/// link probability 0.2, strengths uniform on [0.4, 0.8], top offer 100,
/// discount factor 0.98, gain exponent 0.25, 1000 networks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub link_prob: f64,
    pub alpha_low: f64,
    pub alpha_high: f64,
    pub max_wage: f64,
    pub beta: f64,
    pub utility_exponent: f64,
    pub n_networks: usize,
    pub master_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_agents: 50,
            link_prob: 0.2,
            alpha_low: 0.4,
            alpha_high: 0.8,
            max_wage: 100.0,
            beta: 0.98,
            utility_exponent: 0.25,
            n_networks: 1000,
            master_seed: 0,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::Parameter("need at least two agents".into()));
        }
        if self.n_networks == 0 {
            return Err(Error::Parameter("need at least one network".into()));
        }
        if !(self.alpha_low <= self.alpha_high) || self.alpha_low < 0.0 || self.alpha_high >= 1.0 {
            return Err(Error::Parameter(format!(
                "strength range [{}, {}] must sit inside [0, 1)",
                self.alpha_low, self.alpha_high
            )));
        }
        Ok(())
    }

    fn problem(&self) -> Result<McCallProblem> {
        McCallProblem::new(
            self.beta,
            WageOfferDistribution::uniform(self.max_wage)?,
            SubUtility::power(self.utility_exponent)?,
        )
    }
}

/// One agent in one simulated network.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationRecord {
    pub network: usize,
    pub agent: usize,
    pub alpha: f64,
    pub bonacich: f64,
    pub reservation_wage: f64,
}

/// Full experiment output: one record per (network, agent), the two
/// regression fits, and resampling diagnostics.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub records: Vec<SimulationRecord>,
    pub fit_no_constant: OlsFit,
    pub fit_with_constant: OlsFit,
    /// Networks redrawn after a solver failure.
    pub resampled_networks: usize,
    /// Empty-row redraws inside the network generator.
    pub row_redraws: usize,
}

const RETRY_BUDGET: usize = 3;

struct NetworkSolution {
    records: Vec<SimulationRecord>,
    resamples: usize,
    row_redraws: usize,
}

fn solve_one_network(
    config: &SimulationConfig,
    problem: &McCallProblem,
    warm_start: &[f64],
    id: usize,
) -> Result<NetworkSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(1 + id as u64);
    let mut resamples = 0;
    let mut row_redraws = 0;
    loop {
        let attempt = (|| -> Result<Vec<SimulationRecord>> {
            let (net, redraws) = erdos_renyi_with_rng(config.n_agents, config.link_prob, &mut rng)?;
            row_redraws += redraws;
            let alpha: Vec<f64> = (0..config.n_agents)
                .map(|_| config.alpha_low + (config.alpha_high - config.alpha_low) * rng.random::<f64>())
                .collect();
            let prof = ReferenceProfile::new(alpha)?;
            let centrality = bonacich(&net, &prof)?;
            let mut fp = FixedPointConfig::default();
            fp.initial = Some(warm_start.to_vec());
            let wages = reservation_wage_endogenous(problem, &net, &prof, &fp)?;
            Ok((0..config.n_agents)
                .map(|agent| SimulationRecord {
                    network: id,
                    agent,
                    alpha: prof.alpha()[agent],
                    bonacich: centrality.centrality[agent],
                    reservation_wage: wages.wages[agent],
                })
                .collect())
        })();
        match attempt {
            Ok(records) => return Ok(NetworkSolution { records, resamples, row_redraws }),
            Err(err) => {
                resamples += 1;
                if resamples > RETRY_BUDGET {
                    return Err(Error::Convergence(format!(
                        "network {id} failed {RETRY_BUDGET} resamples; last error: {err}"
                    )));
                }
            }
        }
    }
}

/// Record table plus resampling diagnostics, without the regressions.
#[derive(Debug, Clone)]
pub struct NetworkRuns {
    pub records: Vec<SimulationRecord>,
    pub resampled_networks: usize,
    pub row_redraws: usize,
}

/// Generates and solves every network. Networks are independent and solved
/// in parallel; records are merged in network order so the output does not
/// depend on the worker count.
pub fn run_networks(config: &SimulationConfig) -> Result<NetworkRuns> {
    config.validate()?;
    let problem = config.problem()?;
    // isolated-agent solution as a warm start for every network
    let isolated = reservation_wage_exogenous(&problem, 0.0)?.wage;
    let warm_start = vec![isolated; config.n_agents];

    let solutions: Vec<NetworkSolution> = (0..config.n_networks)
        .into_par_iter()
        .map(|id| solve_one_network(config, &problem, &warm_start, id))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(config.n_networks * config.n_agents);
    let mut resampled_networks = 0;
    let mut row_redraws = 0;
    for s in solutions {
        resampled_networks += s.resamples;
        row_redraws += s.row_redraws;
        records.extend(s.records);
    }
    Ok(NetworkRuns { records, resampled_networks, row_redraws })
}

/// Runs the whole experiment: solved networks plus the two regressions of
/// the reservation wage on (bonacich, alpha).
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationOutput> {
    let runs = run_networks(config)?;
    let (fit_no_constant, fit_with_constant) = regress(&runs.records)?;
    Ok(SimulationOutput {
        records: runs.records,
        fit_no_constant,
        fit_with_constant,
        resampled_networks: runs.resampled_networks,
        row_redraws: runs.row_redraws,
    })
}

/// OLS of the reservation wage on (bonacich, alpha), without and with a
/// constant.
pub fn regress(records: &[SimulationRecord]) -> Result<(OlsFit, OlsFit)> {
    let n = records.len();
    let design = DMatrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            records[i].bonacich
        } else {
            records[i].alpha
        }
    });
    let y = DVector::from_fn(n, |i, _| records[i].reservation_wage);
    let names = ["r_bonacich", "alpha"];
    Ok((ols(&design, &y, false, &names)?, ols(&design, &y, true, &names)?))
}

/// Records as CSV, one row per (network, agent).
pub fn records_to_csv(records: &[SimulationRecord]) -> String {
    let mut out = String::from("network,agent,alpha,r_bonacich,reservation_wage\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.network, r.agent, r.alpha, r.bonacich, r.reservation_wage
        ));
    }
    out
}

/// Plot-ready scatter files: (bonacich, wage) and (alpha, wage) pairs.
/// Rows follow record order unless `sorted_by_x` is set.
pub fn export_scatter(records: &[SimulationRecord], sorted_by_x: bool) -> (String, String) {
    let mut centrality: Vec<(f64, f64)> =
        records.iter().map(|r| (r.bonacich, r.reservation_wage)).collect();
    let mut alpha: Vec<(f64, f64)> =
        records.iter().map(|r| (r.alpha, r.reservation_wage)).collect();
    if sorted_by_x {
        centrality.sort_by(|a, b| a.0.total_cmp(&b.0));
        alpha.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let render = |header: &str, rows: &[(f64, f64)]| -> String {
        let mut out = String::from(header);
        for (x, y) in rows {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    };
    (
        render("r_bonacich,reservation_wage\n", &centrality),
        render("alpha,reservation_wage\n", &alpha),
    )
}
