//! File formats: CSV/JSON network and profile readers, JSON problem
//! configs, and CSV renderers for solver output.
//!
//! Network CSV: first line the agent count, then an n x n weight matrix.
//! Network JSON: `{"n": ..., "edges": [[i, j, w], ...]}`.
//! Reference profiles: one strength per line.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumResult;
use crate::error::{Error, Result};
use crate::mccall::{McCallProblem, WageOfferDistribution};
use crate::net::{ReferenceProfile, WeightedNetwork};
use crate::sorting::{LaborEconomy, SortingEquilibrium, StabilityViolation};
use crate::utility::{EquilibriumParams, InnerTransform, SubUtility, UtilitySpec};

pub fn read_network_csv(path: &Path) -> Result<WeightedNetwork> {
    let text = std::fs::read_to_string(path)?;
    parse_network_csv(&text)
}

pub fn parse_network_csv(text: &str) -> Result<WeightedNetwork> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty network file".into()))?
        .trim()
        .parse()
        .map_err(|e| Error::InvalidInput(format!("bad agent count: {e}")))?;
    let mut weights = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("missing row {i}")))?;
        let entries: Vec<&str> = line.split(',').collect();
        if entries.len() != n {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} entries, expected {n}",
                entries.len()
            )));
        }
        for (j, raw) in entries.iter().enumerate() {
            weights[(i, j)] = raw
                .trim()
                .parse()
                .map_err(|e| Error::InvalidInput(format!("bad weight at ({i}, {j}): {e}")))?;
        }
    }
    WeightedNetwork::new(weights)
}

pub fn write_network_csv(net: &WeightedNetwork) -> String {
    let n = net.n();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| net.weight(i, j).to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

pub fn read_network_json(path: &Path) -> Result<WeightedNetwork> {
    let text = std::fs::read_to_string(path)?;
    let parsed: NetworkJson = serde_json::from_str(&text)?;
    let mut weights = DMatrix::zeros(parsed.n, parsed.n);
    for (i, j, w) in parsed.edges {
        if i >= parsed.n || j >= parsed.n {
            return Err(Error::InvalidInput(format!("edge ({i}, {j}) out of range")));
        }
        weights[(i, j)] = w;
    }
    WeightedNetwork::new(weights)
}

pub fn write_network_json(net: &WeightedNetwork) -> String {
    let n = net.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if net.weight(i, j) != 0.0 {
                edges.push((i, j, net.weight(i, j)));
            }
        }
    }
    serde_json::to_string_pretty(&NetworkJson { n, edges }).expect("network json")
}

/// Reads a network from CSV or JSON depending on the file extension.
pub fn read_network(path: &Path) -> Result<WeightedNetwork> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_network_json(path),
        _ => read_network_csv(path),
    }
}

pub fn read_profile(path: &Path) -> Result<ReferenceProfile> {
    let text = std::fs::read_to_string(path)?;
    parse_profile(&text)
}

pub fn parse_profile(text: &str) -> Result<ReferenceProfile> {
    let alpha: Vec<f64> = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|e| Error::InvalidInput(format!("bad strength '{l}': {e}")))
        })
        .collect::<Result<_>>()?;
    ReferenceProfile::new(alpha)
}

pub fn write_profile(prof: &ReferenceProfile) -> String {
    let mut out = String::new();
    for a in prof.alpha() {
        out.push_str(&format!("{a}\n"));
    }
    out
}

/// Sub-utility family in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum UtilityConfig {
    Power { theta: f64 },
    ScaledSqrt,
    Quadratic { a0: f64, a1: f64, a2: f64 },
}

impl UtilityConfig {
    pub fn to_sub_utility(&self) -> Result<SubUtility> {
        match self {
            UtilityConfig::Power { theta } => SubUtility::power(*theta),
            UtilityConfig::ScaledSqrt => Ok(SubUtility::scaled_sqrt()),
            UtilityConfig::Quadratic { a0, a1, a2 } => SubUtility::quadratic(*a0, *a1, *a2),
        }
    }
}

/// Inner transform in config files: `"identity"`, `"log1p"`, or
/// `{"power": 0.5}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerConfig {
    #[default]
    Identity,
    Log1p,
    #[serde(untagged)]
    Power {
        power: f64,
    },
}

impl InnerConfig {
    pub fn to_inner(&self) -> Result<InnerTransform> {
        match self {
            InnerConfig::Identity => Ok(InnerTransform::Identity),
            InnerConfig::Log1p => Ok(InnerTransform::Log1p),
            InnerConfig::Power { power } => InnerTransform::power(*power),
        }
    }
}

/// Consumption-game parameters in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumConfig {
    pub cost: f64,
    #[serde(default)]
    pub link_benefit: f64,
    pub utility: UtilityConfig,
    #[serde(default)]
    pub inner: InnerConfig,
}

impl EquilibriumConfig {
    pub fn to_params(&self) -> Result<EquilibriumParams> {
        EquilibriumParams::new(
            self.cost,
            self.link_benefit,
            UtilitySpec::with_inner(self.utility.to_sub_utility()?, self.inner.to_inner()?),
        )
    }
}

/// Offer distribution in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistConfig {
    Uniform,
    BetaScaled { alpha: f64, beta: f64 },
}

/// Search-model parameters in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McCallConfig {
    pub beta: f64,
    pub z: f64,
    pub dist: DistConfig,
    pub utility: UtilityConfig,
}

impl McCallConfig {
    pub fn to_problem(&self) -> Result<McCallProblem> {
        let dist = match self.dist {
            DistConfig::Uniform => WageOfferDistribution::uniform(self.z)?,
            DistConfig::BetaScaled { alpha, beta } => {
                WageOfferDistribution::beta_scaled(self.z, alpha, beta)?
            }
        };
        McCallProblem::new(self.beta, dist, self.utility.to_sub_utility()?)
    }
}

/// Two-type economy in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomyConfig {
    pub skilled_ability: f64,
    pub high_productivity: f64,
    pub surplus_share: f64,
    pub alpha_total: f64,
    pub alpha1: Vec<f64>,
    #[serde(default)]
    pub link_benefit: f64,
    #[serde(default)]
    pub gamma_scaled_coworker: bool,
}

impl EconomyConfig {
    pub fn to_economy(&self) -> Result<LaborEconomy> {
        let mut economy = LaborEconomy::new(
            self.skilled_ability,
            self.high_productivity,
            self.surplus_share,
            self.alpha_total,
            self.alpha1.clone(),
        )?;
        economy.link_benefit = self.link_benefit;
        economy.gamma_scaled_coworker = self.gamma_scaled_coworker;
        Ok(economy)
    }
}

/// Portfolio problem in config files; returns are `(gross return,
/// probability)` rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortfolioConfig {
    pub wealth: f64,
    #[serde(default = "default_risk_free")]
    pub risk_free: f64,
    pub returns: Vec<(f64, f64)>,
    pub utility: UtilityConfig,
    #[serde(default)]
    pub quadratic: Option<QuadraticConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadraticConfig {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

fn default_risk_free() -> f64 {
    1.0
}

/// Equilibrium table: one row per agent.
pub fn equilibrium_to_csv(prof: &ReferenceProfile, result: &EquilibriumResult) -> String {
    let mut out = String::from("agent,alpha,centrality,x_star,u_star\n");
    for i in 0..prof.n() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i,
            prof.alpha()[i],
            result.centrality.centrality[i],
            result.consumption[i],
            result.utility[i]
        ));
    }
    out
}

/// Reservation-wage table: one row per agent.
pub fn wages_to_csv(
    prof: &ReferenceProfile,
    wages: &[f64],
    references: &[f64],
    residual: f64,
    sweeps: usize,
) -> String {
    let mut out = String::from("agent,alpha,reference,w_bar,residual,sweeps\n");
    for i in 0..prof.n() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i,
            prof.alpha()[i],
            references[i],
            wages[i],
            residual,
            sweeps
        ));
    }
    out
}

/// Allocation table: one row per agent.
pub fn allocations_to_csv(prof: &ReferenceProfile, lambdas: &[f64], residuals: &[f64]) -> String {
    let mut out = String::from("agent,alpha,lambda_star,z_residual\n");
    for i in 0..prof.n() {
        out.push_str(&format!("{},{},{},{}\n", i, prof.alpha()[i], lambdas[i], residuals[i]));
    }
    out
}

/// Sorting assignment table: one row per worker.
pub fn assignments_to_csv(eq: &SortingEquilibrium) -> String {
    let mut out = String::from("worker,skilled,firm,wage,alpha1,alpha2,welfare\n");
    for a in &eq.assignments {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            a.worker,
            if a.skilled { "S" } else { "U" },
            if a.high_firm { "H" } else { "L" },
            a.wage,
            a.alpha1,
            a.alpha2,
            a.welfare
        ));
    }
    out
}

/// Stability violations, one row per flagged pair.
pub fn violations_to_csv(violations: &[StabilityViolation]) -> String {
    let mut out = String::from("i,j,kind,gain\n");
    for v in violations {
        out.push_str(&format!("{},{},{:?},{}\n", v.i, v.j, v.kind, v.gain));
    }
    out
}
