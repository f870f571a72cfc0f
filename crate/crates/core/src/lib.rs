//! Equilibria of reference-dependent consumption games on weighted social
//! networks, and three derived applications: job search with social
//! reference points, two-type labor-market sorting with coworker
//! comparisons, and portfolio allocation under social comparisons.
//!
//! The core objects are a row-stochastic comparison network `g`, per-agent
//! reference strengths `alpha`, and a concave sub-utility. Equilibrium
//! consumption is proportional to Katz-Bonacich centrality in the linear
//! case and is computed by a Gauss-Seidel fixed point otherwise.

pub mod equilibrium;
pub mod error;
pub mod io;
pub mod mccall;
pub mod net;
pub mod ols;
pub mod portfolio;
pub mod simlab;
mod solvers;
pub mod sorting;
pub mod utility;

pub use error::{Error, Result};
pub use net::{CentralityResult, ReferenceProfile, WeightedNetwork};
pub use utility::{EquilibriumParams, InnerTransform, SubUtility, UtilitySpec};
