//! Concave sub-utilities `f`, optional inner transforms `m`, and the cost /
//! benefit parameters of the consumption game.
//!
//! Every solver touches `f` only through three functions: its value, its
//! first derivative, and the inverse of that derivative
//! `F(y) = (f')^{-1}(y)`, which maps a marginal-cost ratio back to the gain
//! level at which a first-order condition holds.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// User-supplied sub-utility: value, derivative and inverse derivative.
pub struct CustomSubUtility {
    pub value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub deriv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub inv_deriv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
}

/// Strictly increasing, strictly concave gain function over
/// consumption-minus-reference.
#[derive(Clone)]
pub enum SubUtility {
    /// `f(z) = z^theta` with `theta` in (0, 1).
    Power { theta: f64 },
    /// `f(z) = 2 sqrt(z)`, so `F(y) = y^{-2}`.
    ScaledSqrt,
    /// `f(z) = a0 + a1 z + a2 z^2` with `a1 > 0`, `a2 < 0`.
    Quadratic { a0: f64, a1: f64, a2: f64 },
    Custom(Arc<CustomSubUtility>),
}

impl fmt::Debug for SubUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubUtility::Power { theta } => write!(f, "Power(theta={theta})"),
            SubUtility::ScaledSqrt => write!(f, "ScaledSqrt"),
            SubUtility::Quadratic { a0, a1, a2 } => {
                write!(f, "Quadratic(a0={a0}, a1={a1}, a2={a2})")
            }
            SubUtility::Custom(c) => write!(f, "Custom({})", c.label),
        }
    }
}

impl SubUtility {
    pub fn power(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Parameter(format!(
                "power exponent {theta} outside (0, 1)"
            )));
        }
        Ok(SubUtility::Power { theta })
    }

    pub fn scaled_sqrt() -> Self {
        SubUtility::ScaledSqrt
    }

    pub fn quadratic(a0: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0) || !(a2 < 0.0) {
            return Err(Error::Parameter(format!(
                "quadratic utility needs a1 > 0 and a2 < 0, got a1={a1}, a2={a2}"
            )));
        }
        Ok(SubUtility::Quadratic { a0, a1, a2 })
    }

    /// `f(z)`. Returns NaN outside the domain of the family (e.g. negative
    /// gains under a power utility).
    pub fn value(&self, z: f64) -> f64 {
        match self {
            SubUtility::Power { theta } => {
                if z < 0.0 {
                    f64::NAN
                } else {
                    z.powf(*theta)
                }
            }
            SubUtility::ScaledSqrt => {
                if z < 0.0 {
                    f64::NAN
                } else {
                    2.0 * z.sqrt()
                }
            }
            SubUtility::Quadratic { a0, a1, a2 } => a0 + a1 * z + a2 * z * z,
            SubUtility::Custom(c) => (c.value)(z),
        }
    }

    /// `f'(z)`.
    pub fn deriv(&self, z: f64) -> f64 {
        match self {
            SubUtility::Power { theta } => {
                if z < 0.0 {
                    f64::NAN
                } else {
                    theta * z.powf(theta - 1.0)
                }
            }
            SubUtility::ScaledSqrt => {
                if z < 0.0 {
                    f64::NAN
                } else {
                    1.0 / z.sqrt()
                }
            }
            SubUtility::Quadratic { a1, a2, .. } => a1 + 2.0 * a2 * z,
            SubUtility::Custom(c) => (c.deriv)(z),
        }
    }

    /// `F(y) = (f')^{-1}(y)`.
    pub fn inv_deriv(&self, y: f64) -> f64 {
        match self {
            SubUtility::Power { theta } => {
                if y <= 0.0 {
                    f64::NAN
                } else {
                    (y / theta).powf(1.0 / (theta - 1.0))
                }
            }
            SubUtility::ScaledSqrt => {
                if y <= 0.0 {
                    f64::NAN
                } else {
                    y.powi(-2)
                }
            }
            SubUtility::Quadratic { a1, a2, .. } => (y - a1) / (2.0 * a2),
            SubUtility::Custom(c) => (c.inv_deriv)(y),
        }
    }

    /// Spot-checks strict concavity and the round trip `F(f'(z)) = z` on
    /// the given sample points.
    pub fn validate_on(&self, samples: &[f64]) -> Result<()> {
        let mut prev: Option<(f64, f64)> = None;
        for &z in samples {
            let d = self.deriv(z);
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::Parameter(format!(
                    "f'({z}) = {d} must be finite and positive"
                )));
            }
            let back = self.inv_deriv(d);
            if (back - z).abs() > 1e-9 * z.abs().max(1.0) {
                return Err(Error::Parameter(format!(
                    "F(f'({z})) = {back}, expected {z}"
                )));
            }
            if let Some((zp, dp)) = prev {
                if z > zp && d >= dp {
                    return Err(Error::Parameter(format!(
                        "f' not strictly decreasing between {zp} and {z}"
                    )));
                }
            }
            prev = Some((z, d));
        }
        Ok(())
    }
}

/// User-supplied inner transform; `second` may be omitted, in which case it
/// is recovered by a central finite difference of `deriv`.
pub struct CustomInner {
    pub value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub deriv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub second: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub label: String,
}

/// Inner transform `m` applied to consumption before the comparison:
/// strictly increasing, concave, `m(0) = 0`. `Identity` recovers the
/// closed-form linear model.
#[derive(Clone, Default)]
pub enum InnerTransform {
    #[default]
    Identity,
    /// `m(x) = ln(1 + x)`.
    Log1p,
    /// `m(x) = x^gamma` with `gamma` in (0, 1).
    Power { gamma: f64 },
    Custom(Arc<CustomInner>),
}

impl fmt::Debug for InnerTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerTransform::Identity => write!(f, "Identity"),
            InnerTransform::Log1p => write!(f, "Log1p"),
            InnerTransform::Power { gamma } => write!(f, "Power(gamma={gamma})"),
            InnerTransform::Custom(c) => write!(f, "Custom({})", c.label),
        }
    }
}

impl InnerTransform {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Parameter(format!(
                "inner exponent {gamma} outside (0, 1)"
            )));
        }
        Ok(InnerTransform::Power { gamma })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, InnerTransform::Identity)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            InnerTransform::Identity => x,
            InnerTransform::Log1p => x.ln_1p(),
            InnerTransform::Power { gamma } => {
                if x < 0.0 {
                    f64::NAN
                } else {
                    x.powf(*gamma)
                }
            }
            InnerTransform::Custom(c) => (c.value)(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            InnerTransform::Identity => 1.0,
            InnerTransform::Log1p => 1.0 / (1.0 + x),
            InnerTransform::Power { gamma } => {
                if x < 0.0 {
                    f64::NAN
                } else {
                    gamma * x.powf(gamma - 1.0)
                }
            }
            InnerTransform::Custom(c) => (c.deriv)(x),
        }
    }

    pub fn second(&self, x: f64) -> f64 {
        match self {
            InnerTransform::Identity => 0.0,
            InnerTransform::Log1p => {
                let d = 1.0 + x;
                -1.0 / (d * d)
            }
            InnerTransform::Power { gamma } => {
                if x < 0.0 {
                    f64::NAN
                } else {
                    gamma * (gamma - 1.0) * x.powf(gamma - 2.0)
                }
            }
            InnerTransform::Custom(c) => match &c.second {
                Some(s) => s(x),
                None => {
                    let h = 1e-6 * x.abs().max(1.0);
                    ((c.deriv)(x + h) - (c.deriv)(x - h)) / (2.0 * h)
                }
            },
        }
    }

    /// Checks `m(0) = 0`, positive slope and nonpositive curvature on the
    /// given samples.
    pub fn validate_on(&self, samples: &[f64]) -> Result<()> {
        if self.value(0.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "inner transform must satisfy m(0) = 0, got {}",
                self.value(0.0)
            )));
        }
        for &x in samples {
            let d = self.deriv(x);
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::Parameter(format!(
                    "m'({x}) = {d} must be finite and positive"
                )));
            }
            if self.second(x) > 1e-12 {
                return Err(Error::Parameter(format!("m''({x}) > 0 violates concavity")));
            }
        }
        Ok(())
    }
}

/// Sub-utility plus optional inner transform.
#[derive(Debug, Clone)]
pub struct UtilitySpec {
    pub sub: SubUtility,
    pub inner: InnerTransform,
}

impl UtilitySpec {
    pub fn linear(sub: SubUtility) -> Self {
        Self { sub, inner: InnerTransform::Identity }
    }

    pub fn with_inner(sub: SubUtility, inner: InnerTransform) -> Self {
        Self { sub, inner }
    }
}

/// Marginal cost `c`, common linking benefit `b`, and the utility spec.
#[derive(Debug, Clone)]
pub struct EquilibriumParams {
    pub cost: f64,
    pub link_benefit: f64,
    pub utility: UtilitySpec,
}

impl EquilibriumParams {
    pub fn new(cost: f64, link_benefit: f64, utility: UtilitySpec) -> Result<Self> {
        if !(cost > 0.0) || !cost.is_finite() {
            return Err(Error::Parameter(format!("marginal cost {cost} must be positive")));
        }
        if !link_benefit.is_finite() {
            return Err(Error::Parameter("link benefit must be finite".into()));
        }
        let gain_at_cost = utility.sub.inv_deriv(cost);
        if !gain_at_cost.is_finite() {
            return Err(Error::Parameter(format!(
                "F(c) is undefined at c = {cost} for {:?}",
                utility.sub
            )));
        }
        Ok(Self { cost, link_benefit, utility })
    }
}
