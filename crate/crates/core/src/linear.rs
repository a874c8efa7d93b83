//! First-order debt dynamics.
//!
//! The growth quotient `(1 + r)/(1 + g)` is replaced by `1 + r - g`, giving the
//! nominal recursion `d_t = d_{t-1}(1 + r_t - g_t) - x_t`, its perturbed form
//! with coefficient `(eta d_{t-1} - 1)` on the surplus deviation, and the
//! deviation recursion obtained by subtracting the two.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{DeltaTrajectory, MultiplierSpec, PerturbationSet, RatePair, Scenario, Trajectory};
use crate::error::Result;

/// Per-period growth factor applied to an inherited deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagationConvention {
    /// `1 + r - g_nom`
    #[default]
    Additive,
    /// `(1 + r) / (1 + g_nom)`
    Ratio,
}

impl PropagationConvention {
    #[inline]
    pub fn factor(self, rate: RatePair) -> f64 {
        match self {
            PropagationConvention::Additive => 1.0 + rate.r - rate.g_nom,
            PropagationConvention::Ratio => (1.0 + rate.r) / (1.0 + rate.g_nom),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PropagationConvention::Additive => "additive",
            PropagationConvention::Ratio => "ratio",
        }
    }
}

impl fmt::Display for PropagationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropagationConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "additive" => Ok(Self::Additive),
            "ratio" => Ok(Self::Ratio),
            other => Err(format!("unknown convention `{other}` (expected additive or ratio)")),
        }
    }
}

/// Nominal first-order trajectory.
pub fn simulate_linear_nominal(s: &Scenario) -> Result<Trajectory> {
    s.check()?;
    let mut d = Vec::with_capacity(s.horizon + 1);
    d.push(s.d0);
    for t in 1..=s.horizon {
        let rate = s.rate(t);
        d.push(d[t - 1] * (1.0 + rate.r - rate.g_nom) - s.surplus(t));
    }
    Ok(Trajectory { d })
}

/// First-order trajectory with surplus deviations.
///
/// The deviation coefficient `(eta d_{t-1} - 1)` is evaluated on the nominal
/// first-order trajectory, the same point used by [`delta_dynamics`], so the
/// result is affine in the deviations.
pub fn simulate_linear_perturbed(s: &Scenario, p: &PerturbationSet, m: MultiplierSpec) -> Result<Trajectory> {
    let nominal = simulate_linear_nominal(s)?;
    p.check_within(s.horizon)?;
    let eta = m.eta();
    let mut d = Vec::with_capacity(s.horizon + 1);
    d.push(s.d0);
    for t in 1..=s.horizon {
        let rate = s.rate(t);
        let coeff = eta * nominal.d[t - 1] - 1.0;
        d.push(d[t - 1] * (1.0 + rate.r - rate.g_nom) - s.surplus(t) + coeff * p.get(t));
    }
    Ok(Trajectory { d })
}

/// Deviation recursion `Δd_t = Δd_{t-1} F_t + (eta d_nom[t-1] - 1) Δx_t`.
///
/// The coefficient is evaluated on the nominal first-order trajectory, which
/// makes the additive form exactly equal to perturbed minus nominal.
pub fn delta_dynamics(
    s: &Scenario,
    p: &PerturbationSet,
    m: MultiplierSpec,
    conv: PropagationConvention,
) -> Result<DeltaTrajectory> {
    let nominal = simulate_linear_nominal(s)?;
    p.check_within(s.horizon)?;
    let eta = m.eta();
    let mut delta_d = Vec::with_capacity(s.horizon + 1);
    delta_d.push(0.0);
    for t in 1..=s.horizon {
        let carried = delta_d[t - 1] * conv.factor(s.rate(t));
        delta_d.push(carried + (eta * nominal.d[t - 1] - 1.0) * p.get(t));
    }
    Ok(DeltaTrajectory { delta_d })
}
