//! Value types shared by every engine.
//!
//! All quantities are dimensionless fractions: a debt ratio of `1.0` is 100% of
//! GDP and a surplus of `0.02` is 2% of GDP. Percent values only appear at I/O
//! boundaries, see [`percent_to_ratio`] and [`ratio_to_percent`].
//!
//! Period `t = 0` holds the initial condition; periods `1..=horizon` carry rates
//! and surpluses. Per-period sequences are stored zero-based, so period `t`
//! lives at index `t - 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interest and nominal growth for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r: f64,
    pub g_nom: f64,
}

impl RatePair {
    pub fn new(r: f64, g_nom: f64) -> Self {
        Self { r, g_nom }
    }
}

/// The nominal plan: initial debt ratio, per-period rates and surpluses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub d0: f64,
    pub horizon: usize,
    pub rates: Vec<RatePair>,
    pub x_nom: Vec<f64>,
}

impl Scenario {
    /// Builds and validates a scenario.
    pub fn new(d0: f64, horizon: usize, rates: Vec<RatePair>, x_nom: Vec<f64>) -> Result<Self> {
        validate_scenario(Self {
            d0,
            horizon,
            rates,
            x_nom,
        })
    }

    /// Scenario with the same rates and surplus in every period.
    pub fn constant(d0: f64, horizon: usize, r: f64, g_nom: f64, x_nom: f64) -> Result<Self> {
        Self::new(
            d0,
            horizon,
            vec![RatePair::new(r, g_nom); horizon],
            vec![x_nom; horizon],
        )
    }

    /// Checks every invariant, reporting the first violation.
    pub fn check(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::EmptyHorizon);
        }
        if self.rates.len() != self.horizon {
            return Err(Error::LengthMismatch {
                what: "rates",
                expected: self.horizon,
                actual: self.rates.len(),
            });
        }
        if self.x_nom.len() != self.horizon {
            return Err(Error::LengthMismatch {
                what: "x_nom",
                expected: self.horizon,
                actual: self.x_nom.len(),
            });
        }
        if !self.d0.is_finite() {
            return Err(Error::NonFinite { what: "d0", t: 0 });
        }
        for (i, (rate, x)) in self.rates.iter().zip(&self.x_nom).enumerate() {
            let t = i + 1;
            if !rate.r.is_finite() {
                return Err(Error::NonFinite { what: "r", t });
            }
            if !rate.g_nom.is_finite() {
                return Err(Error::NonFinite { what: "g_nom", t });
            }
            if !x.is_finite() {
                return Err(Error::NonFinite { what: "x_nom", t });
            }
            let factor = 1.0 + rate.g_nom;
            if factor <= 0.0 {
                return Err(Error::GrowthFactorNonPositive { t, factor });
            }
        }
        Ok(())
    }

    /// Rates for period `t` (1-based).
    #[inline]
    pub fn rate(&self, t: usize) -> RatePair {
        self.rates[t - 1]
    }

    /// Nominal surplus for period `t` (1-based).
    #[inline]
    pub fn surplus(&self, t: usize) -> f64 {
        self.x_nom[t - 1]
    }
}

/// Returns the scenario iff all of its invariants hold.
pub fn validate_scenario(s: Scenario) -> Result<Scenario> {
    s.check()?;
    Ok(s)
}

/// The fiscal multiplier: a unit change in surplus/GDP lowers same-period
/// nominal growth by `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    eta: f64,
}

impl MultiplierSpec {
    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta >= 0.0 {
            Ok(Self { eta })
        } else {
            Err(Error::InvalidMultiplier(eta))
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Sparse deviations of the surplus from the nominal plan, keyed by period.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerturbationSet {
    entries: BTreeMap<usize, f64>,
}

impl PerturbationSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(t: usize, dx: f64) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(t, dx);
        Self { entries }
    }

    /// Builds a set from `(t, dx)` pairs. Repeated periods are rejected.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut map = BTreeMap::new();
        for (t, dx) in entries {
            if t == 0 {
                return Err(Error::PerturbationOutOfRange { t, horizon: 0 });
            }
            if !dx.is_finite() {
                return Err(Error::NonFinite { what: "dx", t });
            }
            if map.insert(t, dx).is_some() {
                return Err(Error::DuplicatePerturbation(t));
            }
        }
        Ok(Self { entries: map })
    }

    /// Checks that every period lies in `1..=horizon`.
    pub fn check_within(&self, horizon: usize) -> Result<()> {
        match self.entries.keys().find(|&&t| t == 0 || t > horizon) {
            Some(&t) => Err(Error::PerturbationOutOfRange { t, horizon }),
            None => Ok(()),
        }
    }

    /// Deviation at period `t`, zero when absent.
    #[inline]
    pub fn get(&self, t: usize) -> f64 {
        self.entries.get(&t).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Iterates `(t, dx)` in increasing period order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&t, &dx)| (t, dx))
    }

    /// Every deviation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|(&t, &dx)| (t, dx * factor)).collect(),
        }
    }

    /// `alpha * self + beta * other`, period by period.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let mut entries: BTreeMap<usize, f64> = self.entries.iter().map(|(&t, &dx)| (t, alpha * dx)).collect();
        for (&t, &dx) in &other.entries {
            *entries.entry(t).or_insert(0.0) += beta * dx;
        }
        Self { entries }
    }
}

/// Debt ratios `d[0..=horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub d: Vec<f64>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.d.len() - 1
    }

    pub fn at(&self, t: usize) -> f64 {
        self.d[t]
    }

    pub fn terminal(&self) -> f64 {
        self.d[self.d.len() - 1]
    }

    /// Elementwise `self - baseline`.
    pub fn deviation_from(&self, baseline: &Trajectory) -> DeltaTrajectory {
        debug_assert_eq!(self.d.len(), baseline.d.len());
        DeltaTrajectory {
            delta_d: self.d.iter().zip(&baseline.d).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Deviations `Δd[0..=horizon]` from a baseline, with `Δd[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaTrajectory {
    pub delta_d: Vec<f64>,
}

impl DeltaTrajectory {
    pub fn zeros(horizon: usize) -> Self {
        Self {
            delta_d: vec![0.0; horizon + 1],
        }
    }

    pub fn at(&self, t: usize) -> f64 {
        self.delta_d[t]
    }

    pub fn terminal(&self) -> f64 {
        self.delta_d[self.delta_d.len() - 1]
    }
}

/// Debt and GDP in currency units, optionally with the real-growth/deflator
/// decomposition of the scenario's nominal growth.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    pub debt0: f64,
    pub gdp0: f64,
    pub real_growth: Option<Vec<f64>>,
    pub deflator: Option<Vec<f64>>,
}

/// Maximum disagreement between composed and scenario nominal growth.
pub const GROWTH_COMPOSITION_TOL: f64 = 1e-12;

impl LevelState {
    pub fn new(debt0: f64, gdp0: f64) -> Self {
        Self {
            debt0,
            gdp0,
            real_growth: None,
            deflator: None,
        }
    }

    pub fn with_decomposition(mut self, real_growth: Vec<f64>, deflator: Vec<f64>) -> Self {
        self.real_growth = Some(real_growth);
        self.deflator = Some(deflator);
        self
    }

    /// Checks `gdp0 > 0` and, when both components are present, that they
    /// compose to the scenario's nominal growth.
    pub fn check_against(&self, s: &Scenario) -> Result<()> {
        if !self.debt0.is_finite() {
            return Err(Error::InconsistentLevels("initial debt is not finite".into()));
        }
        if !(self.gdp0.is_finite() && self.gdp0 > 0.0) {
            return Err(Error::InconsistentLevels(format!(
                "initial GDP must be positive, got {}",
                self.gdp0
            )));
        }
        if let (Some(real), Some(deflator)) = (&self.real_growth, &self.deflator) {
            if real.len() != s.horizon || deflator.len() != s.horizon {
                return Err(Error::InconsistentLevels(format!(
                    "growth decomposition lengths {}/{} differ from horizon {}",
                    real.len(),
                    deflator.len(),
                    s.horizon
                )));
            }
            for (i, (&gr, &p)) in real.iter().zip(deflator).enumerate() {
                let composed = compose_nominal_growth(gr, p)?;
                let g_nom = s.rates[i].g_nom;
                if (composed - g_nom).abs() > GROWTH_COMPOSITION_TOL {
                    return Err(Error::InconsistentLevels(format!(
                        "composed growth {composed} differs from g_nom {g_nom} at t={}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Nominal growth from real growth and the GDP deflator:
/// `(1 + g_real)(1 + deflator) - 1`.
pub fn compose_nominal_growth(g_real: f64, deflator: f64) -> Result<f64> {
    if (1.0 + g_real).is_nan() || 1.0 + g_real <= 0.0 {
        return Err(Error::InvalidGrowthFactor {
            name: "g_real",
            factor: 1.0 + g_real,
        });
    }
    if (1.0 + deflator).is_nan() || 1.0 + deflator <= 0.0 {
        return Err(Error::InvalidGrowthFactor {
            name: "deflator",
            factor: 1.0 + deflator,
        });
    }
    Ok((1.0 + g_real) * (1.0 + deflator) - 1.0)
}

#[inline]
pub fn percent_to_ratio(v: f64) -> f64 {
    v / 100.0
}

#[inline]
pub fn ratio_to_percent(v: f64) -> f64 {
    v * 100.0
}
