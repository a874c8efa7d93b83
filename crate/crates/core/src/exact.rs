//! Exact ratio dynamics with multiplier feedback, plus the level-space
//! recursions they are derived from.
//!
//! A surplus deviation `dx` in period `t` lowers that period's growth to
//! `g_nom - eta * dx` and raises the payment to `x_nom + dx`. Feedback acts on
//! deviations only, never on the nominal plan.

use crate::domain::{LevelState, MultiplierSpec, PerturbationSet, RatePair, Scenario, Trajectory};
use crate::error::{Error, Result};

/// Effective growth and surplus in one period once feedback is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Effective {
    growth_factor: f64,
    surplus: f64,
}

fn effective(t: usize, rate: RatePair, x_nom: f64, dx: f64, eta: f64) -> Result<Effective> {
    let growth_factor = 1.0 + (rate.g_nom - eta * dx);
    if growth_factor.is_nan() || growth_factor <= 0.0 {
        return Err(Error::FeedbackCollapse {
            t,
            factor: growth_factor,
        });
    }
    Ok(Effective {
        growth_factor,
        surplus: x_nom + dx,
    })
}

/// One step of the exact map: `d_prev (1 + r) / (1 + g) - x` with
/// `g = g_nom - eta dx` and `x = x_nom + dx`. `t` only labels errors.
pub fn exact_step(t: usize, d_prev: f64, rate: RatePair, x_nom: f64, dx: f64, eta: f64) -> Result<f64> {
    let eff = effective(t, rate, x_nom, dx, eta)?;
    Ok(d_prev * (1.0 + rate.r) / eff.growth_factor - eff.surplus)
}

/// Debt-ratio trajectory under the exact nonlinear dynamics.
pub fn simulate_exact(s: &Scenario, p: &PerturbationSet, m: MultiplierSpec) -> Result<Trajectory> {
    s.check()?;
    p.check_within(s.horizon)?;
    let mut d = Vec::with_capacity(s.horizon + 1);
    d.push(s.d0);
    for t in 1..=s.horizon {
        let next = exact_step(t, d[t - 1], s.rate(t), s.surplus(t), p.get(t), m.eta())?;
        d.push(next);
    }
    Ok(Trajectory { d })
}

/// Debt and GDP levels for periods `0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPath {
    pub debt: Vec<f64>,
    pub gdp: Vec<f64>,
}

impl LevelPath {
    /// `debt[t] / gdp[t]` for every period.
    pub fn ratios(&self) -> Vec<f64> {
        self.debt.iter().zip(&self.gdp).map(|(d, g)| d / g).collect()
    }
}

/// Level-space simulation: `D_t = D_{t-1}(1 + r_t) - x_t G_t` and
/// `G_t = G_{t-1}(1 + g_t)`, with the same effective `g_t`, `x_t` as
/// [`simulate_exact`]. Payments are valued at period-`t` GDP.
pub fn simulate_levels(ls: &LevelState, s: &Scenario, p: &PerturbationSet, m: MultiplierSpec) -> Result<LevelPath> {
    s.check()?;
    p.check_within(s.horizon)?;
    ls.check_against(s)?;
    let mut debt = Vec::with_capacity(s.horizon + 1);
    let mut gdp = Vec::with_capacity(s.horizon + 1);
    debt.push(ls.debt0);
    gdp.push(ls.gdp0);
    for t in 1..=s.horizon {
        let rate = s.rate(t);
        let eff = effective(t, rate, s.surplus(t), p.get(t), m.eta())?;
        let g = gdp[t - 1] * eff.growth_factor;
        let payment = eff.surplus * g;
        debt.push(debt[t - 1] * (1.0 + rate.r) - payment);
        gdp.push(g);
    }
    Ok(LevelPath { debt, gdp })
}
