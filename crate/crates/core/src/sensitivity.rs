//! Multiperiod superposition, unit-shock sensitivities, break-even
//! classification and multiplier sweeps.
//!
//! A deviation `Δx_m` contributes `(eta d_nom[m-1] - 1) Δx_m` at period `m`
//! and is then carried by one propagation factor per period `m+1..=T_obs`.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{MultiplierSpec, PerturbationSet, Scenario};
use crate::error::{Error, Result};
use crate::exact::simulate_exact;
use crate::linear::{delta_dynamics, simulate_linear_nominal, PropagationConvention};

/// Band around `eta d = 1` classified as neutral.
pub const THRESHOLD_TOL: f64 = 1e-9;

fn check_observation(s: &Scenario, t_obs: usize) -> Result<()> {
    if t_obs > s.horizon {
        return Err(Error::ObservationOutOfRange {
            t: t_obs,
            horizon: s.horizon,
        });
    }
    Ok(())
}

/// Product of propagation factors over periods `from..=to` (empty product is 1).
fn propagation(s: &Scenario, conv: PropagationConvention, from: usize, to: usize) -> f64 {
    (from..=to).map(|j| conv.factor(s.rate(j))).product()
}

/// First-order deviation at `t_obs` as an explicit sum over shocks.
pub fn superpose_delta(
    s: &Scenario,
    p: &PerturbationSet,
    m: MultiplierSpec,
    conv: PropagationConvention,
    t_obs: usize,
) -> Result<f64> {
    let nominal = simulate_linear_nominal(s)?;
    p.check_within(s.horizon)?;
    check_observation(s, t_obs)?;
    Ok(p.iter()
        .take_while(|&(t, _)| t <= t_obs)
        .map(|(t, dx)| (m.eta() * nominal.d[t - 1] - 1.0) * dx * propagation(s, conv, t + 1, t_obs))
        .sum())
}

/// Coefficients `∂Δd_{t}/∂Δx_m` for `1 <= m <= t <= horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityMatrix {
    pub horizon: usize,
    pub eta: f64,
    pub convention: PropagationConvention,
    /// `rows[m - 1][k]` holds the coefficient for observation period `m + k`.
    rows: Vec<Vec<f64>>,
}

impl SensitivityMatrix {
    /// Coefficient for a shock at `m` observed at `t`; zero when `t < m`.
    pub fn get(&self, m: usize, t: usize) -> f64 {
        assert!(
            (1..=self.horizon).contains(&m) && t <= self.horizon,
            "index ({m}, {t}) outside horizon {}",
            self.horizon
        );
        if t < m {
            0.0
        } else {
            self.rows[m - 1][t - m]
        }
    }

    /// Row `m`: coefficients for observation periods `m..=horizon`.
    pub fn row(&self, m: usize) -> &[f64] {
        &self.rows[m - 1]
    }

    /// `Σ_m coeff[m][t] Δx_m`.
    pub fn contract(&self, p: &PerturbationSet, t: usize) -> f64 {
        p.iter()
            .filter(|&(m, _)| m <= t)
            .map(|(m, dx)| self.get(m, t) * dx)
            .sum()
    }

    /// `(m, t, coeff)` over the lower-triangular support, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(k, &c)| (i + 1, i + 1 + k, c)))
    }
}

pub fn sensitivity_matrix(s: &Scenario, m: MultiplierSpec, conv: PropagationConvention) -> Result<SensitivityMatrix> {
    let nominal = simulate_linear_nominal(s)?;
    let rows = (1..=s.horizon)
        .map(|shock| {
            let mut coeff = m.eta() * nominal.d[shock - 1] - 1.0;
            let mut row = Vec::with_capacity(s.horizon - shock + 1);
            row.push(coeff);
            for j in shock + 1..=s.horizon {
                coeff *= conv.factor(s.rate(j));
                row.push(coeff);
            }
            row
        })
        .collect();
    Ok(SensitivityMatrix {
        horizon: s.horizon,
        eta: m.eta(),
        convention: conv,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    AusterityRaisesDebtRatio,
    Neutral,
    AusterityLowersDebtRatio,
}

impl Classification {
    pub fn from_leverage(eta_d: f64) -> Self {
        if (eta_d - 1.0).abs() <= THRESHOLD_TOL {
            Classification::Neutral
        } else if eta_d > 1.0 {
            Classification::AusterityRaisesDebtRatio
        } else {
            Classification::AusterityLowersDebtRatio
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::AusterityRaisesDebtRatio => "AUSTERITY_RAISES_DEBT_RATIO",
            Classification::Neutral => "NEUTRAL",
            Classification::AusterityLowersDebtRatio => "AUSTERITY_LOWERS_DEBT_RATIO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRecord {
    pub t: usize,
    /// Nominal first-order ratio entering period `t`.
    pub d_nom_prev: f64,
    pub eta_d: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub records: Vec<ThresholdRecord>,
    /// `1 / eta`; absent when `eta = 0`.
    pub break_even: Option<f64>,
}

/// Classifies each period by the sign of `eta d_nom[t-1] - 1`.
pub fn threshold_report(s: &Scenario, m: MultiplierSpec) -> Result<ThresholdReport> {
    let nominal = simulate_linear_nominal(s)?;
    let eta = m.eta();
    let records = (1..=s.horizon)
        .map(|t| {
            let d_nom_prev = nominal.d[t - 1];
            let eta_d = eta * d_nom_prev;
            ThresholdRecord {
                t,
                d_nom_prev,
                eta_d,
                classification: Classification::from_leverage(eta_d),
            }
        })
        .collect();
    Ok(ThresholdReport {
        records,
        break_even: (eta > 0.0).then(|| 1.0 / eta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eta: f64,
    pub delta_linear: f64,
    pub delta_exact: f64,
}

/// Evaluates both engines at `t_obs` for each multiplier, in input order.
pub fn eta_sweep(
    s: &Scenario,
    p: &PerturbationSet,
    etas: &[f64],
    conv: PropagationConvention,
    t_obs: usize,
) -> Result<Vec<SweepRecord>> {
    s.check()?;
    p.check_within(s.horizon)?;
    check_observation(s, t_obs)?;
    if etas.is_empty() {
        return Err(Error::EmptySweep);
    }
    etas.par_iter()
        .map(|&eta| {
            sweep_point(s, p, eta, conv, t_obs).map_err(|source| Error::AtEta {
                eta,
                source: Box::new(source),
            })
        })
        .collect()
}

fn sweep_point(
    s: &Scenario,
    p: &PerturbationSet,
    eta: f64,
    conv: PropagationConvention,
    t_obs: usize,
) -> Result<SweepRecord> {
    let m = MultiplierSpec::new(eta)?;
    let delta_linear = delta_dynamics(s, p, m, conv)?.at(t_obs);
    let baseline = simulate_exact(s, &PerturbationSet::empty(), m)?;
    let shocked = simulate_exact(s, p, m)?;
    Ok(SweepRecord {
        eta,
        delta_linear,
        delta_exact: shocked.at(t_obs) - baseline.at(t_obs),
    })
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn eta_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Locates the first sign change of `value` along a sweep.
///
/// Returns the bracketing multipliers. When the value is exactly zero on one
/// or more grid points between opposite signs, the bracket spans those points.
pub fn sign_change<F>(records: &[SweepRecord], value: F) -> Option<(f64, f64)>
where
    F: Fn(&SweepRecord) -> f64,
{
    let mut last_nonzero: Option<(usize, bool)> = None;
    for (i, rec) in records.iter().enumerate() {
        let v = value(rec);
        if v == 0.0 {
            continue;
        }
        let positive = v > 0.0;
        if let Some((j, was_positive)) = last_nonzero {
            if was_positive != positive {
                return Some(if i == j + 1 {
                    (records[j].eta, records[i].eta)
                } else {
                    (records[j + 1].eta, records[i - 1].eta)
                });
            }
        }
        last_nonzero = Some((i, positive));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::simulate_linear_perturbed;

    fn example() -> Scenario {
        Scenario::constant(1.0, 10, 0.03, 0.02, 0.02).unwrap()
    }

    fn eta(v: f64) -> MultiplierSpec {
        MultiplierSpec::new(v).unwrap()
    }

    #[test]
    fn combined_shocks_superpose() {
        let s = example();
        let conv = PropagationConvention::Ratio;
        let both = PerturbationSet::from_entries([(1, 0.01), (4, -0.01)]).unwrap();
        let a = superpose_delta(&s, &PerturbationSet::single(1, 0.01), eta(2.0), conv, 10).unwrap();
        let b = superpose_delta(&s, &PerturbationSet::single(4, -0.01), eta(2.0), conv, 10).unwrap();
        let ab = superpose_delta(&s, &both, eta(2.0), conv, 10).unwrap();
        assert!((ab - (a + b)).abs() < 1e-15);
    }

    #[test]
    fn shock_at_observation_has_no_propagation() {
        let s = example();
        let nominal = simulate_linear_nominal(&s).unwrap();
        let v = superpose_delta(
            &s,
            &PerturbationSet::single(6, 0.02),
            eta(1.5),
            PropagationConvention::Ratio,
            6,
        )
        .unwrap();
        assert_eq!(v, (1.5 * nominal.at(5) - 1.0) * 0.02);
    }

    #[test]
    fn fourth_period_shock_with_six_ratio_factors() {
        // Brute force: d_nom[3] = 0.969699, coefficient 2 d - 1, six factors 1.03/1.02.
        let coeff = 2.0 * 0.969_699 - 1.0;
        let mut expected = coeff * -0.01;
        for _ in 0..6 {
            expected *= 1.03 / 1.02;
        }
        let v = superpose_delta(
            &example(),
            &PerturbationSet::single(4, -0.01),
            eta(2.0),
            PropagationConvention::Ratio,
            10,
        )
        .unwrap();
        assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
        assert!((v + 0.009_95).abs() < 1e-4);
    }

    #[test]
    fn shocks_after_observation_are_ignored() {
        let s = example();
        let p = PerturbationSet::from_entries([(2, 0.01), (8, 0.05)]).unwrap();
        let v = superpose_delta(&s, &p, eta(2.0), PropagationConvention::Additive, 5).unwrap();
        let w = superpose_delta(
            &s,
            &PerturbationSet::single(2, 0.01),
            eta(2.0),
            PropagationConvention::Additive,
            5,
        )
        .unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn observation_beyond_horizon_rejected() {
        let err = superpose_delta(
            &example(),
            &PerturbationSet::empty(),
            eta(1.0),
            PropagationConvention::Additive,
            11,
        )
        .unwrap_err();
        assert_eq!(err, Error::ObservationOutOfRange { t: 11, horizon: 10 });
    }

    #[test]
    fn matrix_reference_entries() {
        let s = example();
        let ratio = sensitivity_matrix(&s, eta(2.0), PropagationConvention::Ratio).unwrap();
        let additive = sensitivity_matrix(&s, eta(2.0), PropagationConvention::Additive).unwrap();
        let mut r = 1.0;
        let mut a = 1.0;
        for _ in 0..9 {
            r *= 1.03 / 1.02;
            a *= 1.01;
        }
        assert!((ratio.get(1, 10) - r).abs() < 1e-14);
        assert!((additive.get(1, 10) - a).abs() < 1e-14);
        assert!((ratio.get(1, 10) - 1.0918).abs() < 5e-5);
        assert!((additive.get(1, 10) - 1.0937).abs() < 5e-5);
        assert_eq!(ratio.get(5, 3), 0.0);
    }

    #[test]
    fn matrix_diagonal_and_vanishing_rows() {
        let s = Scenario::constant(0.5, 6, 0.03, 0.03, 0.0).unwrap();
        let matrix = sensitivity_matrix(&s, eta(2.0), PropagationConvention::Additive).unwrap();
        // d_nom stays at 0.5 with balanced rates and no surplus, so every row vanishes.
        assert!(matrix.entries().all(|(_, _, c)| c == 0.0));

        let s = example();
        let nominal = simulate_linear_nominal(&s).unwrap();
        let matrix = sensitivity_matrix(&s, eta(1.7), PropagationConvention::Ratio).unwrap();
        for m in 1..=10 {
            assert_eq!(matrix.get(m, m), 1.7 * nominal.at(m - 1) - 1.0);
            assert_eq!(matrix.row(m).len(), 11 - m);
        }
        assert_eq!(matrix.entries().count(), 55);
    }

    #[test]
    fn matrix_matches_finite_differences() {
        let s = example();
        let m = eta(2.0);
        let matrix = sensitivity_matrix(&s, m, PropagationConvention::Additive).unwrap();
        let h = 1e-7;
        for shock in 1..=10 {
            let up = simulate_linear_perturbed(&s, &PerturbationSet::single(shock, h), m).unwrap();
            let down = simulate_linear_perturbed(&s, &PerturbationSet::single(shock, -h), m).unwrap();
            for t in shock..=10 {
                let fd = (up.at(t) - down.at(t)) / (2.0 * h);
                let c = matrix.get(shock, t);
                assert!((fd - c).abs() <= 1e-5 * c.abs().max(1e-3), "({shock},{t}): {fd} vs {c}");
            }
        }
    }

    #[test]
    fn reference_thresholds() {
        let report = threshold_report(&example(), eta(2.0)).unwrap();
        assert_eq!(report.break_even, Some(0.5));
        assert!(report
            .records
            .iter()
            .all(|r| r.classification == Classification::AusterityRaisesDebtRatio));

        let flat = Scenario::constant(1.0, 5, 0.02, 0.02, 0.0).unwrap();
        let report = threshold_report(&flat, eta(0.8)).unwrap();
        assert!(report
            .records
            .iter()
            .all(|r| r.classification == Classification::AusterityLowersDebtRatio));

        let report = threshold_report(&flat, eta(1.0)).unwrap();
        assert_eq!(report.records[0].classification, Classification::Neutral);

        let report = threshold_report(&flat, eta(0.0)).unwrap();
        assert_eq!(report.break_even, None);
    }

    #[test]
    fn classification_band() {
        assert_eq!(Classification::from_leverage(1.0 + 5e-10), Classification::Neutral);
        assert_eq!(Classification::from_leverage(1.0 - 5e-10), Classification::Neutral);
        assert_eq!(
            Classification::from_leverage(1.0 + 2e-9),
            Classification::AusterityRaisesDebtRatio
        );
        assert_eq!(
            Classification::from_leverage(1.0 - 2e-9),
            Classification::AusterityLowersDebtRatio
        );
    }

    #[test]
    fn sweep_preserves_order_and_reference_point() {
        let s = example();
        let p = PerturbationSet::single(1, 0.01);
        let etas = [2.0, 0.0, 1.0, 3.0];
        let records = eta_sweep(&s, &p, &etas, PropagationConvention::Ratio, 10).unwrap();
        assert_eq!(records.iter().map(|r| r.eta).collect::<Vec<_>>(), etas);
        assert!((records[0].delta_linear - 0.0109).abs() < 5e-5);
        assert!((records[0].delta_exact - 0.0111).abs() < 5e-5);
    }

    #[test]
    fn sweep_zero_crossing_at_inverse_debt() {
        let s = example();
        let p = PerturbationSet::single(1, 0.01);
        let records = eta_sweep(&s, &p, &eta_grid(0.0, 3.0, 31), PropagationConvention::Additive, 10).unwrap();
        let (lo, hi) = sign_change(&records, |r| r.delta_linear).unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi, "({lo}, {hi})");
    }

    #[test]
    fn sweep_without_perturbations_is_flat() {
        let records = eta_sweep(
            &example(),
            &PerturbationSet::empty(),
            &[0.5, 1.0, 2.5],
            PropagationConvention::Additive,
            10,
        )
        .unwrap();
        assert!(records.iter().all(|r| r.delta_linear == 0.0 && r.delta_exact == 0.0));
        assert_eq!(sign_change(&records, |r| r.delta_linear), None);
    }

    #[test]
    fn sweep_errors_name_the_multiplier() {
        let s = example();
        let p = PerturbationSet::single(2, 0.2);
        let err = eta_sweep(&s, &p, &[1.0, 6.0], PropagationConvention::Additive, 10).unwrap_err();
        match &err {
            Error::AtEta { eta, source } => {
                assert_eq!(*eta, 6.0);
                assert!(matches!(**source, Error::FeedbackCollapse { t: 2, .. }));
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err.is_arithmetic());
        assert!(matches!(
            eta_sweep(&s, &p, &[-1.0], PropagationConvention::Additive, 10),
            Err(Error::AtEta { .. })
        ));
        assert_eq!(
            eta_sweep(&s, &p, &[], PropagationConvention::Additive, 10),
            Err(Error::EmptySweep)
        );
    }

    #[test]
    fn grid_spacing() {
        assert_eq!(eta_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(eta_grid(2.0, 5.0, 1), vec![2.0]);
        assert!(eta_grid(0.0, 1.0, 0).is_empty());
    }
}
