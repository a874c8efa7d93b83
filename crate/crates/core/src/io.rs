//! Scenario files and result documents.
//!
//! A scenario file is a JSON object:
//!
//! ```json
//! {
//!   "d0": 100, "horizon": 10, "eta": 2, "units": "percent",
//!   "rates": {"r": 3, "g_nom": 2},
//!   "x_nom": 2,
//!   "perturbations": [{"t": 1, "dx": 1}],
//!   "convention": "ratio"
//! }
//! ```
//!
//! `rates` is either a constant `{r, g_nom}` or an array of `{t, r, g_nom}`
//! covering every period; `x_nom` is either a number or an array of length
//! `horizon`. In `percent` units every debt, rate, surplus and deviation is
//! divided by 100 on input; `eta` is always dimensionless. Unknown keys are
//! rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::domain::{percent_to_ratio, ratio_to_percent, MultiplierSpec, PerturbationSet, RatePair, Scenario};
use crate::error::Error;
use crate::exact::simulate_exact;
use crate::linear::{delta_dynamics, simulate_linear_nominal, PropagationConvention};
use crate::sensitivity::{SensitivityMatrix, SweepRecord, ThresholdReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest horizon a scenario file may declare.
pub const MAX_HORIZON: usize = 100_000;

pub const RESULT_CSV_HEADER: &str = "t,d_nom,d_exact,d_linear,delta_exact,delta_linear";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Ratio,
    Percent,
}

impl Units {
    fn to_internal(self, v: f64) -> f64 {
        match self {
            Units::Ratio => v,
            Units::Percent => percent_to_ratio(v),
        }
    }

    fn to_display(self, v: f64) -> f64 {
        match self {
            Units::Ratio => v,
            Units::Percent => ratio_to_percent(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("missing `units` key (expected \"ratio\" or \"percent\")")]
    MissingUnits,

    #[error("rates: {0}")]
    Rates(String),

    #[error("horizon {0} exceeds the supported maximum of {MAX_HORIZON} periods")]
    HorizonTooLarge(usize),

    #[error(transparent)]
    Invalid(#[from] Error),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantRates {
    pub r: f64,
    pub g_nom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEntry {
    pub t: usize,
    pub r: f64,
    pub g_nom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RatesSpec {
    Constant(ConstantRates),
    PerPeriod(Vec<RateEntry>),
}

impl<'de> Deserialize<'de> for RatesSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        match value {
            Value::Object(_) => ConstantRates::deserialize(value)
                .map(RatesSpec::Constant)
                .map_err(D::Error::custom),
            Value::Array(ref items) if items.iter().all(Value::is_object) => Vec::<RateEntry>::deserialize(value)
                .map(RatesSpec::PerPeriod)
                .map_err(D::Error::custom),
            _ => Err(D::Error::custom(
                "expected {\"r\", \"g_nom\"} or an array of {\"t\", \"r\", \"g_nom\"} objects",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurplusSpec {
    Constant(f64),
    PerPeriod(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationEntry {
    pub t: usize,
    pub dx: f64,
}

/// On-disk scenario document, before unit normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub d0: f64,
    pub horizon: usize,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    pub rates: RatesSpec,
    pub x_nom: SurplusSpec,
    #[serde(default)]
    pub perturbations: Vec<PerturbationEntry>,
    #[serde(default)]
    pub convention: PropagationConvention,
}

/// A scenario file after normalization to internal ratio units.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScenario {
    pub scenario: Scenario,
    pub perturbations: PerturbationSet,
    pub multiplier: MultiplierSpec,
    pub convention: PropagationConvention,
    /// Units the file was written in.
    pub units: Units,
}

impl ScenarioFile {
    /// Normalizes units, expands shorthands and validates.
    pub fn normalize(&self) -> Result<ParsedScenario, ScenarioFileError> {
        let units = self.units.ok_or(ScenarioFileError::MissingUnits)?;
        let horizon = self.horizon;
        if horizon > MAX_HORIZON {
            return Err(ScenarioFileError::HorizonTooLarge(horizon));
        }
        let rates = match &self.rates {
            RatesSpec::Constant(c) => {
                vec![RatePair::new(units.to_internal(c.r), units.to_internal(c.g_nom)); horizon]
            }
            RatesSpec::PerPeriod(entries) => {
                let mut slots: Vec<Option<RatePair>> = vec![None; horizon];
                for e in entries {
                    if e.t == 0 || e.t > horizon {
                        return Err(ScenarioFileError::Rates(format!(
                            "entry for t={} outside periods 1..={horizon}",
                            e.t
                        )));
                    }
                    let slot = &mut slots[e.t - 1];
                    if slot.is_some() {
                        return Err(ScenarioFileError::Rates(format!("duplicate entry for t={}", e.t)));
                    }
                    *slot = Some(RatePair::new(units.to_internal(e.r), units.to_internal(e.g_nom)));
                }
                let filled: Vec<RatePair> = slots.into_iter().flatten().collect();
                if filled.len() != entries.len() || filled.len() != horizon {
                    return Err(Error::LengthMismatch {
                        what: "rates",
                        expected: horizon,
                        actual: filled.len(),
                    }
                    .into());
                }
                filled
            }
        };
        let x_nom = match &self.x_nom {
            SurplusSpec::Constant(x) => vec![units.to_internal(*x); horizon],
            SurplusSpec::PerPeriod(xs) => xs.iter().map(|&x| units.to_internal(x)).collect(),
        };
        let scenario = Scenario::new(units.to_internal(self.d0), horizon, rates, x_nom)?;
        let perturbations =
            PerturbationSet::from_entries(self.perturbations.iter().map(|p| (p.t, units.to_internal(p.dx))))?;
        perturbations.check_within(horizon)?;
        Ok(ParsedScenario {
            scenario,
            perturbations,
            multiplier: MultiplierSpec::new(self.eta)?,
            convention: self.convention,
            units,
        })
    }

    /// Self-describing echo in ratio units with explicit per-period arrays.
    pub fn from_parsed(parsed: &ParsedScenario) -> Self {
        let s = &parsed.scenario;
        ScenarioFile {
            d0: s.d0,
            horizon: s.horizon,
            eta: parsed.multiplier.eta(),
            units: Some(Units::Ratio),
            rates: RatesSpec::PerPeriod(
                s.rates
                    .iter()
                    .enumerate()
                    .map(|(i, rate)| RateEntry {
                        t: i + 1,
                        r: rate.r,
                        g_nom: rate.g_nom,
                    })
                    .collect(),
            ),
            x_nom: SurplusSpec::PerPeriod(s.x_nom.clone()),
            perturbations: parsed
                .perturbations
                .iter()
                .map(|(t, dx)| PerturbationEntry { t, dx })
                .collect(),
            convention: parsed.convention,
        }
    }
}

/// Parses and normalizes a scenario document.
pub fn parse_scenario_file(text: &str) -> Result<ParsedScenario, ScenarioFileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        ScenarioFileError::Parse {
            path,
            message: err.into_inner().to_string(),
        }
    })?;
    file.normalize()
}

pub fn read_scenario_file(path: &Path) -> Result<ParsedScenario, ScenarioFileError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_file(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultRow {
    pub t: usize,
    pub d_nom: f64,
    pub d_exact: f64,
    pub d_linear: f64,
    pub delta_exact: f64,
    pub delta_linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub eta: f64,
    pub convention: PropagationConvention,
    pub units: Units,
    pub tool_version: String,
    pub scenario: ScenarioFile,
}

impl Metadata {
    pub fn new(parsed: &ParsedScenario, units: Units) -> Self {
        Metadata {
            eta: parsed.multiplier.eta(),
            convention: parsed.convention,
            units,
            tool_version: TOOL_VERSION.to_string(),
            scenario: ScenarioFile::from_parsed(parsed),
        }
    }
}

/// Rows hold ratio units; `metadata.units` selects the display units.
///
/// `d_nom` is the first-order nominal path and `d_linear = d_nom + delta_linear`.
/// `delta_exact` is measured against the exact engine's unperturbed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub metadata: Metadata,
}

/// Runs both engines on a parsed scenario.
pub fn build_result_table(parsed: &ParsedScenario, units: Units) -> Result<ResultTable, Error> {
    let s = &parsed.scenario;
    let m = parsed.multiplier;
    let exact_nominal = simulate_exact(s, &PerturbationSet::empty(), m)?;
    let exact = simulate_exact(s, &parsed.perturbations, m)?;
    let linear_nominal = simulate_linear_nominal(s)?;
    let delta_linear = delta_dynamics(s, &parsed.perturbations, m, parsed.convention)?;
    let rows = (0..=s.horizon)
        .map(|t| ResultRow {
            t,
            d_nom: linear_nominal.at(t),
            d_exact: exact.at(t),
            d_linear: linear_nominal.at(t) + delta_linear.at(t),
            delta_exact: exact.at(t) - exact_nominal.at(t),
            delta_linear: delta_linear.at(t),
        })
        .collect();
    Ok(ResultTable {
        rows,
        metadata: Metadata::new(parsed, units),
    })
}

fn display(v: f64, units: Units, round: Option<u32>) -> f64 {
    let v = units.to_display(v);
    match round {
        Some(places) => {
            let scale = 10f64.powi(places as i32);
            (v * scale).round() / scale
        }
        None => v,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("result documents serialize");
    out.push('\n');
    out
}

/// Renders a result table; values are converted to `metadata.units` and
/// optionally rounded to `round` decimals.
pub fn emit_results(tbl: &ResultTable, format: OutputFormat, round: Option<u32>) -> String {
    let units = tbl.metadata.units;
    let rows: Vec<ResultRow> = tbl
        .rows
        .iter()
        .map(|r| ResultRow {
            t: r.t,
            d_nom: display(r.d_nom, units, round),
            d_exact: display(r.d_exact, units, round),
            d_linear: display(r.d_linear, units, round),
            delta_exact: display(r.delta_exact, units, round),
            delta_linear: display(r.delta_linear, units, round),
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(RESULT_CSV_HEADER);
            out.push('\n');
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.t, r.d_nom, r.d_exact, r.d_linear, r.delta_exact, r.delta_linear
                );
            }
            out
        }
        OutputFormat::Json => to_json(&ResultTable {
            rows,
            metadata: tbl.metadata.clone(),
        }),
    }
}

#[derive(Serialize)]
struct SensitivityEntry {
    m: usize,
    t: usize,
    coeff: f64,
}

/// Coefficients in long form, optionally restricted to observation period `at`.
/// Coefficients are dimensionless and never unit-converted.
pub fn emit_sensitivity(
    matrix: &SensitivityMatrix,
    at: Option<usize>,
    metadata: &Metadata,
    format: OutputFormat,
    round: Option<u32>,
) -> String {
    let entries: Vec<SensitivityEntry> = matrix
        .entries()
        .filter(|&(_, t, _)| at.is_none_or(|a| a == t))
        .map(|(m, t, coeff)| SensitivityEntry {
            m,
            t,
            coeff: display(coeff, Units::Ratio, round),
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("m,t,coeff\n");
            for e in &entries {
                let _ = writeln!(out, "{},{},{}", e.m, e.t, e.coeff);
            }
            out
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                entries: Vec<SensitivityEntry>,
                metadata: &'a Metadata,
            }
            to_json(&Doc { entries, metadata })
        }
    }
}

/// Break-even report; debt ratios and the break-even level follow `metadata.units`.
pub fn emit_threshold(
    report: &ThresholdReport,
    metadata: &Metadata,
    format: OutputFormat,
    round: Option<u32>,
) -> String {
    let units = metadata.units;
    let break_even = report.break_even.map(|b| display(b, units, round));
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("t,d_nom_prev,eta_d,classification,break_even\n");
            let be = break_even.map(|b| b.to_string()).unwrap_or_default();
            for r in &report.records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.t,
                    display(r.d_nom_prev, units, round),
                    display(r.eta_d, Units::Ratio, round),
                    r.classification.as_str(),
                    be
                );
            }
            out
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Record {
                t: usize,
                d_nom_prev: f64,
                eta_d: f64,
                classification: crate::sensitivity::Classification,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                records: Vec<Record>,
                break_even: Option<f64>,
                metadata: &'a Metadata,
            }
            let records = report
                .records
                .iter()
                .map(|r| Record {
                    t: r.t,
                    d_nom_prev: display(r.d_nom_prev, units, round),
                    eta_d: display(r.eta_d, Units::Ratio, round),
                    classification: r.classification,
                })
                .collect();
            to_json(&Doc {
                records,
                break_even,
                metadata,
            })
        }
    }
}

/// Sweep records; deviations follow `metadata.units`.
pub fn emit_sweep(records: &[SweepRecord], metadata: &Metadata, format: OutputFormat, round: Option<u32>) -> String {
    let units = metadata.units;
    let converted: Vec<SweepRecord> = records
        .iter()
        .map(|r| SweepRecord {
            eta: r.eta,
            delta_linear: display(r.delta_linear, units, round),
            delta_exact: display(r.delta_exact, units, round),
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("eta,delta_linear,delta_exact\n");
            for r in &converted {
                let _ = writeln!(out, "{},{},{}", r.eta, r.delta_linear, r.delta_exact);
            }
            out
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                records: Vec<SweepRecord>,
                metadata: &'a Metadata,
            }
            to_json(&Doc {
                records: converted,
                metadata,
            })
        }
    }
}
