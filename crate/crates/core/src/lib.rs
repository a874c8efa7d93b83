//! Debt-to-GDP dynamics under fiscal-multiplier feedback.
//!
//! The [`exact`] engine iterates the ratio map `d_t = d_{t-1}(1+r_t)/(1+g_t) - x_t`
//! where a surplus deviation `Δx_t` also lowers growth by `eta Δx_t`. The
//! [`linear`] engine iterates its first-order form, and [`sensitivity`] builds
//! unit-shock coefficients, break-even classifications and multiplier sweeps on
//! top of it. [`io`] and [`cli`] read scenario files and emit CSV/JSON.
//!
//! ```
//! use debtdyn::{simulate_exact, MultiplierSpec, PerturbationSet, Scenario};
//!
//! let s = Scenario::constant(1.0, 10, 0.03, 0.02, 0.02).unwrap();
//! let eta = MultiplierSpec::new(2.0).unwrap();
//! let base = simulate_exact(&s, &PerturbationSet::empty(), eta).unwrap();
//! let shocked = simulate_exact(&s, &PerturbationSet::single(1, 0.01), eta).unwrap();
//! assert!(shocked.terminal() > base.terminal());
//! ```

pub mod cli;
pub mod domain;
pub mod error;
pub mod exact;
pub mod io;
pub mod linear;
pub mod sensitivity;

pub use domain::{
    compose_nominal_growth, percent_to_ratio, ratio_to_percent, validate_scenario, DeltaTrajectory, LevelState,
    MultiplierSpec, PerturbationSet, RatePair, Scenario, Trajectory,
};
pub use error::{Error, Result};
pub use exact::{simulate_exact, simulate_levels, LevelPath};
pub use linear::{delta_dynamics, simulate_linear_nominal, simulate_linear_perturbed, PropagationConvention};
pub use sensitivity::{
    eta_sweep, sensitivity_matrix, superpose_delta, threshold_report, Classification, SensitivityMatrix, SweepRecord,
    ThresholdRecord, ThresholdReport,
};
