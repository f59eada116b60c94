//! Game-theoretic mosquito population dynamics under household breeding-site
//! control.
//!
//! The model couples a two-stage (aquatic/adult) mosquito population with
//! imitation dynamics for the fraction of households removing breeding
//! sites; household behavior feeds back on the aquatic carrying capacity.
//! Three variants of the household payoff are supported: constant payoffs,
//! constant payoffs with a steady public-health intervention, and an
//! infection risk that grows with adult abundance.
//!
//! The crate provides:
//!
//! - [`model`]: the right-hand sides and the invariant box;
//! - [`equilibria`]: every closed-form steady state with existence
//!   conditions;
//! - [`stability`]: analytic Jacobians, eigenvalues, Routh-Hurwitz
//!   classification, and the Hopf boundary of the partial-control state;
//! - [`integrator`]: an adaptive Dormand-Prince 5(4) solver;
//! - [`analysis`]: attractor detection and oscillation amplitude/period
//!   measurement;
//! - [`sweep`]: data-parallel two-axis parameter sweeps (rayon-backed under
//!   the default `parallel` feature, with a sequential fallback).

pub mod analysis;
pub mod cubic;
pub mod equilibria;
pub mod integrator;
pub mod model;
pub mod params;
pub mod peaks;
pub mod scenarios;
pub mod stability;
pub mod sweep;
pub mod testing;

pub use analysis::{
    detect_attractor, oscillation_metrics, AnalysisConfig, AttractorKind, AttractorOutcome,
    OscillationMetrics,
};
pub use equilibria::{
    e05, e05_existence_interval, enumerate_equilibria, Equilibrium, EquilibriumLabel,
    EquilibriumSet,
};
pub use integrator::{integrate, IntegratorConfig, Trajectory};
pub use model::{carrying_capacity, payoff_not_control, rhs, ModelError};
pub use params::{
    BehaviorParams, DerivedQuantities, EntomologicalParams, HabitatParams, ModelParams,
    ModelVariant, ParamError, State,
};
pub use stability::{
    char_poly_coeffs_e05, classify_equilibrium, critical_imitation_rate, eigenvalues3,
    hopf_analysis, hopf_frequency, jacobian, CharPolyCoeffs, HopfAnalysis, HopfFrequency,
    Jacobian3, Stability, StabilityError, StabilityVerdict, VerdictMethod,
};
pub use sweep::{
    run_sweep, run_sweep_sequential, sweep_oscillations, sweep_regions, RegionLabel, SweepAxis,
    SweepCell, SweepMode, SweepParam, SweepResult, SweepSpec,
};

#[cfg(feature = "parallel")]
pub use sweep::run_sweep_parallel;
