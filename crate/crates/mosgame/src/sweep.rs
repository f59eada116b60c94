//! Two-axis parameter sweeps: per-cell analytic classification, simulation,
//! attractor detection, and oscillation measurement.
//!
//! Cells are independent and evaluated concurrently when the `parallel`
//! feature is enabled (the default); results land in pre-assigned cells, so
//! the output is identical for any worker count and for the sequential
//! fallback. Per-cell failures are recorded in the cell and never abort the
//! sweep.

use crate::analysis::{
    detect_attractor, oscillation_metrics, AnalysisConfig, AttractorKind, OscillationMetrics,
};
use crate::equilibria::{e05_existence_interval, enumerate_equilibria, EquilibriumLabel};
use crate::integrator::{integrate, IntegratorConfig};
use crate::params::{ModelParams, ModelVariant, ParamError, State};
use crate::stability::{classify_equilibrium, hopf_analysis, Stability};
use serde::{Deserialize, Serialize};

/// Parameter addressed by a sweep axis. Derived axes (`N`, the risk
/// difference, and the risk ratio) hold the remaining behavior parameters
/// fixed and solve for the underlying rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    /// Basic offspring number; adjusts the egg-laying rate `b`.
    #[serde(rename = "N")]
    BasicOffspring,
    #[serde(rename = "b")]
    EggRate,
    /// `r_c - r_d`, holding `r_d` fixed.
    #[serde(rename = "rc_minus_rd")]
    RiskDifference,
    /// `r_c / r_d`, holding `r_d` fixed.
    #[serde(rename = "rc_over_rd")]
    RiskRatio,
    #[serde(rename = "r_c")]
    RiskCost,
    #[serde(rename = "k")]
    ImitationRate,
    #[serde(rename = "m")]
    Sensitivity,
    #[serde(rename = "gamma")]
    InterventionRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisScale {
    Linear,
    Log,
}

/// One sweep axis: `count` grid points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "default_scale")]
    pub scale: AxisScale,
}

fn default_scale() -> AxisScale {
    AxisScale::Linear
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count.max(1);
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    AxisScale::Linear => self.min + t * (self.max - self.min),
                    AxisScale::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }
}

/// Which per-cell outputs a sweep produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Analytic region label plus simulated attractor per cell.
    Regions,
    /// Regions plus amplitude/period metrics where the partial-control
    /// state is unstable.
    Oscillations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub initial_state: State,
    pub t_span: (f64, f64),
    pub integrator: IntegratorConfig,
    pub analysis: AnalysisConfig,
    pub mode: SweepMode,
}

/// Analytic classification of a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionLabel {
    /// Exactly one steady state is locally asymptotically stable.
    Stable(EquilibriumLabel),
    /// The partial-control state exists and is unstable: the oscillation
    /// window.
    OscillationWindow,
    /// No steady state is stable, or a verdict was marginal.
    Indeterminate,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionLabel::Stable(label) => write!(f, "{label}-LAS"),
            RegionLabel::OscillationWindow => f.write_str("E05-unstable"),
            RegionLabel::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

/// One evaluated grid cell. `params` carries the exact bundle the cell ran
/// with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub axis1: f64,
    pub axis2: f64,
    /// Basic offspring number of the resolved bundle.
    pub n: f64,
    pub params: ModelParams,
    pub analytic: Option<RegionLabel>,
    pub simulated: Option<AttractorKind>,
    pub convergence_error: Option<f64>,
    pub metrics: Option<OscillationMetrics>,
    /// First failure encountered while evaluating the cell, if any.
    pub error: Option<String>,
}

/// Boundary curves of the partial-control state evaluated along axis 1:
/// the existence-interval edges and the instability-window roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlayCurves {
    pub axis1: Vec<f64>,
    pub n: Vec<f64>,
    pub existence_lo: Vec<Option<f64>>,
    pub existence_hi: Vec<Option<f64>>,
    pub x1: Vec<Option<f64>>,
    pub x2: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis1_values: Vec<f64>,
    pub axis2_values: Vec<f64>,
    /// Row-major over (axis1, axis2).
    pub cells: Vec<SweepCell>,
    /// Present when axis 1 determines the offspring number for the
    /// prevalence-dependent variant.
    pub overlays: Option<OverlayCurves>,
}

impl SweepResult {
    pub fn cell(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[i * self.axis2_values.len() + j]
    }
}

/// Apply one axis value to a parameter bundle.
pub fn apply_axis(
    base: &ModelParams,
    param: SweepParam,
    value: f64,
) -> Result<ModelParams, ParamError> {
    let mut p = *base;
    match param {
        SweepParam::BasicOffspring => {
            p.entomology.b = p.entomology.egg_rate_for_offspring_number(value);
        }
        SweepParam::EggRate => p.entomology.b = value,
        SweepParam::RiskDifference => p.behavior.r_c = p.behavior.r_d + value,
        SweepParam::RiskRatio => p.behavior.r_c = value * p.behavior.r_d,
        SweepParam::RiskCost => p.behavior.r_c = value,
        SweepParam::ImitationRate => p.behavior.k = value,
        SweepParam::Sensitivity => p.behavior.m = value,
        SweepParam::InterventionRate => p.behavior.gamma = value,
    }
    p.validated()
}

/// Analytic region label: the unique stable steady state, or the
/// oscillation window when the interior state exists and is unstable.
pub fn analytic_region(params: &ModelParams) -> Result<RegionLabel, String> {
    let set = enumerate_equilibria(params);
    let mut stable = Vec::new();
    let mut e05_unstable = false;
    for eq in set.existing() {
        if eq.boundary {
            continue;
        }
        let verdict = classify_equilibrium(params, eq).map_err(|e| e.to_string())?;
        match verdict.stability {
            Stability::Stable => stable.push(eq.label),
            Stability::Unstable if eq.label == EquilibriumLabel::E05 => e05_unstable = true,
            _ => {}
        }
    }
    Ok(match (stable.as_slice(), e05_unstable) {
        ([one], false) => RegionLabel::Stable(*one),
        ([], true) => RegionLabel::OscillationWindow,
        _ => RegionLabel::Indeterminate,
    })
}

/// Evaluate a single cell through the full pipeline.
pub fn evaluate_cell(spec: &SweepSpec, axis1: f64, axis2: f64) -> SweepCell {
    let params = match apply_axis(&spec.base, spec.axis1.param, axis1)
        .and_then(|p| apply_axis(&p, spec.axis2.param, axis2))
    {
        Ok(p) => p,
        Err(e) => {
            return SweepCell {
                axis1,
                axis2,
                n: f64::NAN,
                params: spec.base,
                analytic: None,
                simulated: None,
                convergence_error: None,
                metrics: None,
                error: Some(format!("invalid parameters: {e}")),
            }
        }
    };

    let mut cell = SweepCell {
        axis1,
        axis2,
        n: params.entomology.basic_offspring_number(),
        params,
        analytic: None,
        simulated: None,
        convergence_error: None,
        metrics: None,
        error: None,
    };

    match analytic_region(&params) {
        Ok(label) => cell.analytic = Some(label),
        Err(e) => {
            cell.error = Some(e);
            return cell;
        }
    }

    let set = enumerate_equilibria(&params);
    let traj = match integrate(&params, spec.initial_state, spec.t_span, &spec.integrator) {
        Ok(t) => t,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    match detect_attractor(&traj, &set.equilibria, &params, &spec.analysis) {
        Ok(outcome) => {
            cell.simulated = Some(outcome.kind);
            cell.convergence_error = Some(outcome.convergence_error);
        }
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    }

    if spec.mode == SweepMode::Oscillations {
        // Metrics only where the interior state exists and is unstable;
        // other cells report them absent.
        if cell.analytic == Some(RegionLabel::OscillationWindow) {
            match oscillation_metrics(
                &traj,
                spec.analysis.transient_fraction,
                &params,
                &spec.analysis,
            ) {
                Ok(m) => cell.metrics = Some(m),
                Err(e) => cell.error = Some(e.to_string()),
            }
        }
    }
    cell
}

fn overlays_for(spec: &SweepSpec, axis1_values: &[f64]) -> Option<OverlayCurves> {
    if spec.base.variant != ModelVariant::PrevalenceDependent {
        return None;
    }
    if !matches!(
        spec.axis1.param,
        SweepParam::BasicOffspring | SweepParam::EggRate
    ) {
        return None;
    }
    let mut curves = OverlayCurves {
        axis1: axis1_values.to_vec(),
        n: Vec::new(),
        existence_lo: Vec::new(),
        existence_hi: Vec::new(),
        x1: Vec::new(),
        x2: Vec::new(),
    };
    for &v in axis1_values {
        let Ok(p) = apply_axis(&spec.base, spec.axis1.param, v) else {
            curves.n.push(f64::NAN);
            curves.existence_lo.push(None);
            curves.existence_hi.push(None);
            curves.x1.push(None);
            curves.x2.push(None);
            continue;
        };
        curves.n.push(p.entomology.basic_offspring_number());
        match e05_existence_interval(&p) {
            Ok((lo, hi)) => {
                curves.existence_lo.push(Some(lo));
                curves.existence_hi.push(Some(hi));
            }
            Err(_) => {
                curves.existence_lo.push(None);
                curves.existence_hi.push(None);
            }
        }
        match hopf_analysis(&p) {
            Ok(h) => {
                curves.x1.push(h.x1);
                curves.x2.push(h.x2);
            }
            Err(_) => {
                curves.x1.push(None);
                curves.x2.push(None);
            }
        }
    }
    Some(curves)
}

fn assemble(spec: &SweepSpec, cells: Vec<SweepCell>) -> SweepResult {
    let axis1_values = spec.axis1.values();
    let axis2_values = spec.axis2.values();
    SweepResult {
        overlays: overlays_for(spec, &axis1_values),
        axis1_values,
        axis2_values,
        cells,
    }
}

fn cell_coordinates(spec: &SweepSpec) -> Vec<(f64, f64)> {
    let a1 = spec.axis1.values();
    let a2 = spec.axis2.values();
    let mut coords = Vec::with_capacity(a1.len() * a2.len());
    for &x in &a1 {
        for &y in &a2 {
            coords.push((x, y));
        }
    }
    coords
}

/// Run the sweep on the current thread.
pub fn run_sweep_sequential(spec: &SweepSpec) -> SweepResult {
    let cells = cell_coordinates(spec)
        .into_iter()
        .map(|(x, y)| evaluate_cell(spec, x, y))
        .collect();
    assemble(spec, cells)
}

/// Run the sweep across the rayon thread pool. Cell order in the result is
/// independent of scheduling.
#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(spec: &SweepSpec) -> SweepResult {
    use rayon::prelude::*;
    let cells = cell_coordinates(spec)
        .into_par_iter()
        .map(|(x, y)| evaluate_cell(spec, x, y))
        .collect();
    assemble(spec, cells)
}

/// Run the sweep, using the parallel path when compiled in.
pub fn run_sweep(spec: &SweepSpec) -> SweepResult {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(spec)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_sequential(spec)
    }
}

/// Region sweep regardless of the mode stored in the spec.
pub fn sweep_regions(spec: &SweepSpec) -> SweepResult {
    let spec = SweepSpec {
        mode: SweepMode::Regions,
        ..spec.clone()
    };
    run_sweep(&spec)
}

/// Oscillation-metrics sweep regardless of the mode stored in the spec.
pub fn sweep_oscillations(spec: &SweepSpec) -> SweepResult {
    let spec = SweepSpec {
        mode: SweepMode::Oscillations,
        ..spec.clone()
    };
    run_sweep(&spec)
}

/// Rank correlations of amplitude and period against axis 1 along the
/// middle axis-2 row; the monotone-trend summary for oscillation sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendSummary {
    pub cells_used: usize,
    pub amplitude_rank_correlation: f64,
    pub period_rank_correlation: f64,
}

pub fn monotone_trend(result: &SweepResult) -> Option<TrendSummary> {
    let mid = result.axis2_values.len() / 2;
    let mut axis = Vec::new();
    let mut amplitudes = Vec::new();
    let mut periods = Vec::new();
    for i in 0..result.axis1_values.len() {
        let cell = result.cell(i, mid);
        if let Some(m) = &cell.metrics {
            axis.push(cell.n);
            amplitudes.push(m.aquatic.amplitude);
            periods.push(m.aquatic.period);
        }
    }
    if axis.len() < 3 {
        return None;
    }
    Some(TrendSummary {
        cells_used: axis.len(),
        amplitude_rank_correlation: crate::analysis::spearman(&axis, &amplitudes),
        period_rank_correlation: crate::analysis::spearman(&axis, &periods),
    })
}
