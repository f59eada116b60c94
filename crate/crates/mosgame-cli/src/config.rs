//! Run configuration: TOML schema, named presets, `--set` overrides, and
//! resolution into fully-populated settings.
//!
//! A parsed configuration may leave the integrator and analysis sections
//! partial; resolution fills every default in, and the resolved document is
//! what gets written back out as provenance. Unknown keys anywhere are
//! rejected.

use anyhow::{anyhow, bail, Context, Result};
use mosgame::{
    AnalysisConfig, IntegratorConfig, ModelParams, State, SweepAxis, SweepMode, SweepSpec,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub model: ModelParams,
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Initial state as [aquatic, adults, control].
    pub initial_state: [f64; 3],
    /// Integration window in days, [t0, t1].
    pub t_span: [f64; 2],
    /// Optional uniform resampling stride for the trajectory CSV; omitted
    /// means the solver's own accepted step points are written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_stride: Option<f64>,
}

/// Partial integrator settings; anything absent takes the parameter-scaled
/// default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl IntegratorSection {
    fn resolve(&self, params: &ModelParams) -> IntegratorConfig {
        let defaults = IntegratorConfig::for_params(params);
        IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(defaults.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(defaults.abs_tol),
            max_step: self.max_step.or(defaults.max_step),
            initial_step: self.initial_step.or(defaults.initial_step),
            max_steps: self.max_steps.unwrap_or(defaults.max_steps),
        }
    }

    fn from_resolved(cfg: &IntegratorConfig) -> Self {
        Self {
            rel_tol: Some(cfg.rel_tol),
            abs_tol: Some(cfg.abs_tol),
            max_step: cfg.max_step,
            initial_step: cfg.initial_step,
            max_steps: Some(cfg.max_steps),
        }
    }
}

/// Partial analysis settings; anything absent takes the built-in default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_peaks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_floor_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period_jitter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_amplitude_persistence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<f64>,
}

impl AnalysisSection {
    fn resolve(&self) -> AnalysisConfig {
        let d = AnalysisConfig::default();
        AnalysisConfig {
            conv_tol: self.conv_tol.unwrap_or(d.conv_tol),
            tail_fraction: self.tail_fraction.unwrap_or(d.tail_fraction),
            transient_fraction: self.transient_fraction.unwrap_or(d.transient_fraction),
            min_peaks: self.min_peaks.unwrap_or(d.min_peaks),
            amp_floor_rel: self.amp_floor_rel.unwrap_or(d.amp_floor_rel),
            max_period_jitter: self.max_period_jitter.unwrap_or(d.max_period_jitter),
            spectral_tolerance: self.spectral_tolerance.unwrap_or(d.spectral_tolerance),
            min_amplitude_persistence: self
                .min_amplitude_persistence
                .unwrap_or(d.min_amplitude_persistence),
            sample_stride: self.sample_stride.or(d.sample_stride),
        }
    }

    fn from_resolved(cfg: &AnalysisConfig) -> Self {
        Self {
            conv_tol: Some(cfg.conv_tol),
            tail_fraction: Some(cfg.tail_fraction),
            transient_fraction: Some(cfg.transient_fraction),
            min_peaks: Some(cfg.min_peaks),
            amp_floor_rel: Some(cfg.amp_floor_rel),
            max_period_jitter: Some(cfg.max_period_jitter),
            spectral_tolerance: Some(cfg.spectral_tolerance),
            min_amplitude_persistence: Some(cfg.min_amplitude_persistence),
            sample_stride: cfg.sample_stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mode: SweepMode,
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
}

/// A configuration with every default filled in, ready to run and to be
/// re-emitted as provenance.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub params: ModelParams,
    pub initial_state: State,
    pub t_span: (f64, f64),
    pub integrator: IntegratorConfig,
    pub analysis: AnalysisConfig,
    pub sweep: Option<SweepSpec>,
}

/// Bundled preset configurations, named after the figures they replicate.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig2-e01", include_str!("../presets/fig2-e01.toml")),
    ("fig2-e02", include_str!("../presets/fig2-e02.toml")),
    ("fig2-e03", include_str!("../presets/fig2-e03.toml")),
    ("fig2-e04", include_str!("../presets/fig2-e04.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig4-oscillation", include_str!("../presets/fig4-oscillation.toml")),
    ("fig-s", include_str!("../presets/fig-s.toml")),
    ("fig-s-e01", include_str!("../presets/fig-s-e01.toml")),
    ("fig-s-e02", include_str!("../presets/fig-s-e02.toml")),
    ("fig-s-e03", include_str!("../presets/fig-s-e03.toml")),
    ("fig-s-e04", include_str!("../presets/fig-s-e04.toml")),
];

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            anyhow!("unknown preset '{name}'; available: {}", names.join(", "))
        })
}

/// Parse a config document, apply dotted-path overrides, and deserialize.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().context("configuration is not valid TOML")?;
    for entry in overrides {
        apply_override(&mut table, entry)?;
    }
    let value = toml::Value::Table(table);
    let config: RunConfig = value
        .try_into()
        .map_err(|e| anyhow!("invalid configuration: {e}"))?;
    if config.schema_version != SCHEMA_VERSION {
        bail!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            config.schema_version
        );
    }
    Ok(config)
}

/// Apply one `path.to.key=value` override. The value is parsed as a TOML
/// literal, falling back to a string.
fn apply_override(table: &mut toml::Table, entry: &str) -> Result<()> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| anyhow!("override '{entry}' is not of the form key=value"))?;
    let value = parse_toml_literal(raw.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override path '{path}' has an empty segment");
    }
    let mut current = table;
    for key in &keys[..keys.len() - 1] {
        current = current
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("override path '{path}' descends into a non-table value"))?;
    }
    current.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn parse_toml_literal(raw: &str) -> toml::Value {
    // Wrap in a one-key document so arrays, numbers, and booleans all parse
    // with TOML semantics; anything unparseable is taken as a string.
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

pub fn resolve(mut config: RunConfig) -> Result<Resolved> {
    let params = config
        .model
        .validated()
        .map_err(|e| anyhow!("invalid model parameters: {e}"))?;

    let [t0, t1] = config.run.t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        bail!("run.t_span must satisfy t0 < t1, got [{t0}, {t1}]");
    }
    if let Some(stride) = config.run.output_stride {
        if !(stride > 0.0) {
            bail!("run.output_stride must be positive, got {stride}");
        }
    }
    let [l0, a0, w0] = config.run.initial_state;
    let initial_state = State::new(l0, a0, w0);

    let integrator = config
        .integrator
        .clone()
        .unwrap_or_default()
        .resolve(&params);
    let analysis = config.analysis.clone().unwrap_or_default().resolve();

    let sweep = match &config.sweep {
        None => None,
        Some(section) => {
            for (name, axis) in [("axis1", &section.axis1), ("axis2", &section.axis2)] {
                if axis.count == 0 {
                    bail!("sweep.{name}.count must be at least 1");
                }
                if !axis.min.is_finite() || !axis.max.is_finite() {
                    bail!("sweep.{name} bounds must be finite");
                }
            }
            Some(SweepSpec {
                base: params,
                axis1: section.axis1,
                axis2: section.axis2,
                initial_state,
                t_span: (t0, t1),
                integrator,
                analysis,
                mode: section.mode,
            })
        }
    };

    // Record every default into the provenance document.
    config.integrator = Some(IntegratorSection::from_resolved(&integrator));
    config.analysis = Some(AnalysisSection::from_resolved(&analysis));

    Ok(Resolved {
        config,
        params,
        initial_state,
        t_span: (t0, t1),
        integrator,
        analysis,
        sweep,
    })
}

/// Canonical serialization of the resolved configuration; parsing this text
/// and re-serializing reproduces it byte for byte.
pub fn provenance_toml(config: &RunConfig) -> Result<String> {
    toml::to_string_pretty(config).context("failed to serialize configuration")
}
