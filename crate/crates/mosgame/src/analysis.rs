//! Trajectory outcome classification and oscillation measurement.
//!
//! A trajectory tail either settles onto one of the known steady states
//! (scaled distance below `conv_tol` with shrinking variance), sustains a
//! limit cycle (enough prominent peaks, regular spacing, steady amplitude,
//! and a periodogram that corroborates the peak-based period), or stays
//! `Undecided` — typically long transients near a stability boundary.

use crate::equilibria::{Equilibrium, EquilibriumLabel};
use crate::integrator::Trajectory;
use crate::params::{ModelParams, ModelVariant, State};
use crate::peaks::find_peaks;
use crate::stability::hopf_frequency;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Thresholds for attractor detection and oscillation measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Scaled distance below which the tail counts as converged.
    pub conv_tol: f64,
    /// Fraction of the trajectory inspected as the convergence tail.
    pub tail_fraction: f64,
    /// Leading fraction discarded before oscillation measurement.
    pub transient_fraction: f64,
    /// Minimum number of post-transient peaks for a sustained verdict.
    pub min_peaks: usize,
    /// Peak prominence floor, relative to `k_max` for the populations and
    /// absolute for the control fraction.
    pub amp_floor_rel: f64,
    /// Maximum allowed relative jitter of inter-peak gaps for a period to
    /// count as regular.
    pub max_period_jitter: f64,
    /// Maximum relative disagreement between the peak-based period and the
    /// periodogram period.
    pub spectral_tolerance: f64,
    /// Minimum ratio of late-window to early-window cycle amplitude for an
    /// oscillation to count as sustained rather than decaying.
    pub min_amplitude_persistence: f64,
    /// Resampling stride in days; `None` picks one from the predicted
    /// oscillation period (or the span when no prediction exists).
    #[serde(default)]
    pub sample_stride: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            conv_tol: 1e-3,
            tail_fraction: 0.1,
            transient_fraction: 0.5,
            min_peaks: 5,
            amp_floor_rel: 1e-6,
            max_period_jitter: 0.05,
            spectral_tolerance: 0.05,
            min_amplitude_persistence: 0.5,
            sample_stride: None,
        }
    }
}

/// What a trajectory settles into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttractorKind {
    ConvergedTo(EquilibriumLabel),
    SustainedOscillation,
    Undecided,
}

impl std::fmt::Display for AttractorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttractorKind::ConvergedTo(label) => write!(f, "converged:{label}"),
            AttractorKind::SustainedOscillation => f.write_str("oscillation"),
            AttractorKind::Undecided => f.write_str("undecided"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttractorOutcome {
    pub kind: AttractorKind,
    pub final_state: State,
    /// Scaled distance from the tail to the nearest existing steady state.
    pub convergence_error: f64,
}

/// Per-component oscillation measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentMetrics {
    /// Mean peak-to-subsequent-trough half range, in component units.
    pub amplitude: f64,
    /// Mean inter-peak gap, days.
    pub period: f64,
    pub peak_count: usize,
    /// Standard deviation of inter-peak gaps over their mean.
    pub period_jitter: f64,
    /// Dominant periodogram period, days.
    pub spectral_period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationMetrics {
    pub aquatic: ComponentMetrics,
    pub adults: ComponentMetrics,
    pub control: ComponentMetrics,
}

impl OscillationMetrics {
    pub fn component(&self, i: usize) -> &ComponentMetrics {
        match i {
            0 => &self.aquatic,
            1 => &self.adults,
            _ => &self.control,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),
    #[error("component {component}: found {found} peaks after the transient, need {needed}")]
    InsufficientPeaks {
        component: &'static str,
        found: usize,
        needed: usize,
    },
    #[error("transient fraction must lie in [0, 0.9], got {0}")]
    BadTransientFraction(f64),
}

const COMPONENT_NAMES: [&str; 3] = ["aquatic", "adults", "control"];

fn component_scales(params: &ModelParams) -> [f64; 3] {
    [params.aquatic_scale(), params.adult_scale(), 1.0]
}

fn amp_floors(params: &ModelParams, cfg: &AnalysisConfig) -> [f64; 3] {
    let pop = cfg.amp_floor_rel * params.habitat.k_max;
    [pop, pop, cfg.amp_floor_rel]
}

/// Distance between a state and an equilibrium, component-wise over the
/// invariant-box scales, reduced with the maximum.
fn scaled_distance(state: &State, eq: &State, scales: &[f64; 3]) -> f64 {
    let a = state.as_array();
    let b = eq.as_array();
    (0..3)
        .map(|i| (a[i] - b[i]).abs() / scales[i])
        .fold(0.0, f64::max)
}

/// Default resampling stride: fine enough both for the predicted onset
/// period (where one exists) and for faster relay-like cycles deep inside
/// the instability window.
pub fn default_stride(params: &ModelParams, traj: &Trajectory) -> f64 {
    let predicted = if params.variant == ModelVariant::PrevalenceDependent {
        hopf_frequency(params).ok().map(|h| h.period)
    } else {
        None
    };
    let stride = match predicted {
        Some(period) => (period / 64.0).min(traj.duration() / 8192.0),
        None => traj.duration() / 8192.0,
    };
    stride.clamp(traj.duration() / 200_000.0, traj.duration() / 256.0)
}

/// Classify what the trajectory settles into, comparing its tail with the
/// provided steady states and falling back to oscillation detection.
pub fn detect_attractor(
    traj: &Trajectory,
    equilibria: &[Equilibrium],
    params: &ModelParams,
    cfg: &AnalysisConfig,
) -> Result<AttractorOutcome, AnalysisError> {
    if traj.len() < 16 {
        return Err(AnalysisError::TrajectoryTooShort(format!(
            "{} samples",
            traj.len()
        )));
    }
    if cfg.transient_fraction > 0.5 {
        return Err(AnalysisError::TrajectoryTooShort(format!(
            "post-transient window must cover at least half the span \
             (transient_fraction = {})",
            cfg.transient_fraction
        )));
    }

    let scales = component_scales(params);
    let tail_start = traj.end_time() - cfg.tail_fraction * traj.duration();
    let tail: Vec<&State> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= tail_start)
        .map(|(_, s)| s)
        .collect();

    // Nearest steady state over the whole tail (worst sample counts).
    let mut best: Option<(EquilibriumLabel, f64)> = None;
    for eq in equilibria.iter().filter(|e| e.exists) {
        let d = tail
            .iter()
            .map(|s| scaled_distance(s, &eq.state, &scales))
            .fold(0.0, f64::max);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((eq.label, d));
        }
    }
    let convergence_error = best.map_or(f64::INFINITY, |(_, d)| d);
    let final_state = traj.final_state();

    if let Some((label, distance)) = best {
        if distance < cfg.conv_tol && tail_variance_shrinks(&tail, &scales, cfg.conv_tol) {
            return Ok(AttractorOutcome {
                kind: AttractorKind::ConvergedTo(label),
                final_state,
                convergence_error: distance,
            });
        }
    }

    if sustained(traj, params, cfg) {
        Ok(AttractorOutcome {
            kind: AttractorKind::SustainedOscillation,
            final_state,
            convergence_error,
        })
    } else {
        Ok(AttractorOutcome {
            kind: AttractorKind::Undecided,
            final_state,
            convergence_error,
        })
    }
}

/// A trajectory sustains an oscillation when both population components
/// keep producing prominent peaks after the transient and the cycle
/// amplitude persists between the two halves of the analysis window.
///
/// The verdict is deliberately independent of period regularity: beyond the
/// stability boundary the attractor can be a multi-pulse periodic orbit or
/// carry slow quasi-periodic modulation, both of which defeat a single
/// inter-peak-gap test while plainly being sustained cycles. Regularity
/// (gap jitter, periodogram agreement) is enforced where periods are
/// consumed, in [`oscillation_metrics`] users.
fn sustained(traj: &Trajectory, params: &ModelParams, cfg: &AnalysisConfig) -> bool {
    let stride = cfg
        .sample_stride
        .unwrap_or_else(|| default_stride(params, traj));
    let (times, states) = traj.resample(stride);
    let skip = ((times.len() as f64) * cfg.transient_fraction) as usize;
    if times.len() - skip < 8 {
        return false;
    }
    let floors = amp_floors(params, cfg);

    for comp in [0usize, 1] {
        let series: Vec<f64> = states[skip..].iter().map(|s| s.as_array()[comp]).collect();
        let times = &times[skip..];
        let peaks = find_peaks(times, &series, floors[comp]);
        if peaks.len() < cfg.min_peaks {
            return false;
        }
        // Cycle amplitude in each half of the window; decaying spirals that
        // have not yet reached an equilibrium fail here. Medians keep
        // occasional large bursts of intermittent attractors from skewing
        // the comparison.
        let mid_time = times[times.len() / 2];
        let half_amplitude = |late: bool| -> Option<f64> {
            let mut ranges = Vec::new();
            for w in peaks.windows(2) {
                if (w[0].time >= mid_time) != late {
                    continue;
                }
                let lo = w[0].index;
                let hi = w[1].index.min(series.len() - 1);
                let trough = series[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
                ranges.push((w[0].value - trough) / 2.0);
            }
            if ranges.is_empty() {
                return None;
            }
            ranges.sort_by(f64::total_cmp);
            Some(ranges[ranges.len() / 2])
        };
        let (Some(early), Some(late)) = (half_amplitude(false), half_amplitude(true)) else {
            return false;
        };
        if late < floors[comp] || late < cfg.min_amplitude_persistence * early {
            return false;
        }
    }
    true
}

fn tail_variance_shrinks(tail: &[&State], scales: &[f64; 3], conv_tol: f64) -> bool {
    if tail.len() < 8 {
        return true;
    }
    let half = tail.len() / 2;
    let var = |part: &[&State]| -> f64 {
        let n = part.len() as f64;
        let mut mean = [0.0; 3];
        for s in part {
            let a = s.as_array();
            for i in 0..3 {
                mean[i] += a[i] / n;
            }
        }
        let mut v = 0.0;
        for s in part {
            let a = s.as_array();
            for i in 0..3 {
                v += ((a[i] - mean[i]) / scales[i]).powi(2);
            }
        }
        v / n
    };
    let first = var(&tail[..half]);
    let second = var(&tail[half..]);
    // Fluctuations well below the convergence tolerance count as settled
    // regardless of their trend.
    let floor = (0.05 * conv_tol).powi(2);
    second <= first * 1.001 + floor
}

/// Measure amplitude and period per component on the post-transient part of
/// a uniformly resampled trajectory.
pub fn oscillation_metrics(
    traj: &Trajectory,
    transient_fraction: f64,
    params: &ModelParams,
    cfg: &AnalysisConfig,
) -> Result<OscillationMetrics, AnalysisError> {
    if !(0.0..=0.9).contains(&transient_fraction) {
        return Err(AnalysisError::BadTransientFraction(transient_fraction));
    }
    if traj.len() < 16 {
        return Err(AnalysisError::TrajectoryTooShort(format!(
            "{} samples",
            traj.len()
        )));
    }
    let stride = cfg
        .sample_stride
        .unwrap_or_else(|| default_stride(params, traj));
    let (times, states) = traj.resample(stride);
    let skip = ((times.len() as f64) * transient_fraction) as usize;
    let times = &times[skip..];
    if times.len() < 8 {
        return Err(AnalysisError::TrajectoryTooShort(
            "post-transient window is empty".to_string(),
        ));
    }

    let floors = amp_floors(params, cfg);
    let mut per_component = [None; 3];
    for comp in 0..3 {
        let series: Vec<f64> = states[skip..]
            .iter()
            .map(|s| s.as_array()[comp])
            .collect();
        per_component[comp] = Some(measure_component(
            times,
            &series,
            stride,
            floors[comp],
            cfg.min_peaks,
            COMPONENT_NAMES[comp],
        )?);
    }

    Ok(OscillationMetrics {
        aquatic: per_component[0].unwrap(),
        adults: per_component[1].unwrap(),
        control: per_component[2].unwrap(),
    })
}

fn measure_component(
    times: &[f64],
    series: &[f64],
    stride: f64,
    floor: f64,
    min_peaks: usize,
    component: &'static str,
) -> Result<ComponentMetrics, AnalysisError> {
    let peaks = find_peaks(times, series, floor);
    if peaks.len() < min_peaks {
        return Err(AnalysisError::InsufficientPeaks {
            component,
            found: peaks.len(),
            needed: min_peaks,
        });
    }

    let gaps: Vec<f64> = peaks.windows(2).map(|w| w[1].time - w[0].time).collect();
    let period = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let jitter = if gaps.len() > 1 {
        let var = gaps.iter().map(|g| (g - period).powi(2)).sum::<f64>() / gaps.len() as f64;
        var.sqrt() / period
    } else {
        0.0
    };

    // Half range from each peak down to the trough before the next peak.
    let mut half_ranges = Vec::with_capacity(peaks.len().saturating_sub(1));
    for w in peaks.windows(2) {
        let lo_idx = w[0].index;
        let hi_idx = w[1].index.min(series.len() - 1);
        let trough = series[lo_idx..=hi_idx]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        half_ranges.push((w[0].value - trough) / 2.0);
    }
    let amplitude = half_ranges.iter().sum::<f64>() / half_ranges.len() as f64;

    let spectral_period = dominant_period(series, stride).unwrap_or(f64::INFINITY);

    Ok(ComponentMetrics {
        amplitude,
        period,
        peak_count: peaks.len(),
        period_jitter: jitter,
        spectral_period,
    })
}

/// Dominant period of a uniformly sampled series from a Hann-windowed
/// periodogram with log-parabolic bin refinement.
pub fn dominant_period(series: &[f64], dt: f64) -> Option<f64> {
    let n = series.len();
    if n < 8 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let hann =
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
            Complex::new((v - mean) * hann, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let (mut k_best, mut p_best) = (0usize, 0.0f64);
    for (k, v) in buf.iter().enumerate().take(half).skip(1) {
        let p = v.norm_sqr();
        if p > p_best {
            p_best = p;
            k_best = k;
        }
    }
    if k_best == 0 || p_best <= 0.0 {
        return None;
    }

    // Refine the bin with a parabola through log magnitudes.
    let k = k_best as f64
        + if k_best + 1 < half && k_best >= 2 {
            let lm = buf[k_best - 1].norm_sqr().max(1e-300).ln();
            let l0 = p_best.ln();
            let lp = buf[k_best + 1].norm_sqr().max(1e-300).ln();
            let denom = lm - 2.0 * l0 + lp;
            if denom < 0.0 {
                (0.5 * (lm - lp) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        } else {
            0.0
        };
    Some(n as f64 * dt / k)
}

/// Spearman rank correlation between two equal-length samples.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && vals[order[j + 1]] == vals[order[i]] {
                j += 1;
            }
            let shared = (i + j) as f64 / 2.0;
            for &idx in &order[i..=j] {
                ranks[idx] = shared;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..xs.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
