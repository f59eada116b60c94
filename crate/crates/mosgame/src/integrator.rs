//! Adaptive Dormand-Prince 5(4) initial-value solver for the model.
//!
//! Embedded-pair error control with a weighted RMS norm whose per-component
//! absolute tolerances reflect the population-versus-fraction scale gap.
//! Accepted states are kept inside the invariant box: violations below
//! `10 * rel_tol` (relative to the component scale) are clamped to the box,
//! anything larger rejects the step. Integration is single-threaded,
//! reentrant, and bitwise deterministic for fixed inputs.

use crate::model::{rhs_raw, validate_state, ModelError};
use crate::params::{ModelParams, State};
use serde::{Deserialize, Serialize};
use thiserror::Error;

// Dormand-Prince 5(4) tableau: stage weights, 5th-order solution weights,
// and the (5th - 4th) error weights. Stage nodes are not needed for an
// autonomous field. FSAL: the last stage of an accepted step is the first
// stage of the next.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_SHRINK: f64 = 0.2; // new step >= MIN_SHRINK * old
const MAX_GROWTH: f64 = 10.0; // new step <= MAX_GROWTH * old

/// Tolerances and step bounds for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Relative tolerance of the embedded error estimate.
    pub rel_tol: f64,
    /// Absolute tolerance per component (aquatic, adults, control).
    pub abs_tol: [f64; 3],
    /// Hard cap on the step size in days; `None` leaves steps bounded only
    /// by the span.
    #[serde(default)]
    pub max_step: Option<f64>,
    /// Fixed first step in days; `None` selects one automatically from the
    /// field magnitude at the initial state.
    #[serde(default)]
    pub initial_step: Option<f64>,
    /// Bound on the number of attempted steps.
    pub max_steps: usize,
}

impl IntegratorConfig {
    /// Defaults scaled to a parameter bundle: populations resolve to one
    /// part in `1e6` of the maximum carrying capacity, the control fraction
    /// to `1e-10` absolute.
    pub fn for_params(params: &ModelParams) -> Self {
        let pop_tol = 1e-6 * params.habitat.k_max;
        Self {
            rel_tol: 1e-8,
            abs_tol: [pop_tol, pop_tol, 1e-10],
            max_step: None,
            initial_step: None,
            max_steps: 10_000_000,
        }
    }

    fn validate(&self) -> Result<(), IntegrateError> {
        let all_positive = self.rel_tol > 0.0
            && self.abs_tol.iter().all(|&t| t > 0.0)
            && self.max_step.map_or(true, |h| h > 0.0)
            && self.initial_step.map_or(true, |h| h > 0.0)
            && self.max_steps > 0;
        if all_positive {
            Ok(())
        } else {
            Err(IntegrateError::InvalidConfig)
        }
    }
}

/// Accepted/rejected step counts and field evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Time-stamped solution samples at the accepted step points, with the
/// field values needed for dense (cubic Hermite) interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub(crate) derivs: Vec<[f64; 3]>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn final_state(&self) -> State {
        *self.states.last().unwrap()
    }

    /// Dense solution value at any time inside the span, by cubic Hermite
    /// interpolation over the enclosing step.
    pub fn sample_at(&self, t: f64) -> State {
        let t = t.clamp(self.start_time(), self.end_time());
        let idx = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return self.states[i],
            Err(i) => i.clamp(1, self.times.len() - 1),
        };
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let h = t1 - t0;
        let theta = (t - t0) / h;
        let y0 = self.states[idx - 1].as_array();
        let y1 = self.states[idx].as_array();
        let f0 = self.derivs[idx - 1];
        let f1 = self.derivs[idx];

        let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
        let h10 = theta * (1.0 - theta) * (1.0 - theta);
        let h01 = theta * theta * (3.0 - 2.0 * theta);
        let h11 = theta * theta * (theta - 1.0);
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
        }
        State::from_array(y)
    }

    /// Uniform resampling at the given stride, starting at the span start.
    pub fn resample(&self, stride: f64) -> (Vec<f64>, Vec<State>) {
        assert!(stride > 0.0, "stride must be positive");
        let n = (self.duration() / stride).floor() as usize + 1;
        let mut times = Vec::with_capacity(n);
        let mut states = Vec::with_capacity(n);
        for i in 0..n {
            let t = self.start_time() + i as f64 * stride;
            times.push(t);
            states.push(self.sample_at(t));
        }
        (times, states)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("initial state invalid: {0}")]
    InvalidInitialState(ModelError),
    #[error("time span must satisfy t1 > t0, got ({0}, {1})")]
    InvalidTimeSpan(f64, f64),
    #[error("integrator configuration values must be positive")]
    InvalidConfig,
    #[error("step size underflow at t = {t}: stiff or degenerate region")]
    StepSizeUnderflow { t: f64 },
    #[error("exceeded {max} steps at t = {t}")]
    MaxStepsExceeded { max: usize, t: f64 },
}

/// Integrate the configured variant from `s0` over `t_span`.
pub fn integrate(
    params: &ModelParams,
    s0: State,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrateError::InvalidTimeSpan(t0, t1));
    }
    validate_state(params, &s0, crate::model::STATE_SLACK)
        .map_err(IntegrateError::InvalidInitialState)?;

    let span = t1 - t0;
    let h_max = cfg.max_step.unwrap_or(span).min(span);
    // Below this step size the time variable no longer advances reliably.
    let h_floor = 1e-14 * t0.abs().max(t1.abs()).max(1.0);

    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = s0.as_array();
    let mut f = rhs_raw(params, y);
    stats.rhs_evals += 1;

    let mut h = match cfg.initial_step {
        Some(h0) => h0.min(h_max),
        None => initial_step(params, &y, &f, cfg, h_max, &mut stats),
    };

    let mut times = vec![t0];
    let mut states = vec![s0];
    let mut derivs = vec![f];

    let mut fac_old: f64 = 1e-4;
    let mut just_rejected = false;
    let mut k = [[0.0; 3]; 7];
    // Set while the control fraction is held on a box face it decayed onto;
    // distinguishes integrator-frozen states from trajectories that started
    // on the (invariant) face, which must never leave it.
    let mut frozen = false;

    loop {
        if t >= t1 {
            break;
        }
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(IntegrateError::MaxStepsExceeded {
                max: cfg.max_steps,
                t,
            });
        }
        if h < h_floor {
            return Err(IntegrateError::StepSizeUnderflow { t });
        }

        // Revive a frozen control fraction the moment its face turns
        // repelling, re-entering the interior at the smallest value the
        // arithmetic can carry.
        if frozen && !face_attracting(params, y[1], y[2]) {
            y[2] = if y[2] == 0.0 {
                f64::MIN_POSITIVE
            } else {
                1.0_f64.next_down()
            };
            frozen = false;
            f = rhs_raw(params, y);
            stats.rhs_evals += 1;
        }

        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        // Stages. k[0] is the FSAL value from the previous step.
        k[0] = f;
        for stage in 1..7 {
            let mut yi = y;
            for (j, row) in A[stage].iter().take(stage).enumerate() {
                for c in 0..3 {
                    yi[c] += h * row * k[j][c];
                }
            }
            k[stage] = rhs_raw(params, yi);
        }
        stats.rhs_evals += 6;

        let mut y_new = y;
        for (j, w) in B5.iter().enumerate() {
            if *w != 0.0 {
                for c in 0..3 {
                    y_new[c] += h * w * k[j][c];
                }
            }
        }
        // Stage 7 is evaluated at (t + h, y_new); reuse it for the error
        // estimate and as the FSAL derivative.
        let f_new = k[6];

        let mut err_sq = 0.0;
        for c in 0..3 {
            let mut e = 0.0;
            for (j, w) in ERR.iter().enumerate() {
                e += w * k[j][c];
            }
            e *= h;
            let scale = cfg.abs_tol[c] + cfg.rel_tol * y[c].abs().max(y_new[c].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / 3.0).sqrt();

        if err <= 1.0 {
            let containment = contain_in_box(params, y[2], &mut y_new, cfg.rel_tol);
            if matches!(containment, Containment::TooFarOutside) {
                stats.rejected += 1;
                just_rejected = true;
                h *= 0.5;
                continue;
            }

            // While frozen, land a step end on the point where the face
            // stops attracting so the revival happens at the right time.
            if frozen
                && h > 16.0 * h_floor
                && face_attracting(params, y[1], y[2])
                && !face_attracting(params, y_new[1], y[2])
            {
                if let Some(fraction) =
                    flip_fraction(params, y[2], &y, &y_new, &k[0], &f_new, h)
                {
                    stats.rejected += 1;
                    just_rejected = true;
                    h = (fraction * h).max(2.0 * h_floor);
                    continue;
                }
            }

            let mut refresh_deriv = matches!(containment, Containment::Clamped);
            // A control fraction below the absolute tolerance that keeps
            // decaying toward a face carries no information; absorb it onto
            // the face, which removes its (possibly very fast) decay mode
            // from the step-size constraint. Revival above re-enters the
            // interior when the face turns repelling.
            if !frozen {
                if y_new[2] > 0.0
                    && y_new[2] <= cfg.abs_tol[2]
                    && face_attracting(params, y_new[1], 0.0)
                {
                    y_new[2] = 0.0;
                    frozen = true;
                    refresh_deriv = true;
                } else if y_new[2] < 1.0
                    && 1.0 - y_new[2] <= cfg.abs_tol[2].max(4.0 * f64::EPSILON)
                    && face_attracting(params, y_new[1], 1.0)
                {
                    y_new[2] = 1.0;
                    frozen = true;
                    refresh_deriv = true;
                }
            }

            let f_new = if refresh_deriv {
                // The stage-7 derivative belongs to the pre-clamp point;
                // refresh it so FSAL and interpolation stay consistent.
                stats.rhs_evals += 1;
                rhs_raw(params, y_new)
            } else {
                f_new
            };

            stats.accepted += 1;
            t = if last { t1 } else { t + h };
            y = y_new;
            f = f_new;
            times.push(t);
            states.push(State::from_array(y));
            derivs.push(f);

            let fac11 = err.max(1e-300).powf(0.2 - 0.75 * BETA);
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / MAX_GROWTH, 1.0 / MIN_SHRINK);
            let mut h_new = h / fac;
            if just_rejected {
                h_new = h_new.min(h);
                just_rejected = false;
            }
            fac_old = err.max(1e-4);
            h = h_new.min(h_max);
        } else {
            stats.rejected += 1;
            just_rejected = true;
            let fac11 = err.powf(0.2 - 0.75 * BETA);
            h /= (fac11 / SAFETY).min(1.0 / MIN_SHRINK);
        }
    }

    Ok(Trajectory {
        times,
        states,
        derivs,
        stats,
    })
}

enum Containment {
    Inside,
    Clamped,
    TooFarOutside,
}

/// Whether the control-fraction face (`face` is 0.0 or 1.0) attracts nearby
/// interior states at the given adult abundance.
fn face_attracting(params: &ModelParams, adults: f64, face: f64) -> bool {
    use crate::params::ModelVariant;
    let b = &params.behavior;
    // Sign of the payoff difference driving the imitation term.
    let payoff = match params.variant {
        ModelVariant::ConstantPayoff | ModelVariant::ConstantPayoffWithIntervention => {
            b.r_d - b.r_c
        }
        ModelVariant::PrevalenceDependent => -b.r_c + b.r_d * b.m * adults,
    };
    if face == 0.0 {
        // A steady intervention pushes away from zero control regardless of
        // payoffs.
        match params.variant {
            ModelVariant::ConstantPayoffWithIntervention => false,
            _ => payoff < 0.0,
        }
    } else {
        match params.variant {
            ModelVariant::ConstantPayoffWithIntervention => {
                b.k * payoff + b.gamma > 0.0
            }
            _ => payoff > 0.0,
        }
    }
}

/// Step fraction at which the face stops attracting, found by bisection on
/// the cubic Hermite interpolant of the adult component across the
/// candidate step. `None` when the flip sits too close to either end to be
/// worth relocating.
fn flip_fraction(
    params: &ModelParams,
    face: f64,
    y: &[f64; 3],
    y_new: &[f64; 3],
    f0: &[f64; 3],
    f1: &[f64; 3],
    h: f64,
) -> Option<f64> {
    let adults_at = |theta: f64| -> f64 {
        let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
        let h10 = theta * (1.0 - theta) * (1.0 - theta);
        let h01 = theta * theta * (3.0 - 2.0 * theta);
        let h11 = theta * theta * (theta - 1.0);
        h00 * y[1] + h10 * h * f0[1] + h01 * y_new[1] + h11 * h * f1[1]
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if face_attracting(params, adults_at(mid), face) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi > 1e-3 && hi < 0.999).then_some(hi)
}

fn box_slacks(params: &ModelParams, rel_tol: f64) -> [f64; 3] {
    let slack = 10.0 * rel_tol;
    [
        slack * params.aquatic_scale(),
        slack * params.adult_scale(),
        slack,
    ]
}

/// Enforce the invariant box on an accepted state. Small violations (below
/// 10 * rel_tol on the component scale) clamp to the box; larger ones
/// signal that the step must be rejected.
///
/// The faces w = 0 and w = 1 are invariant planes that an interior control
/// fraction never reaches in finite time; when the previous state was
/// interior, rounding or underflow onto a face would absorb the trajectory
/// there, so such states clamp to the nearest interior value instead.
fn contain_in_box(
    params: &ModelParams,
    prev_control: f64,
    y: &mut [f64; 3],
    rel_tol: f64,
) -> Containment {
    let slacks = box_slacks(params, rel_tol);
    let interior = prev_control > 0.0 && prev_control < 1.0;
    let (w_low, w_high) = if interior {
        (f64::MIN_POSITIVE, 1.0_f64.next_down())
    } else {
        (0.0, 1.0)
    };
    let lows = [0.0, 0.0, w_low];
    let highs = [f64::INFINITY, f64::INFINITY, w_high];
    let mut clamped = false;
    for c in 0..3 {
        if y[c] < lows[c] {
            if y[c] < -slacks[c] {
                return Containment::TooFarOutside;
            }
            y[c] = lows[c];
            clamped = true;
        } else if y[c] > highs[c] {
            if y[c] > highs[c] + slacks[c] {
                return Containment::TooFarOutside;
            }
            y[c] = highs[c];
            clamped = true;
        }
    }
    if clamped {
        Containment::Clamped
    } else {
        Containment::Inside
    }
}

/// Standard automatic first-step choice from the field magnitude at the
/// initial point plus one explicit Euler probe.
fn initial_step(
    params: &ModelParams,
    y: &[f64; 3],
    f: &[f64; 3],
    cfg: &IntegratorConfig,
    h_max: f64,
    stats: &mut StepStats,
) -> f64 {
    let scale = |c: usize, v: f64| cfg.abs_tol[c] + cfg.rel_tol * v.abs();
    let d0 = (0..3)
        .map(|c| (y[c] / scale(c, y[c])).powi(2))
        .sum::<f64>()
        .sqrt()
        / 3f64.sqrt();
    let d1 = (0..3)
        .map(|c| (f[c] / scale(c, y[c])).powi(2))
        .sum::<f64>()
        .sqrt()
        / 3f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(h_max);

    let y1 = [y[0] + h0 * f[0], y[1] + h0 * f[1], y[2] + h0 * f[2]];
    let f1 = rhs_raw(params, y1);
    stats.rhs_evals += 1;
    let d2 = (0..3)
        .map(|c| ((f1[c] - f[c]) / scale(c, y[c])).powi(2))
        .sum::<f64>()
        .sqrt()
        / (3f64.sqrt() * h0);

    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(h_max)
}
