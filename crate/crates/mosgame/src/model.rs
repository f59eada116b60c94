//! Right-hand sides of the three model variants and the invariant box.
//!
//! The aquatic and adult equations are shared by every variant:
//!
//! ```text
//! dL/dt = r b A (1 - L / K(w)) - (nu_l + mu_l) L
//! dA/dt = nu_l L - mu_a A
//! ```
//!
//! with carrying capacity `K(w) = k_max - w (k_max - k_min)`. The variants
//! differ only in the household equation `dw/dt`.

use crate::params::{ModelParams, ModelVariant, State};
use thiserror::Error;

/// Relative slack accepted outside the invariant box by the validating
/// entry points. Adaptive steppers transiently overshoot box boundaries by
/// amounts of this order.
pub const STATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("control fraction must lie in [0, 1], got {0}")]
    ControlOutOfRange(f64),
    #[error("{component} = {value} lies outside the invariant box [{lo}, {hi}]")]
    StateOutsideBox {
        component: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("carrying capacity is not positive at w = {w} (K = {capacity}); parameters corrupted")]
    NonPositiveCapacity { w: f64, capacity: f64 },
}

/// Breeding-site availability at control level `w`, affine between `k_max`
/// (no control) and `k_min` (full control).
pub fn carrying_capacity(w: f64, params: &ModelParams) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(ModelError::ControlOutOfRange(w));
    }
    Ok(capacity_unchecked(w, params))
}

#[inline]
pub(crate) fn capacity_unchecked(w: f64, params: &ModelParams) -> f64 {
    let h = &params.habitat;
    h.k_max - w * (h.k_max - h.k_min)
}

/// Perceived payoff for *not* performing breeding-site control.
///
/// Constant-payoff variants return `-r_d`; the prevalence-dependent variant
/// scales the risk with adult abundance, `-r_d * m * adults`.
pub fn payoff_not_control(variant: ModelVariant, adults: f64, params: &ModelParams) -> f64 {
    let b = &params.behavior;
    match variant {
        ModelVariant::ConstantPayoff | ModelVariant::ConstantPayoffWithIntervention => -b.r_d,
        ModelVariant::PrevalenceDependent => -b.r_d * b.m * adults,
    }
}

/// Perceived payoff for performing breeding-site control, `-r_c`.
pub fn payoff_control(params: &ModelParams) -> f64 {
    -params.behavior.r_c
}

/// Time derivative of the state for the configured variant.
///
/// Validates the state against the invariant box with [`STATE_SLACK`]
/// relative tolerance; integrator internals evaluate the raw field instead
/// and enforce their own containment policy.
pub fn rhs(params: &ModelParams, state: &State) -> Result<[f64; 3], ModelError> {
    validate_state(params, state, STATE_SLACK)?;
    let capacity = capacity_unchecked(state.control.clamp(0.0, 1.0), params);
    if capacity <= 0.0 {
        return Err(ModelError::NonPositiveCapacity {
            w: state.control,
            capacity,
        });
    }
    Ok(rhs_raw(params, state.as_array()))
}

/// Unvalidated vector field; defined for any state with positive capacity.
#[inline]
pub(crate) fn rhs_raw(params: &ModelParams, y: [f64; 3]) -> [f64; 3] {
    let e = &params.entomology;
    let b = &params.behavior;
    let [aquatic, adults, control] = y;
    let capacity = capacity_unchecked(control, params);

    let growth = e.r * e.b * adults * (1.0 - aquatic / capacity);
    let d_aquatic = growth - (e.nu_l + e.mu_l) * aquatic;
    let d_adults = e.nu_l * aquatic - e.mu_a * adults;
    let imitation = control * (1.0 - control);
    let d_control = match params.variant {
        ModelVariant::ConstantPayoff => b.k * imitation * (-b.r_c + b.r_d),
        ModelVariant::ConstantPayoffWithIntervention => {
            b.k * imitation * (-b.r_c + b.r_d) + b.gamma * (1.0 - control)
        }
        ModelVariant::PrevalenceDependent => b.k * imitation * (-b.r_c + b.r_d * b.m * adults),
    };
    [d_aquatic, d_adults, d_control]
}

/// Check a state against the invariant box, allowing `rel_slack` relative
/// overshoot on every face.
pub fn validate_state(
    params: &ModelParams,
    state: &State,
    rel_slack: f64,
) -> Result<(), ModelError> {
    let l_max = params.aquatic_scale();
    let a_max = params.adult_scale();
    let checks = [
        ("aquatic", state.aquatic, 0.0, l_max, rel_slack * l_max),
        ("adults", state.adults, 0.0, a_max, rel_slack * a_max),
        ("control", state.control, 0.0, 1.0, rel_slack),
    ];
    for (component, value, lo, hi, slack) in checks {
        if !value.is_finite() || value < lo - slack || value > hi + slack {
            return Err(ModelError::StateOutsideBox {
                component,
                value,
                lo,
                hi,
            });
        }
    }
    Ok(())
}
