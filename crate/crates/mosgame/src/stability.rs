//! Jacobians, eigenvalues, analytic stability conditions, and the Hopf
//! boundary of the partial-control steady state.
//!
//! Every equilibrium is classified twice: through the closed-form conditions
//! (sign tests on the basic offspring number, the risk difference or ratio,
//! and the Routh-Hurwitz coefficients) and through the eigenvalues of the
//! analytic Jacobian. The two verdicts must agree; disagreement is reported
//! as an error rather than silently resolved.

use crate::cubic::solve_monic_cubic;
use crate::equilibria::{Equilibrium, EquilibriumLabel};
use crate::model::{capacity_unchecked, validate_state, ModelError, STATE_SLACK};
use crate::params::{ModelParams, ModelVariant, State};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// 3x3 Jacobian of the vector field, rows and columns ordered
/// (aquatic, adults, control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian3(pub [[f64; 3]; 3]);

impl Jacobian3 {
    pub fn trace(&self) -> f64 {
        let m = &self.0;
        m[0][0] + m[1][1] + m[2][2]
    }

    /// Sum of the principal 2x2 minors.
    pub fn minor_sum(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Coefficients (c2, c1, c0) of det(J - xI) = 0 written as
    /// `x^3 + c2 x^2 + c1 x + c0`.
    pub fn char_poly(&self) -> (f64, f64, f64) {
        (-self.trace(), self.minor_sum(), -self.determinant())
    }

    /// Maximum absolute row sum; the spectral scale used for tolerances.
    pub fn inf_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }
}

/// Coefficients of the cubic characteristic polynomial at the
/// partial-control steady state: `x^3 + a2 x^2 + a1 x + a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPolyCoeffs {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

/// The quadratic `f(x) = x^2 - B x + C` in the risk ratio `x = r_c/r_d`
/// whose sign decides stability of the partial-control state, together with
/// its roots and the critical imitation rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfAnalysis {
    /// Linear coefficient `B` of the stability quadratic.
    pub b: f64,
    /// Constant coefficient `C` of the stability quadratic at the configured
    /// imitation rate.
    pub c: f64,
    /// `B^2 - 4C`; a positive value opens an instability window.
    pub discriminant: f64,
    /// Lower root of `f`; present only when the discriminant is positive.
    pub x1: Option<f64>,
    /// Upper root of `f`; present only when the discriminant is positive.
    pub x2: Option<f64>,
    /// Imitation rate at which the configured risk ratio crosses the
    /// stability boundary; present only when the ratio lies strictly inside
    /// the existence interval.
    pub k_c: Option<f64>,
}

/// Oscillation frequency at stability loss and the implied period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfFrequency {
    /// Angular frequency of the marginal eigenvalue pair, radians per day.
    pub omega: f64,
    /// Linear-theory period at onset, `2 pi / omega`, days.
    pub period: f64,
}

/// Local stability of a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    /// Locally asymptotically stable (all eigenvalue real parts negative).
    Stable,
    Unstable,
    /// On or numerically indistinguishable from a stability boundary.
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "LAS",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}

/// Which classification paths produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictMethod {
    Analytic,
    Eigenvalue,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub stability: Stability,
    pub method: VerdictMethod,
    /// Eigenvalues sorted by descending real part, per day.
    pub eigenvalues: [Complex64; 3],
    pub max_real_part: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("operation requires the prevalence-dependent variant, got {0}")]
    WrongVariant(ModelVariant),
    #[error("undefined for basic offspring number {0} <= 1")]
    OffspringNumberBelowThreshold(f64),
    #[error("{0} does not exist for these parameters; nothing to classify")]
    EquilibriumDoesNotExist(EquilibriumLabel),
    #[error(
        "analytic and eigenvalue classifications disagree for {label}: \
         analytic {analytic}, eigenvalue {numeric} (max Re = {max_real_part:e})"
    )]
    AnalyticNumericMismatch {
        label: EquilibriumLabel,
        analytic: Stability,
        numeric: Stability,
        max_real_part: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Analytic Jacobian of the configured variant at a state.
pub fn jacobian(params: &ModelParams, state: &State) -> Result<Jacobian3, StabilityError> {
    validate_state(params, state, STATE_SLACK)?;
    let w = state.control.clamp(0.0, 1.0);
    let capacity = capacity_unchecked(w, params);
    if capacity <= 0.0 {
        return Err(StabilityError::Model(ModelError::NonPositiveCapacity {
            w: state.control,
            capacity,
        }));
    }

    let e = &params.entomology;
    let b = &params.behavior;
    let h = &params.habitat;
    let (aquatic, adults) = (state.aquatic, state.adults);

    let j11 = -e.r * e.b * adults / capacity - (e.nu_l + e.mu_l);
    let j12 = e.r * e.b * (1.0 - aquatic / capacity);
    let j13 = -e.r * e.b * adults * aquatic * (h.k_max - h.k_min) / (capacity * capacity);

    let (j31, j32, j33) = match params.variant {
        ModelVariant::ConstantPayoff => (0.0, 0.0, b.k * (b.r_d - b.r_c) * (1.0 - 2.0 * w)),
        ModelVariant::ConstantPayoffWithIntervention => (
            0.0,
            0.0,
            b.k * (b.r_d - b.r_c) * (1.0 - 2.0 * w) - b.gamma,
        ),
        ModelVariant::PrevalenceDependent => (
            0.0,
            b.k * w * (1.0 - w) * b.r_d * b.m,
            b.k * (-b.r_c + b.r_d * b.m * adults) * (1.0 - 2.0 * w),
        ),
    };

    Ok(Jacobian3([
        [j11, j12, j13],
        [e.nu_l, -e.mu_a, 0.0],
        [j31, j32, j33],
    ]))
}

/// Closed-form characteristic coefficients at the partial-control state.
pub fn char_poly_coeffs_e05(params: &ModelParams) -> Result<CharPolyCoeffs, StabilityError> {
    if params.variant != ModelVariant::PrevalenceDependent {
        return Err(StabilityError::WrongVariant(params.variant));
    }
    let d = params.derived();
    if d.n <= 1.0 {
        return Err(StabilityError::OffspringNumberBelowThreshold(d.n));
    }
    let e = &params.entomology;
    let b = &params.behavior;
    let h = &params.habitat;
    let factor = 1.0 - 1.0 / d.n;
    let rbnu = e.r * e.b * e.nu_l;

    let a2 = rbnu * factor / e.mu_a + (e.nu_l + e.mu_l + e.mu_a);
    let a1 = rbnu * factor;
    let p = b.k * e.r * e.b * b.r_d * e.mu_a / (b.m * (h.k_max - h.k_min));
    let ratio = b.r_c / b.r_d;
    let hi = d.alpha * factor * h.k_max;
    let lo = d.alpha * factor * h.k_min;
    let a0 = p * (hi - ratio) * (ratio - lo);
    Ok(CharPolyCoeffs { a2, a1, a0 })
}

/// Stability quadratic of the partial-control state at the configured
/// parameters, its roots, and the critical imitation rate for the
/// configured risk ratio.
pub fn hopf_analysis(params: &ModelParams) -> Result<HopfAnalysis, StabilityError> {
    if params.variant != ModelVariant::PrevalenceDependent {
        return Err(StabilityError::WrongVariant(params.variant));
    }
    let d = params.derived();
    if d.n <= 1.0 {
        return Err(StabilityError::OffspringNumberBelowThreshold(d.n));
    }
    let e = &params.entomology;
    let bp = &params.behavior;
    let h = &params.habitat;
    let factor = 1.0 - 1.0 / d.n;

    let b = d.alpha * factor * (h.k_max + h.k_min);
    let q = (e.mu_a * e.mu_a + e.r * e.b * e.nu_l) / (bp.k * e.mu_a * bp.r_d);
    let c0 = d.alpha * d.alpha * factor * factor * h.k_max * h.k_min;
    let c = c0 + q * d.alpha * (h.k_max - h.k_min) * factor;
    let discriminant = b * b - 4.0 * c;

    let (x1, x2) = if discriminant > 0.0 {
        let root = discriminant.sqrt();
        (Some((b - root) / 2.0), Some((b + root) / 2.0))
    } else {
        (None, None)
    };

    Ok(HopfAnalysis {
        b,
        c,
        discriminant,
        x1,
        x2,
        k_c: critical_imitation_rate(params, bp.r_c / bp.r_d)?,
    })
}

/// Imitation rate at which the stability quadratic vanishes for a given
/// risk ratio: solves `C(k) = C0 + D/k` against `f(x, k) = 0`, giving
/// `k_c = D / (B x - x^2 - C0)`.
///
/// Returns `None` when the ratio lies outside the open existence interval,
/// where the denominator is not positive and no crossing exists.
pub fn critical_imitation_rate(
    params: &ModelParams,
    ratio: f64,
) -> Result<Option<f64>, StabilityError> {
    if params.variant != ModelVariant::PrevalenceDependent {
        return Err(StabilityError::WrongVariant(params.variant));
    }
    let d = params.derived();
    if d.n <= 1.0 {
        return Err(StabilityError::OffspringNumberBelowThreshold(d.n));
    }
    let e = &params.entomology;
    let bp = &params.behavior;
    let h = &params.habitat;
    let factor = 1.0 - 1.0 / d.n;

    let b = d.alpha * factor * (h.k_max + h.k_min);
    let c0 = d.alpha * d.alpha * factor * factor * h.k_max * h.k_min;
    let dk = (e.mu_a * e.mu_a + e.r * e.b * e.nu_l) / (e.mu_a * bp.r_d)
        * d.alpha
        * (h.k_max - h.k_min)
        * factor;
    let denom = b * ratio - ratio * ratio - c0;
    Ok((denom > 0.0).then(|| dk / denom))
}

/// Frequency of the marginal eigenvalue pair at stability loss,
/// `omega = sqrt(a1)`.
pub fn hopf_frequency(params: &ModelParams) -> Result<HopfFrequency, StabilityError> {
    let coeffs = char_poly_coeffs_e05(params)?;
    let omega = coeffs.a1.sqrt();
    Ok(HopfFrequency {
        omega,
        period: 2.0 * std::f64::consts::PI / omega,
    })
}

/// Eigenvalues of a 3x3 real matrix through its characteristic cubic,
/// sorted by descending real part (ties by descending imaginary part).
pub fn eigenvalues3(j: &Jacobian3) -> [Complex64; 3] {
    let (c2, c1, c0) = j.char_poly();
    solve_monic_cubic(c2, c1, c0)
}

/// Classify an existing equilibrium by both the analytic conditions and the
/// eigenvalues of the Jacobian.
///
/// The verdict carries `method = Both` when the two paths agree. A marginal
/// outcome on either path yields `Marginal`; a hard disagreement
/// (stable vs unstable) is an error.
pub fn classify_equilibrium(
    params: &ModelParams,
    eq: &Equilibrium,
) -> Result<StabilityVerdict, StabilityError> {
    if !eq.exists {
        return Err(StabilityError::EquilibriumDoesNotExist(eq.label));
    }

    let analytic = analytic_stability(params, eq)?;

    let j = jacobian(params, &eq.state)?;
    let eigenvalues = eigenvalues3(&j);
    let max_real_part = eigenvalues[0].re;
    let tol = 1e-9 * j.inf_norm().max(1.0);
    let numeric = if max_real_part < -tol {
        Stability::Stable
    } else if max_real_part > tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    };

    let (stability, method) = match (analytic, numeric) {
        (a, n) if a == n => (a, VerdictMethod::Both),
        (Stability::Marginal, _) => (Stability::Marginal, VerdictMethod::Analytic),
        (_, Stability::Marginal) => (Stability::Marginal, VerdictMethod::Eigenvalue),
        (a, n) => {
            return Err(StabilityError::AnalyticNumericMismatch {
                label: eq.label,
                analytic: a,
                numeric: n,
                max_real_part,
            })
        }
    };

    Ok(StabilityVerdict {
        stability,
        method,
        eigenvalues,
        max_real_part,
    })
}

/// Combine two sign conditions: stable requires both strictly positive, one
/// strictly negative forces instability, anything on a boundary is marginal.
fn signs_to_stability(first: f64, second: f64) -> Stability {
    if first < 0.0 || second < 0.0 {
        Stability::Unstable
    } else if first > 0.0 && second > 0.0 {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

fn analytic_stability(params: &ModelParams, eq: &Equilibrium) -> Result<Stability, StabilityError> {
    if eq.boundary {
        // Existence-boundary states are degenerate by construction.
        return Ok(Stability::Marginal);
    }
    let b = &params.behavior;
    let n = params.entomology.basic_offspring_number();
    let diff = b.r_c - b.r_d;

    let verdict = match (params.variant, eq.label) {
        (ModelVariant::ConstantPayoff, EquilibriumLabel::E01) => {
            signs_to_stability(diff, 1.0 - n)
        }
        (ModelVariant::ConstantPayoff, EquilibriumLabel::E02) => {
            signs_to_stability(-diff, 1.0 - n)
        }
        (ModelVariant::ConstantPayoff, EquilibriumLabel::E03) => {
            signs_to_stability(diff, n - 1.0)
        }
        (ModelVariant::ConstantPayoff, EquilibriumLabel::E04) => {
            signs_to_stability(-diff, n - 1.0)
        }

        (ModelVariant::PrevalenceDependent, EquilibriumLabel::E01) => {
            // The behavioral eigenvalue is -k r_c < 0 unconditionally.
            signs_to_stability(b.r_c, 1.0 - n)
        }
        (ModelVariant::PrevalenceDependent, EquilibriumLabel::E02) => Stability::Unstable,
        (ModelVariant::PrevalenceDependent, EquilibriumLabel::E03) => {
            let d = params.derived();
            let hi = d.alpha * (1.0 - 1.0 / n) * params.habitat.k_max;
            signs_to_stability(b.r_c / b.r_d - hi, n - 1.0)
        }
        (ModelVariant::PrevalenceDependent, EquilibriumLabel::E04) => {
            let d = params.derived();
            let lo = d.alpha * (1.0 - 1.0 / n) * params.habitat.k_min;
            signs_to_stability(lo - b.r_c / b.r_d, n - 1.0)
        }
        (ModelVariant::PrevalenceDependent, EquilibriumLabel::E05) => {
            let d = params.derived();
            let factor = 1.0 - 1.0 / n;
            let lo = d.alpha * factor * params.habitat.k_min;
            let hi = d.alpha * factor * params.habitat.k_max;
            let ratio = b.r_c / b.r_d;
            let hopf = hopf_analysis(params)?;
            // Interior gives a0 > 0; the quadratic sign settles a2 a1 vs a0.
            let interior = (ratio - lo).min(hi - ratio);
            let quad = ratio * ratio - hopf.b * ratio + hopf.c;
            signs_to_stability(interior, quad)
        }

        (ModelVariant::ConstantPayoffWithIntervention, EquilibriumLabel::E01Tilde) => {
            signs_to_stability(b.k * diff - b.gamma, 1.0 - n)
        }
        (ModelVariant::ConstantPayoffWithIntervention, EquilibriumLabel::E02) => {
            signs_to_stability(b.gamma - b.k * diff, 1.0 - n)
        }
        (ModelVariant::ConstantPayoffWithIntervention, EquilibriumLabel::E03Tilde) => {
            signs_to_stability(b.k * diff - b.gamma, n - 1.0)
        }
        (ModelVariant::ConstantPayoffWithIntervention, EquilibriumLabel::E04) => {
            signs_to_stability(b.gamma - b.k * diff, n - 1.0)
        }

        (variant, label) => {
            debug_assert!(false, "label {label} cannot occur for variant {variant}");
            Stability::Marginal
        }
    };
    Ok(verdict)
}
