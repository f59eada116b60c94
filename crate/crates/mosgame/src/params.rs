//! Model parameters, phase-space state, and derived quantities.
//!
//! All rates are per day and populations are absolute mosquito counts,
//! matching the unit convention used throughout the crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Life-cycle rates of the mosquito population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntomologicalParams {
    /// Proportion of females in the population, in (0, 1].
    pub r: f64,
    /// Eggs laid per female per day.
    pub b: f64,
    /// Aquatic-to-adult maturation rate per day.
    pub nu_l: f64,
    /// Aquatic-stage death rate per day.
    pub mu_l: f64,
    /// Adult death rate per day.
    pub mu_a: f64,
}

impl EntomologicalParams {
    /// Average number of adult mosquitoes produced by a single adult over
    /// its lifetime. Mosquito-positive steady states exist only above 1.
    pub fn basic_offspring_number(&self) -> f64 {
        self.nu_l * self.r * self.b / ((self.nu_l + self.mu_l) * self.mu_a)
    }

    /// Egg-laying rate that produces the requested offspring number with the
    /// remaining rates held fixed. Inverse of [`basic_offspring_number`]
    /// in `b`.
    ///
    /// [`basic_offspring_number`]: EntomologicalParams::basic_offspring_number
    pub fn egg_rate_for_offspring_number(&self, n: f64) -> f64 {
        n * (self.nu_l + self.mu_l) * self.mu_a / (self.nu_l * self.r)
    }

    fn validate(&self) -> Result<(), ParamError> {
        require_positive("r", self.r)?;
        require_positive("b", self.b)?;
        require_positive("nu_l", self.nu_l)?;
        require_positive("mu_l", self.mu_l)?;
        require_positive("mu_a", self.mu_a)?;
        if self.r > 1.0 {
            return Err(ParamError::SexRatioAboveOne(self.r));
        }
        Ok(())
    }
}

/// Household decision parameters of the imitation dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorParams {
    /// Imitation rate per day.
    pub k: f64,
    /// Perceived risk (cost) of performing breeding-site control.
    pub r_c: f64,
    /// Perceived risk of mosquito-borne infection.
    pub r_d: f64,
    /// Sensitivity of the perceived infection risk to adult abundance,
    /// per mosquito. Enters the dynamics only for
    /// [`ModelVariant::PrevalenceDependent`].
    #[serde(default = "default_sensitivity")]
    pub m: f64,
    /// Rate of steady public-health action per day. Enters only for
    /// [`ModelVariant::ConstantPayoffWithIntervention`].
    #[serde(default)]
    pub gamma: f64,
}

fn default_sensitivity() -> f64 {
    0.0
}

impl BehaviorParams {
    fn validate(&self, variant: ModelVariant) -> Result<(), ParamError> {
        require_positive("k", self.k)?;
        require_positive("r_c", self.r_c)?;
        require_positive("r_d", self.r_d)?;
        require_finite("m", self.m)?;
        require_finite("gamma", self.gamma)?;
        if self.m < 0.0 {
            return Err(ParamError::Negative("m", self.m));
        }
        if self.gamma < 0.0 {
            return Err(ParamError::Negative("gamma", self.gamma));
        }
        match variant {
            ModelVariant::PrevalenceDependent if self.m <= 0.0 => {
                Err(ParamError::SensitivityRequired)
            }
            ModelVariant::ConstantPayoffWithIntervention if self.gamma <= 0.0 => {
                Err(ParamError::InterventionRequired)
            }
            _ => Ok(()),
        }
    }
}

/// Breeding-site availability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HabitatParams {
    /// Carrying capacity with no household control, in mosquitoes.
    pub k_max: f64,
    /// Carrying capacity under full household control, in mosquitoes.
    pub k_min: f64,
}

impl HabitatParams {
    fn validate(&self) -> Result<(), ParamError> {
        require_positive("k_max", self.k_max)?;
        require_positive("k_min", self.k_min)?;
        // Strict ordering: stability expressions divide by k_max - k_min.
        if self.k_min >= self.k_max {
            return Err(ParamError::HabitatNotOrdered {
                k_min: self.k_min,
                k_max: self.k_max,
            });
        }
        Ok(())
    }
}

/// Which right-hand side the model evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Both payoffs constant; household behavior decouples from abundance.
    ConstantPayoff,
    /// Constant payoffs plus a steady public-health action term.
    ConstantPayoffWithIntervention,
    /// Perceived infection risk proportional to adult abundance.
    PrevalenceDependent,
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelVariant::ConstantPayoff => "constant-payoff",
            ModelVariant::ConstantPayoffWithIntervention => "constant-payoff-intervention",
            ModelVariant::PrevalenceDependent => "prevalence-dependent",
        })
    }
}

/// One point of the three-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    /// Aquatic (egg/larva/pupa) population, mosquitoes.
    pub aquatic: f64,
    /// Adult population, mosquitoes.
    pub adults: f64,
    /// Fraction of households performing breeding-site control, in [0, 1].
    pub control: f64,
}

impl State {
    pub fn new(aquatic: f64, adults: f64, control: f64) -> Self {
        Self {
            aquatic,
            adults,
            control,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.aquatic, self.adults, self.control]
    }

    pub fn from_array(y: [f64; 3]) -> Self {
        Self {
            aquatic: y[0],
            adults: y[1],
            control: y[2],
        }
    }
}

/// Quantities derived from the parameter bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    /// Basic offspring number.
    pub n: f64,
    /// Sensitivity-to-mortality ratio `m * nu_l / mu_a`, per mosquito.
    pub alpha: f64,
}

/// Full parameter bundle, validated on construction via [`ModelParams::validated`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub variant: ModelVariant,
    pub entomology: EntomologicalParams,
    pub behavior: BehaviorParams,
    pub habitat: HabitatParams,
}

impl ModelParams {
    /// Validate every invariant of the bundle and return it unchanged.
    pub fn validated(self) -> Result<Self, ParamError> {
        self.entomology.validate()?;
        self.behavior.validate(self.variant)?;
        self.habitat.validate()?;
        Ok(self)
    }

    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities {
            n: self.entomology.basic_offspring_number(),
            alpha: self.behavior.m * self.entomology.nu_l / self.entomology.mu_a,
        }
    }

    /// Characteristic scale of the aquatic population (top of the invariant box).
    pub fn aquatic_scale(&self) -> f64 {
        self.habitat.k_max
    }

    /// Characteristic scale of the adult population (top of the invariant box).
    pub fn adult_scale(&self) -> f64 {
        self.entomology.nu_l / self.entomology.mu_a * self.habitat.k_max
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {0} must be strictly positive, got {1}")]
    NotPositive(&'static str, f64),
    #[error("parameter {0} must be non-negative, got {1}")]
    Negative(&'static str, f64),
    #[error("parameter {0} must be finite, got {1}")]
    NotFinite(&'static str, f64),
    #[error("sex ratio r must not exceed 1, got {0}")]
    SexRatioAboveOne(f64),
    #[error("habitat bounds must satisfy 0 < k_min < k_max, got k_min={k_min}, k_max={k_max}")]
    HabitatNotOrdered { k_min: f64, k_max: f64 },
    #[error("sensitivity m must be strictly positive for the prevalence-dependent variant")]
    SensitivityRequired,
    #[error("gamma must be strictly positive for the intervention variant")]
    InterventionRequired,
}

fn require_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    require_finite(name, value)?;
    if value <= 0.0 {
        return Err(ParamError::NotPositive(name, value));
    }
    Ok(())
}

fn require_finite(name: &'static str, value: f64) -> Result<(), ParamError> {
    if !value.is_finite() {
        return Err(ParamError::NotFinite(name, value));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{fig2_params, fig4_params};

    #[test]
    fn offspring_number_matches_direct_evaluation() {
        let p = fig2_params(10.0, 1.5, 1.0).entomology;
        // 0.5 * 10 * 0.067 / ((0.067 + 0.62) * 0.04)
        let n = p.basic_offspring_number();
        assert!((n - 12.190684).abs() < 5e-6, "n = {n}");

        let p4 = fig4_params(1.4, 9000.0, 1.0).entomology;
        assert!((p4.basic_offspring_number() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn offspring_number_threshold_identity() {
        // r*b*nu_l == (nu_l + mu_l)*mu_a forces n = 1.
        let p = EntomologicalParams {
            r: 0.5,
            b: (0.04 + 0.03) * 0.2 / (0.5 * 0.04),
            nu_l: 0.04,
            mu_l: 0.03,
            mu_a: 0.2,
        };
        assert!((p.basic_offspring_number() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn offspring_number_invariant_under_rescaling() {
        let mut rng_vals = [1.7_f64, 3.0, 10.0, 128.0];
        let base = fig2_params(7.3, 1.5, 1.0).entomology;
        let n0 = base.basic_offspring_number();
        for c in rng_vals.iter_mut() {
            let scaled = EntomologicalParams {
                r: base.r / *c,
                b: base.b * *c,
                ..base
            };
            let n1 = scaled.basic_offspring_number();
            assert!((n1 - n0).abs() <= 1e-12 * n0, "c={c}: {n1} vs {n0}");
        }
    }

    #[test]
    fn egg_rate_inversion_round_trips() {
        let p = fig4_params(1.4, 9000.0, 1.0).entomology;
        let b = p.egg_rate_for_offspring_number(2.5);
        let p2 = EntomologicalParams { b, ..p };
        assert!((p2.basic_offspring_number() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_bundles() {
        let good = fig4_params(1.4, 9000.0, 1.0);
        assert!(good.validated().is_ok());

        let mut p = good;
        p.entomology.r = 1.5;
        assert!(matches!(
            p.validated(),
            Err(ParamError::SexRatioAboveOne(_))
        ));

        let mut p = good;
        p.habitat.k_min = p.habitat.k_max;
        assert!(matches!(
            p.validated(),
            Err(ParamError::HabitatNotOrdered { .. })
        ));

        let mut p = good;
        p.behavior.m = 0.0;
        assert!(matches!(p.validated(), Err(ParamError::SensitivityRequired)));

        let mut p = good;
        p.variant = ModelVariant::ConstantPayoffWithIntervention;
        p.behavior.gamma = 0.0;
        assert!(matches!(
            p.validated(),
            Err(ParamError::InterventionRequired)
        ));

        let mut p = good;
        p.entomology.mu_a = -0.2;
        assert!(matches!(p.validated(), Err(ParamError::NotPositive(..))));
    }

    #[test]
    fn derived_alpha_for_reference_rates() {
        let p = fig4_params(1.4, 9000.0, 1.0);
        let d = p.derived();
        assert!((d.alpha - 0.06).abs() < 1e-15);
        assert!((d.n - 2.0).abs() < 1e-12);
    }
}
