//! Closed-form steady states of each model variant with existence conditions.
//!
//! Every steady state has an explicit formula; no numerical root finding is
//! involved. Non-existence is reported as data (`exists = false` plus the
//! failed condition), keeping the output schema identical across parameter
//! regimes.

use crate::params::{ModelParams, ModelVariant, State};
use crate::model::capacity_unchecked;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Labels of the steady states across all variants.
///
/// `E05` occurs only for the prevalence-dependent variant; the tilde states
/// only for the intervention variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    /// Mosquito-free, no control: (0, 0, 0).
    E01,
    /// Mosquito-free, full control: (0, 0, 1).
    E02,
    /// Mosquito-positive, no control.
    E03,
    /// Mosquito-positive, full control.
    E04,
    /// Mosquito-positive, partial control (prevalence-dependent only).
    E05,
    /// Mosquito-free, partial control sustained by intervention.
    E01Tilde,
    /// Mosquito-positive, partial control sustained by intervention.
    E03Tilde,
}

impl std::fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquilibriumLabel::E01 => "E01",
            EquilibriumLabel::E02 => "E02",
            EquilibriumLabel::E03 => "E03",
            EquilibriumLabel::E04 => "E04",
            EquilibriumLabel::E05 => "E05",
            EquilibriumLabel::E01Tilde => "E01_tilde",
            EquilibriumLabel::E03Tilde => "E03_tilde",
        })
    }
}

/// A labelled steady state with its existence verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub label: EquilibriumLabel,
    /// The closed-form state; meaningful only when `exists` is true (the
    /// formula value is still reported when finite, zeros otherwise).
    pub state: State,
    pub exists: bool,
    /// Which existence condition held or failed.
    pub existence_reason: String,
    /// True when the state sits exactly on the boundary of its existence
    /// region; stability analysis treats such states as degenerate.
    pub boundary: bool,
}

/// Output of [`enumerate_equilibria`]: the labelled list plus degeneracy flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
    /// Set when `r_c == r_d` under constant payoffs: every control level is
    /// then stationary and the isolated-steady-state enumeration degenerates
    /// into a continuum.
    pub payoff_indifference: bool,
}

impl EquilibriumSet {
    pub fn get(&self, label: EquilibriumLabel) -> Option<&Equilibrium> {
        self.equilibria.iter().find(|e| e.label == label)
    }

    pub fn existing(&self) -> impl Iterator<Item = &Equilibrium> {
        self.equilibria.iter().filter(|e| e.exists)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriaError {
    #[error("operation requires the prevalence-dependent variant, got {0}")]
    WrongVariant(ModelVariant),
    #[error("existence interval is undefined for basic offspring number {0} <= 1")]
    OffspringNumberBelowThreshold(f64),
}

/// Relative width below which an interior state counts as sitting on its
/// existence boundary.
const BOUNDARY_REL_TOL: f64 = 1e-9;

fn persistence_factor(n: f64) -> f64 {
    1.0 - 1.0 / n
}

/// Mosquito-positive branch at a fixed control level: populations scale with
/// the carrying capacity at that level.
fn positive_branch(params: &ModelParams, control: f64) -> State {
    let e = &params.entomology;
    let n = e.basic_offspring_number();
    let capacity = capacity_unchecked(control, params);
    let aquatic = capacity * persistence_factor(n);
    State::new(aquatic, e.nu_l / e.mu_a * aquatic, control)
}

/// Complete labelled list of steady states for the configured variant.
pub fn enumerate_equilibria(params: &ModelParams) -> EquilibriumSet {
    let n = params.entomology.basic_offspring_number();
    let b = &params.behavior;
    let exists_reason = |ok: bool| -> (bool, String) {
        if ok {
            (true, "N > 1".to_string())
        } else {
            (false, format!("N <= 1 (N = {n:.6})"))
        }
    };

    let mut equilibria = Vec::new();
    let mut payoff_indifference = false;

    match params.variant {
        ModelVariant::ConstantPayoff | ModelVariant::PrevalenceDependent => {
            payoff_indifference =
                params.variant == ModelVariant::ConstantPayoff && b.r_c == b.r_d;
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E01,
                state: State::new(0.0, 0.0, 0.0),
                exists: true,
                existence_reason: "always".to_string(),
                boundary: false,
            });
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E02,
                state: State::new(0.0, 0.0, 1.0),
                exists: true,
                existence_reason: "always".to_string(),
                boundary: false,
            });
            let (ok, reason) = exists_reason(n > 1.0);
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E03,
                state: if ok {
                    positive_branch(params, 0.0)
                } else {
                    State::new(0.0, 0.0, 0.0)
                },
                exists: ok,
                existence_reason: reason.clone(),
                boundary: false,
            });
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E04,
                state: if ok {
                    positive_branch(params, 1.0)
                } else {
                    State::new(0.0, 0.0, 1.0)
                },
                exists: ok,
                existence_reason: reason,
                boundary: false,
            });
            if params.variant == ModelVariant::PrevalenceDependent {
                equilibria.push(e05_inner(params, n));
            }
        }
        ModelVariant::ConstantPayoffWithIntervention => {
            // w* = gamma / (k (r_c - r_d)) must land in [0, 1].
            let diff = b.r_c - b.r_d;
            let (tilde_ok, tilde_w, tilde_reason, tilde_boundary) = if diff <= 0.0 {
                (
                    false,
                    0.0,
                    format!(
                        "w* = gamma/(k(r_c - r_d)) outside [0, 1] (r_c - r_d = {diff:.6} <= 0)"
                    ),
                    false,
                )
            } else {
                let w = b.gamma / (b.k * diff);
                if w <= 1.0 {
                    let boundary = (1.0 - w).abs() <= BOUNDARY_REL_TOL;
                    (true, w.min(1.0), "0 <= gamma/(k(r_c - r_d)) <= 1".to_string(), boundary)
                } else {
                    (
                        false,
                        w,
                        format!("w* = gamma/(k(r_c - r_d)) = {w:.6} outside [0, 1]"),
                        false,
                    )
                }
            };
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E01Tilde,
                state: State::new(0.0, 0.0, if tilde_ok { tilde_w } else { 0.0 }),
                exists: tilde_ok,
                existence_reason: tilde_reason.clone(),
                boundary: tilde_boundary,
            });
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E02,
                state: State::new(0.0, 0.0, 1.0),
                exists: true,
                existence_reason: "always".to_string(),
                boundary: false,
            });
            let (n_ok, n_reason) = exists_reason(n > 1.0);
            let e03t_ok = tilde_ok && n_ok;
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E03Tilde,
                state: if e03t_ok {
                    positive_branch(params, tilde_w)
                } else {
                    State::new(0.0, 0.0, 0.0)
                },
                exists: e03t_ok,
                existence_reason: if n_ok { tilde_reason } else { n_reason.clone() },
                boundary: tilde_boundary,
            });
            equilibria.push(Equilibrium {
                label: EquilibriumLabel::E04,
                state: if n_ok {
                    positive_branch(params, 1.0)
                } else {
                    State::new(0.0, 0.0, 1.0)
                },
                exists: n_ok,
                existence_reason: n_reason,
                boundary: false,
            });
        }
    }

    EquilibriumSet {
        equilibria,
        payoff_indifference,
    }
}

/// Bounds on the risk ratio `r_c / r_d` within which the partial-control
/// steady state exists: `[alpha k_min (1 - 1/N), alpha k_max (1 - 1/N)]`.
pub fn e05_existence_interval(params: &ModelParams) -> Result<(f64, f64), EquilibriaError> {
    let d = params.derived();
    if d.n <= 1.0 {
        return Err(EquilibriaError::OffspringNumberBelowThreshold(d.n));
    }
    let factor = d.alpha * persistence_factor(d.n);
    Ok((factor * params.habitat.k_min, factor * params.habitat.k_max))
}

/// The partial-control steady state of the prevalence-dependent variant.
pub fn e05(params: &ModelParams) -> Result<Equilibrium, EquilibriaError> {
    if params.variant != ModelVariant::PrevalenceDependent {
        return Err(EquilibriaError::WrongVariant(params.variant));
    }
    Ok(e05_inner(params, params.entomology.basic_offspring_number()))
}

fn e05_inner(params: &ModelParams, n: f64) -> Equilibrium {
    let label = EquilibriumLabel::E05;
    if n <= 1.0 {
        return Equilibrium {
            label,
            state: State::new(0.0, 0.0, 0.0),
            exists: false,
            existence_reason: format!("N <= 1 (N = {n:.6})"),
            boundary: false,
        };
    }

    let e = &params.entomology;
    let b = &params.behavior;
    let h = &params.habitat;
    let ratio = b.r_c / b.r_d;
    let d = params.derived();
    let lo = d.alpha * h.k_min * persistence_factor(n);
    let hi = d.alpha * h.k_max * persistence_factor(n);

    let aquatic = e.mu_a * b.r_c / (b.r_d * b.m * e.nu_l);
    let adults = b.r_c / (b.r_d * b.m);
    let control = (h.k_max - aquatic / persistence_factor(n)) / (h.k_max - h.k_min);

    if ratio < lo || ratio > hi {
        return Equilibrium {
            label,
            state: State::new(aquatic, adults, control),
            exists: false,
            existence_reason: format!(
                "r_c/r_d = {ratio:.6} outside existence interval [{lo:.6}, {hi:.6}]"
            ),
            boundary: false,
        };
    }

    let boundary = (ratio - lo).min(hi - ratio) <= BOUNDARY_REL_TOL * (hi - lo);
    Equilibrium {
        label,
        // The closed interval admits float dust at the endpoints; pin the
        // control fraction back into [0, 1].
        state: State::new(aquatic, adults, control.clamp(0.0, 1.0)),
        exists: true,
        existence_reason: "N > 1 and r_c/r_d inside existence interval".to_string(),
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs;
    use crate::scenarios::{fig2_params, fig3_params, fig4_params, fig_s_params};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn residual_ok(params: &ModelParams, state: &State) -> bool {
        let d = rhs(params, state).unwrap();
        let s = state.as_array();
        (0..3).all(|i| d[i].abs() <= 1e-9 * s[i].abs().max(1.0))
    }

    #[test]
    fn constant_payoff_enumeration() {
        let p = fig2_params(10.0, 1.5, 1.0);
        let set = enumerate_equilibria(&p);
        assert_eq!(set.equilibria.len(), 4);
        assert!(!set.payoff_indifference);

        let e03 = set.get(EquilibriumLabel::E03).unwrap();
        assert!(e03.exists);
        assert!((e03.state.aquatic - 1.8359e6).abs() < 1e2);
        assert!((e03.state.adults - 3.0752e6).abs() < 2e2);
        assert_eq!(e03.state.control, 0.0);

        for eq in set.existing() {
            assert!(residual_ok(&p, &eq.state), "{} residual", eq.label);
        }
    }

    #[test]
    fn below_threshold_only_extinction_states_exist() {
        for p in [
            fig2_params(0.5, 1.5, 1.0),
            fig3_params(0.5, 9000.0, 1.0),
            fig4_params(0.5, 9000.0, 1.0),
        ] {
            let set = enumerate_equilibria(&p);
            for eq in &set.equilibria {
                match eq.label {
                    EquilibriumLabel::E01 | EquilibriumLabel::E02 => assert!(eq.exists),
                    _ => {
                        assert!(!eq.exists, "{} should not exist", eq.label);
                        assert!(eq.existence_reason.contains("N <= 1"));
                    }
                }
            }
        }
    }

    #[test]
    fn indifference_flag_for_equal_risks() {
        let p = fig2_params(10.0, 1.0, 1.0);
        assert!(enumerate_equilibria(&p).payoff_indifference);
        let p = fig2_params(10.0, 1.5, 1.0);
        assert!(!enumerate_equilibria(&p).payoff_indifference);
    }

    #[test]
    fn interior_state_reference_values() {
        let p = fig4_params(1.4, 9000.0, 1.0);
        let eq = e05(&p).unwrap();
        assert!(eq.exists);
        assert!((eq.state.aquatic - 150_000.0).abs() < 1e-6 * 150_000.0);
        assert!((eq.state.adults - 30_000.0).abs() < 1e-6 * 30_000.0);
        assert!((eq.state.control - 17.0 / 19.0).abs() < 1e-12);
        assert!(residual_ok(&p, &eq.state));
    }

    #[test]
    fn interior_state_boundary_collapses_to_full_control() {
        let p = fig4_params(1.4, 3000.0, 1.0);
        let eq = e05(&p).unwrap();
        assert!(eq.exists);
        assert!(eq.boundary);
        assert!((eq.state.control - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn interior_state_requires_persistence() {
        let p = fig4_params(0.5, 9000.0, 1.0);
        let eq = e05(&p).unwrap();
        assert!(!eq.exists);
        assert!(eq.existence_reason.contains("N <= 1"));
    }

    #[test]
    fn existence_interval_reference_values() {
        let p = fig4_params(1.4, 9000.0, 1.0);
        let (lo, hi) = e05_existence_interval(&p).unwrap();
        assert!((lo - 3000.0).abs() < 1e-9 * 3000.0);
        assert!((hi - 60000.0).abs() < 1e-9 * 60000.0);

        let p_below = fig4_params(0.5, 9000.0, 1.0);
        assert!(matches!(
            e05_existence_interval(&p_below),
            Err(EquilibriaError::OffspringNumberBelowThreshold(_))
        ));
    }

    #[test]
    fn existence_interval_shrinks_near_threshold() {
        let mut prev_width = f64::INFINITY;
        for n in [2.0, 1.5, 1.1, 1.01, 1.001] {
            let b = fig4_params(1.0, 9000.0, 1.0)
                .entomology
                .egg_rate_for_offspring_number(n);
            let p = fig4_params(b, 9000.0, 1.0);
            let (lo, hi) = e05_existence_interval(&p).unwrap();
            assert!(hi - lo < prev_width);
            assert!(lo < hi);
            prev_width = hi - lo;
        }
        // Width scales with (1 - 1/N): about 114000 * 1e-3 at N = 1.001.
        assert!(prev_width < 150.0);
    }

    #[test]
    fn e05_rejects_constant_variant() {
        let p = fig2_params(10.0, 1.5, 1.0);
        assert!(matches!(e05(&p), Err(EquilibriaError::WrongVariant(_))));
    }

    #[test]
    fn intervention_enumeration_by_regime() {
        // r_c - r_d = 1.0 > gamma/k = 0.5: tilde states exist, w* = 0.5.
        let p = fig_s_params(10.0, 2.0, 1.0);
        let set = enumerate_equilibria(&p);
        assert_eq!(set.equilibria.len(), 4);
        let e01t = set.get(EquilibriumLabel::E01Tilde).unwrap();
        assert!(e01t.exists);
        assert!((e01t.state.control - 0.5).abs() < 1e-12);
        let e03t = set.get(EquilibriumLabel::E03Tilde).unwrap();
        assert!(e03t.exists);
        // Capacity at w = 0.5 is 1.5e6.
        let expected = 1.5e6 * (1.0 - 1.0 / p.entomology.basic_offspring_number());
        assert!((e03t.state.aquatic - expected).abs() <= 1e-9 * expected);
        for eq in set.existing() {
            assert!(residual_ok(&p, &eq.state), "{} residual", eq.label);
        }

        // r_c - r_d = 0.2 < gamma/k: tilde states do not exist.
        let p = fig_s_params(10.0, 1.2, 1.0);
        let set = enumerate_equilibria(&p);
        let e01t = set.get(EquilibriumLabel::E01Tilde).unwrap();
        assert!(!e01t.exists);
        assert!(e01t.existence_reason.contains("outside [0, 1]"));
        assert!(set.get(EquilibriumLabel::E04).unwrap().exists);
    }

    #[test]
    fn residuals_vanish_for_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..300 {
            let b = rng.gen_range(0.2..20.0);
            let r_c: f64 = rng.gen_range(0.1..20000.0);
            let r_d = rng.gen_range(0.1..5.0);
            let p = match rng.gen_range(0..3) {
                0 => fig2_params(b, r_c.min(5.0), r_d),
                1 => fig4_params(b, r_c, r_d),
                _ => fig_s_params(b, r_c.min(5.0), r_d),
            };
            for eq in enumerate_equilibria(&p).existing() {
                assert!(residual_ok(&p, &eq.state), "{} residual", eq.label);
                checked += 1;
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn interior_control_in_range_iff_ratio_in_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let b = rng.gen_range(1.1..20.0);
            let r_c = rng.gen_range(1.0..200_000.0);
            let p = fig4_params(b, r_c, 1.0);
            let (lo, hi) = e05_existence_interval(&p).unwrap();
            let ratio = r_c;
            let eq = e05(&p).unwrap();
            let in_interval = (lo..=hi).contains(&ratio);
            assert_eq!(eq.exists, in_interval);
            if in_interval {
                assert!((0.0..=1.0).contains(&eq.state.control));
            } else {
                assert!(!(0.0..=1.0).contains(&eq.state.control));
            }
        }
    }

    #[test]
    fn no_control_populations_dominate_full_control() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let b = rng.gen_range(1.05..20.0);
            let p = fig3_params(b, 2.0, 1.0);
            let set = enumerate_equilibria(&p);
            let e03 = set.get(EquilibriumLabel::E03).unwrap();
            let e04 = set.get(EquilibriumLabel::E04).unwrap();
            assert!(e03.exists && e04.exists);
            assert!(e03.state.aquatic > e04.state.aquatic);
            assert!(e03.state.adults > e04.state.adults);
        }
    }

    #[test]
    fn interior_adult_level_depends_only_on_risks_and_sensitivity() {
        let base = fig4_params(1.4, 9000.0, 1.0);
        let adults = e05(&base).unwrap().state.adults;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let mut p = base;
            p.entomology.b = rng.gen_range(1.2..3.0);
            p.habitat.k_max = rng.gen_range(1.5e6..4.0e6);
            p.habitat.k_min = rng.gen_range(1.0e4..1.0e6);
            let eq = e05(&p).unwrap();
            assert_eq!(eq.state.adults, adults);
        }
    }
}
