//! Parameter bundles behind the named presets (`fig2`, `fig3`, `fig4`,
//! `fig-s`) shipped with the command-line tool, exposed here so that tests
//! and benchmarks build the same scenarios without duplicating constants.

use crate::params::{
    BehaviorParams, EntomologicalParams, HabitatParams, ModelParams, ModelVariant, State,
};

/// Slow adult turnover rates shared by the `fig2`, `fig3`, and `fig-s`
/// scenarios.
pub fn slow_turnover_rates(b: f64) -> EntomologicalParams {
    EntomologicalParams {
        r: 0.5,
        b,
        nu_l: 0.067,
        mu_l: 0.62,
        mu_a: 0.04,
    }
}

/// Fast adult turnover rates of the `fig4` oscillation scenario.
pub fn fast_turnover_rates(b: f64) -> EntomologicalParams {
    EntomologicalParams {
        r: 0.5,
        b,
        nu_l: 0.04,
        mu_l: 0.03,
        mu_a: 0.2,
    }
}

/// Constant-payoff scenario (`fig2` preset base).
pub fn fig2_params(b: f64, r_c: f64, r_d: f64) -> ModelParams {
    ModelParams {
        variant: ModelVariant::ConstantPayoff,
        entomology: slow_turnover_rates(b),
        behavior: BehaviorParams {
            k: 0.8,
            r_c,
            r_d,
            m: 0.0,
            gamma: 0.0,
        },
        habitat: HabitatParams {
            k_max: 2.0e6,
            k_min: 1.0e6,
        },
    }
}

/// Prevalence-dependent scenario with slow turnover (`fig3` preset base).
pub fn fig3_params(b: f64, r_c: f64, r_d: f64) -> ModelParams {
    ModelParams {
        variant: ModelVariant::PrevalenceDependent,
        entomology: slow_turnover_rates(b),
        behavior: BehaviorParams {
            k: 0.8,
            r_c,
            r_d,
            m: 0.3,
            gamma: 0.0,
        },
        habitat: HabitatParams {
            k_max: 2.0e6,
            k_min: 1.0e5,
        },
    }
}

/// Prevalence-dependent scenario with fast turnover (`fig4` preset base).
pub fn fig4_params(b: f64, r_c: f64, r_d: f64) -> ModelParams {
    ModelParams {
        variant: ModelVariant::PrevalenceDependent,
        entomology: fast_turnover_rates(b),
        behavior: BehaviorParams {
            k: 0.8,
            r_c,
            r_d,
            m: 0.3,
            gamma: 0.0,
        },
        habitat: HabitatParams {
            k_max: 2.0e6,
            k_min: 1.0e5,
        },
    }
}

/// Intervention scenario (`fig-s` preset base), gamma = 0.4.
pub fn fig_s_params(b: f64, r_c: f64, r_d: f64) -> ModelParams {
    ModelParams {
        variant: ModelVariant::ConstantPayoffWithIntervention,
        behavior: BehaviorParams {
            k: 0.8,
            r_c,
            r_d,
            m: 0.0,
            gamma: 0.4,
        },
        ..fig2_params(b, r_c, r_d)
    }
}

/// Initial state used by the constant-payoff scenarios.
pub fn balanced_start() -> State {
    State::new(2.0e4, 2.0e4, 0.5)
}

/// Initial state used by the prevalence-dependent scenarios.
pub fn low_control_start() -> State {
    State::new(2.0e4, 2.0e4, 0.3)
}
