//! Deterministic sampling support for the test suites.
//!
//! Lives in the library (rather than under `tests/`) so unit, integration,
//! and acceptance tests draw from one sampler. Not part of the modelling
//! API.

use crate::equilibria::e05_existence_interval;
use crate::params::{ModelParams, ModelVariant};
use crate::scenarios::{fig2_params, fig4_params, fig_s_params};
use crate::stability::hopf_analysis;

/// Small self-contained PRNG (SplitMix64), good enough for parameter
/// sampling and free of external dependencies.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform over two decades centred on `v`.
    pub fn around(&mut self, v: f64) -> f64 {
        v * 10f64.powf(self.range(-1.0, 1.0))
    }
}

/// Relative margin kept around every analytic stability boundary when
/// sampling; draws inside a margin are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-3;

fn clear_of(value: f64, boundary: f64) -> bool {
    (value - boundary).abs() > BOUNDARY_MARGIN * value.abs().max(boundary.abs()).max(1.0)
}

/// Draw one parameter bundle log-uniformly over two decades around the
/// bundled scenario values, rejecting draws within [`BOUNDARY_MARGIN`] of
/// any stability-theorem boundary. Returns `None` when the draw lands in a
/// margin or violates a parameter invariant; callers loop until `Some`.
pub fn random_margin_safe_params(rng: &mut SplitMix64) -> Option<ModelParams> {
    let variant = match rng.next_u64() % 3 {
        0 => ModelVariant::ConstantPayoff,
        1 => ModelVariant::ConstantPayoffWithIntervention,
        _ => ModelVariant::PrevalenceDependent,
    };
    let mut p = match variant {
        ModelVariant::ConstantPayoff => fig2_params(7.0, 1.5, 1.0),
        ModelVariant::ConstantPayoffWithIntervention => fig_s_params(7.0, 2.0, 1.0),
        ModelVariant::PrevalenceDependent => fig4_params(1.4, 9000.0, 1.0),
    };

    p.entomology.r = rng.range(0.05, 1.0);
    p.entomology.b = rng.around(p.entomology.b);
    p.entomology.nu_l = rng.around(p.entomology.nu_l);
    p.entomology.mu_l = rng.around(p.entomology.mu_l);
    p.entomology.mu_a = rng.around(p.entomology.mu_a);
    p.behavior.k = rng.around(p.behavior.k);
    p.behavior.r_c = rng.around(p.behavior.r_c);
    p.behavior.r_d = rng.around(p.behavior.r_d);
    if p.behavior.m > 0.0 {
        p.behavior.m = rng.around(p.behavior.m);
    }
    if p.behavior.gamma > 0.0 {
        p.behavior.gamma = rng.around(p.behavior.gamma);
    }
    p.habitat.k_max = rng.around(p.habitat.k_max);
    p.habitat.k_min = rng.around(p.habitat.k_min);
    if p.habitat.k_min * 1.1 > p.habitat.k_max {
        return None;
    }
    let p = p.validated().ok()?;

    let n = p.entomology.basic_offspring_number();
    if !clear_of(n, 1.0) {
        return None;
    }
    let b = &p.behavior;
    match p.variant {
        ModelVariant::ConstantPayoff => {
            if !clear_of(b.r_c, b.r_d) {
                return None;
            }
        }
        ModelVariant::ConstantPayoffWithIntervention => {
            if !clear_of(b.k * (b.r_c - b.r_d), b.gamma) {
                return None;
            }
        }
        ModelVariant::PrevalenceDependent => {
            let ratio = b.r_c / b.r_d;
            if n > 1.0 {
                let (lo, hi) = e05_existence_interval(&p).ok()?;
                if !clear_of(ratio, lo) || !clear_of(ratio, hi) {
                    return None;
                }
                let hopf = hopf_analysis(&p).ok()?;
                for root in [hopf.x1, hopf.x2].into_iter().flatten() {
                    if !clear_of(ratio, root) {
                        return None;
                    }
                }
            }
        }
    }
    Some(p)
}
