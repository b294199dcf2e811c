use crate::spatial::NUM_CATEGORIES;

use super::config::RunConfig;
use super::weights::WeightScheme;

/// Logarithm with exact fast paths for the common bases.
#[inline]
pub fn log_base(x: f64, base: f64) -> f64 {
    if base == 10.0 {
        x.log10()
    } else if base == 2.0 {
        x.log2()
    } else if base == std::f64::consts::E {
        x.ln()
    } else {
        x.ln() / base.ln()
    }
}

/// A raw index value and the floors that were hit computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawIndex {
    pub value: f64,
    pub population_clamped: bool,
    pub distance_clamped: bool,
}

/// Raw remoteness of one place:
///
/// ```text
/// ( w_pop / log(max(s, s_floor)) + sum_k w_k * log(max(d_k, d_floor)) ) / (w_pop + sum_k w_k)
/// ```
///
/// Each weight is divided by the total before it is applied, so scaling
/// all weights by a common factor leaves the result unchanged whenever the
/// scaled weights are exact.
pub fn raw_ri(
    population: u64,
    distances_km: &[f64; NUM_CATEGORIES],
    weights: &WeightScheme,
    cfg: &RunConfig,
) -> RawIndex {
    let total = weights.total();
    let population_clamped = population < cfg.population_floor;
    let s = population.max(cfg.population_floor) as f64;

    let mut value = (weights.w_pop / total) * (1.0 / log_base(s, cfg.log_base));
    let mut distance_clamped = false;
    for (d, w) in distances_km.iter().zip(&weights.w_pc) {
        let d = if *d < cfg.distance_floor_km {
            distance_clamped = true;
            cfg.distance_floor_km
        } else {
            *d
        };
        value += (w / total) * log_base(d, cfg.log_base);
    }
    RawIndex {
        value,
        population_clamped,
        distance_clamped,
    }
}
