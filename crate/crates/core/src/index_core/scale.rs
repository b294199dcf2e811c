/// Min-max scaled values of one scaling group.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGroup {
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `max == min`; every value was set to 0.5.
    pub degenerate: bool,
}

/// Midpoint assigned to every member of a group whose raw values are all equal.
pub const DEGENERATE_VALUE: f64 = 0.5;

/// Maps `raw` onto [0, 1] by `(x - min) / (max - min)`.
///
/// The minimum maps to exactly 0 and the maximum to exactly 1. An empty
/// group returns an empty result.
pub fn scale_ri(raw: &[f64]) -> ScaledGroup {
    let (min, max) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if raw.is_empty() {
        return ScaledGroup {
            values: Vec::new(),
            min,
            max,
            degenerate: false,
        };
    }
    if max == min {
        return ScaledGroup {
            values: vec![DEGENERATE_VALUE; raw.len()],
            min,
            max,
            degenerate: true,
        };
    }
    let range = max - min;
    ScaledGroup {
        values: raw.iter().map(|&x| (x - min) / range).collect(),
        min,
        max,
        degenerate: false,
    }
}
