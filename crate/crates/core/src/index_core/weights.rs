use serde::{Deserialize, Serialize};

use crate::spatial::NUM_CATEGORIES;

/// Weight of the population term and of each category distance term.
///
/// The raw index divides by the weight total, so only the proportions
/// matter. Both built-in presets total 30.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightScheme {
    pub name: String,
    pub w_pop: f64,
    pub w_pc: [f64; NUM_CATEGORIES],
}

/// Built-in schemes: every category weighted alike, and weights growing with
/// category size.
pub const PRESETS: &[(&str, f64, [f64; NUM_CATEGORIES])] = &[
    ("equal", 15.0, [3.0, 3.0, 3.0, 3.0, 3.0]),
    ("ascending", 15.0, [1.0, 2.0, 3.0, 4.0, 5.0]),
];

impl WeightScheme {
    pub fn new(name: impl Into<String>, w_pop: f64, w_pc: [f64; NUM_CATEGORIES]) -> Result<Self, String> {
        let w = Self {
            name: name.into(),
            w_pop,
            w_pc,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS.iter().find(|p| p.0 == name).map(|&(n, w_pop, w_pc)| Self {
            name: n.to_string(),
            w_pop,
            w_pc,
        })
    }

    pub fn equal() -> Self {
        Self::preset("equal").expect("built-in preset")
    }

    pub fn ascending() -> Self {
        Self::preset("ascending").expect("built-in preset")
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|p| p.0)
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = std::iter::once(self.w_pop).chain(self.w_pc);
        for w in all {
            if !w.is_finite() || w < 0.0 {
                return Err(format!("weight {w} in scheme `{}` is not a finite non-negative number", self.name));
            }
        }
        if self.total() <= 0.0 {
            return Err(format!("weights of scheme `{}` sum to zero", self.name));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.w_pc.iter().fold(self.w_pop, |acc, w| acc + w)
    }

    /// The factor applied to the weighted sum, i.e. `1 / total`.
    pub fn normalization(&self) -> f64 {
        1.0 / self.total()
    }

    /// Multiplies every weight by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            name: self.name.clone(),
            w_pop: self.w_pop * k,
            w_pc: self.w_pc.map(|w| w * k),
        }
    }
}

impl Default for WeightScheme {
    fn default() -> Self {
        Self::equal()
    }
}
