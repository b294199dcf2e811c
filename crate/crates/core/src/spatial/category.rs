use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of population categories that serve as distance targets.
pub const NUM_CATEGORIES: usize = 5;

/// A half-open population band `[lower, upper)`; `upper = None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationCategory {
    pub lower: u64,
    #[serde(default)]
    pub upper: Option<u64>,
}

impl PopulationCategory {
    pub const fn new(lower: u64, upper: Option<u64>) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, population: u64) -> bool {
        population >= self.lower && self.upper.is_none_or(|u| population < u)
    }
}

impl fmt::Display for PopulationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) => write!(f, "[{}, {})", self.lower, u),
            None => write!(f, "[{}, inf)", self.lower),
        }
    }
}

/// 10k-20k, 20k-50k, 50k-100k, 100k-250k and 250k+.
pub const DEFAULT_CATEGORIES: [PopulationCategory; NUM_CATEGORIES] = [
    PopulationCategory::new(10_000, Some(20_000)),
    PopulationCategory::new(20_000, Some(50_000)),
    PopulationCategory::new(50_000, Some(100_000)),
    PopulationCategory::new(100_000, Some(250_000)),
    PopulationCategory::new(250_000, None),
];

/// Checks that the bands are non-empty, ordered and disjoint.
pub fn validate_categories(cats: &[PopulationCategory]) -> Result<(), String> {
    if cats.len() != NUM_CATEGORIES {
        return Err(format!(
            "expected {NUM_CATEGORIES} population categories, got {}",
            cats.len()
        ));
    }
    for (i, c) in cats.iter().enumerate() {
        if let Some(u) = c.upper {
            if u <= c.lower {
                return Err(format!("category {} has upper <= lower: {c}", i + 1));
            }
        } else if i + 1 != cats.len() {
            return Err(format!("only the last category may be unbounded, not {}", i + 1));
        }
        if let Some(next) = cats.get(i + 1) {
            match c.upper {
                Some(u) if u <= next.lower => {}
                _ => {
                    return Err(format!(
                        "categories {} and {} overlap or are out of order",
                        i + 1,
                        i + 2
                    ))
                }
            }
        }
    }
    Ok(())
}

/// 0-based index of the category containing `population`, if any.
pub fn category_of(cats: &[PopulationCategory], population: u64) -> Option<usize> {
    cats.iter().position(|c| c.contains(population))
}
