//! Seeded synthetic place sets for tests, benchmarks and demos.
//!
//! Positions are uniform over a rectangular extent. Populations follow a
//! Pareto tail (minimum 100, shape 0.8, capped at 10 million), so most
//! places are small and a few percent reach the 10,000 threshold of the
//! first distance category. Two places per default category are planted at
//! fixed populations, which keeps every category usable even for a queried
//! member that must exclude itself. Counties are the cells of a regular
//! grid over the extent.
//!
//! For later years each unplanted population is multiplied by a factor drawn
//! uniformly from [0.85, 1.25]; positions, ids and counties stay fixed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{Coord, CoordinateMode, PlaceRecord, PlaceSet};

const PARETO_MIN: f64 = 100.0;
const PARETO_SHAPE: f64 = 0.8;
const POPULATION_CAP: f64 = 10_000_000.0;

/// Populations planted twice each, one per default category.
pub const PLANTED: [u64; 5] = [15_000, 35_000, 75_000, 175_000, 1_000_000];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub min: Coord,
    pub max: Coord,
}

impl Extent {
    /// Rough lon/lat box around the conterminous United States.
    pub const CONTERMINOUS_US: Extent = Extent {
        min: Coord { x: -124.5, y: 25.0 },
        max: Coord { x: -67.0, y: 49.0 },
    };

    /// 4,500 km by 2,800 km of planar meters.
    pub const PLANAR_NATIONAL: Extent = Extent {
        min: Coord { x: 0.0, y: 0.0 },
        max: Coord {
            x: 4_500_000.0,
            y: 2_800_000.0,
        },
    };

    pub fn default_for(mode: CoordinateMode) -> Self {
        match mode {
            CoordinateMode::Geographic => Self::CONTERMINOUS_US,
            CoordinateMode::Planar => Self::PLANAR_NATIONAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub count: usize,
    pub mode: CoordinateMode,
    pub extent: Extent,
    pub years: Vec<i32>,
    /// Counties per side of the county grid.
    pub county_grid: usize,
}

impl SynthConfig {
    pub fn new(seed: u64, count: usize, mode: CoordinateMode) -> Self {
        Self {
            seed,
            count,
            mode,
            extent: Extent::default_for(mode),
            years: vec![2010],
            county_grid: 10,
        }
    }
}

/// Rounds to `decimals` places. Dividing by an exact power of ten yields the
/// double nearest the decimal, so the value prints without noise digits.
fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

/// Builds one [`PlaceSet`] per configured year.
pub fn generate(cfg: &SynthConfig) -> Vec<PlaceSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ext = cfg.extent;
    let grid = cfg.county_grid.max(1);
    let decimals = match cfg.mode {
        CoordinateMode::Geographic => 6,
        CoordinateMode::Planar => 0,
    };

    let mut base = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let x = round_to(rng.gen_range(ext.min.x..=ext.max.x), decimals);
        let y = round_to(rng.gen_range(ext.min.y..=ext.max.y), decimals);
        let population = match PLANTED.get(i / 2) {
            Some(&p) => p,
            None => {
                let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
                (PARETO_MIN * u.powf(-1.0 / PARETO_SHAPE)).min(POPULATION_CAP) as u64
            }
        };
        let col = (((x - ext.min.x) / (ext.max.x - ext.min.x)) * grid as f64) as usize;
        let row = (((y - ext.min.y) / (ext.max.y - ext.min.y)) * grid as f64) as usize;
        let county = format!("C{:03}{:03}", row.min(grid - 1), col.min(grid - 1));
        base.push(
            PlaceRecord::new(format!("P{i:06}"), 0, Coord::new(x, y), population)
                .with_name(format!("Place {i}"))
                .with_county(county),
        );
    }

    let mut sets = Vec::with_capacity(cfg.years.len());
    let mut current = base;
    for (k, &year) in cfg.years.iter().enumerate() {
        if k > 0 {
            for (i, r) in current.iter_mut().enumerate() {
                if i >= 2 * PLANTED.len() {
                    let growth = rng.gen_range(0.85..=1.25);
                    r.population = (r.population as f64 * growth).round() as u64;
                }
            }
        }
        let records = current
            .iter()
            .cloned()
            .map(|mut r| {
                r.year = year;
                r
            })
            .collect();
        sets.push(PlaceSet::new(year, cfg.mode, records).expect("generator output is valid"));
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{category_of, DEFAULT_CATEGORIES};

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::new(42, 300, CoordinateMode::Geographic);
        assert_eq!(generate(&cfg), generate(&cfg));
        let other = SynthConfig::new(43, 300, CoordinateMode::Geographic);
        assert_ne!(generate(&cfg), generate(&other));
    }

    #[test]
    fn every_category_has_two_members() {
        for mode in [CoordinateMode::Geographic, CoordinateMode::Planar] {
            let sets = generate(&SynthConfig::new(1, 50, mode));
            let mut counts = [0; 5];
            for r in sets[0].iter() {
                if let Some(c) = category_of(&DEFAULT_CATEGORIES, r.population) {
                    counts[c] += 1;
                }
            }
            assert!(counts.iter().all(|&c| c >= 2), "{counts:?}");
        }
    }

    #[test]
    fn multi_year_keeps_geometry() {
        let mut cfg = SynthConfig::new(5, 100, CoordinateMode::Planar);
        cfg.years = vec![1980, 2000];
        let sets = generate(&cfg);
        assert_eq!(sets.len(), 2);
        for (a, b) in sets[0].iter().zip(sets[1].iter()) {
            assert_eq!(a.place_id, b.place_id);
            assert_eq!(a.coord, b.coord);
            assert_eq!(b.year, 2000);
        }
        assert!(sets[0].iter().zip(sets[1].iter()).any(|(a, b)| a.population != b.population));
    }

    #[test]
    fn coordinates_inside_extent() {
        let cfg = SynthConfig::new(9, 500, CoordinateMode::Geographic);
        let e = cfg.extent;
        for r in generate(&cfg)[0].iter() {
            assert!(r.coord.x >= e.min.x - 1e-6 && r.coord.x <= e.max.x + 1e-6);
            assert!(r.coord.y >= e.min.y - 1e-6 && r.coord.y <= e.max.y + 1e-6);
        }
    }
}
