//! Straight-line reference implementation used as a test oracle: all-pairs
//! distance scans and the index formula evaluated as written, with no
//! spatial index and no weight pre-normalization.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use remoteness::ingest::{Coord, CoordinateMode, PlaceRecord, PlaceSet};
use remoteness::spatial::{DistanceMetric, PopulationCategory};

pub struct Reference {
    pub distances: Vec<[f64; 5]>,
    pub raw: Vec<f64>,
    pub scaled: Vec<f64>,
}

/// Minimum over every other member of each category, then the floor.
pub fn brute_distances(
    ps: &PlaceSet,
    cats: &[PopulationCategory],
    metric: DistanceMetric,
    floor_km: f64,
) -> Vec<[Option<f64>; 5]> {
    let recs = ps.records();
    recs.iter()
        .map(|q| {
            let mut out = [None; 5];
            for (k, c) in cats.iter().enumerate() {
                let mut best: Option<f64> = None;
                for m in recs {
                    let inside = m.population >= c.lower && c.upper.is_none_or(|u| m.population < u);
                    if !inside || m.place_id == q.place_id {
                        continue;
                    }
                    let d = metric.distance_km(q.coord, m.coord);
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
                out[k] = best.map(|d| d.max(floor_km));
            }
            out
        })
        .collect()
}

pub fn formula(s: u64, d: &[f64; 5], w_pop: f64, w_pc: &[f64; 5], base: f64, pop_floor: u64) -> f64 {
    let log = |x: f64| x.ln() / base.ln();
    let s = s.max(pop_floor) as f64;
    let total = w_pop + w_pc.iter().sum::<f64>();
    let mut acc = w_pop * (1.0 / log(s));
    for k in 0..5 {
        acc += w_pc[k] * log(d[k]);
    }
    acc / total
}

pub fn min_max(raw: &[f64]) -> Vec<f64> {
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    raw.iter().map(|x| if hi == lo { 0.5 } else { (x - lo) / (hi - lo) }).collect()
}

/// Full reference pipeline for one year; panics on an empty category.
pub fn reference(
    ps: &PlaceSet,
    cats: &[PopulationCategory],
    metric: DistanceMetric,
    w_pop: f64,
    w_pc: &[f64; 5],
) -> Reference {
    let distances: Vec<[f64; 5]> = brute_distances(ps, cats, metric, 1.0)
        .into_iter()
        .map(|v| v.map(|d| d.expect("every category populated")))
        .collect();
    let raw: Vec<f64> = ps
        .records()
        .iter()
        .zip(&distances)
        .map(|(r, d)| formula(r.population, d, w_pop, w_pc, 10.0, 10))
        .collect();
    let scaled = min_max(&raw);
    Reference { distances, raw, scaled }
}

/// Random places with at least two members in each default category.
pub fn random_places(seed: u64, n: usize, mode: CoordinateMode, year: i32) -> PlaceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = [12_000u64, 30_000, 70_000, 120_000, 400_000];
    let records = (0..n)
        .map(|i| {
            let coord = match mode {
                CoordinateMode::Geographic => {
                    Coord::new(rng.gen_range(-125.0..-65.0), rng.gen_range(24.0..50.0))
                }
                CoordinateMode::Planar => {
                    Coord::new(rng.gen_range(0.0..3.0e6), rng.gen_range(0.0..2.0e6))
                }
            };
            let population = match planted.get(i % 50) {
                Some(&p) if i < 100 => p,
                _ => {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    (10f64.powf(1.0 + 5.5 * u)) as u64
                }
            };
            PlaceRecord::new(format!("r{i:05}"), year, coord, population)
        })
        .collect();
    PlaceSet::new(year, mode, records).unwrap()
}
