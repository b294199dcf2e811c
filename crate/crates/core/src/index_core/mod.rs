//! The remoteness index itself: raw values from population and category
//! distances, then min-max scaling per year or across all years.

mod config;
mod formula;
mod scale;
mod weights;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::ingest::PlaceSet;
use crate::spatial::{
    build_category_indexes, distance_vectors, DistanceVector, IndexRegistry, Provenance,
    SpatialError, NUM_CATEGORIES,
};

pub use config::{ConfigFile, CustomWeights, RunConfig, ScalingMode, WeightsSpec};
pub use formula::{log_base, raw_ri, RawIndex};
pub use scale::{scale_ri, ScaledGroup, DEGENERATE_VALUE};
pub use weights::{WeightScheme, PRESETS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComputeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error("year {0} appears in more than one place set")]
    DuplicateYear(i32),
    #[error("no places to compute")]
    NoPlaces,
}

/// Floors and fallbacks that affected one place.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClampFlags {
    pub population_clamped: bool,
    pub distance_clamped: bool,
    pub distance_fallback: bool,
}

impl ClampFlags {
    /// `;`-separated names of the set flags, empty when none is set.
    pub fn to_field(self) -> String {
        let mut parts = Vec::new();
        if self.population_clamped {
            parts.push("population_clamped");
        }
        if self.distance_clamped {
            parts.push("distance_clamped");
        }
        if self.distance_fallback {
            parts.push("distance_fallback");
        }
        parts.join(";")
    }

    pub fn parse_field(s: &str) -> Result<Self, String> {
        let mut f = Self::default();
        for part in s.split(';').filter(|p| !p.is_empty()) {
            match part {
                "population_clamped" => f.population_clamped = true,
                "distance_clamped" => f.distance_clamped = true,
                "distance_fallback" => f.distance_fallback = true,
                other => return Err(format!("unknown flag `{other}`")),
            }
        }
        Ok(f)
    }
}

/// Raw and scaled remoteness of one place in one year.
#[derive(Debug, Clone, PartialEq)]
pub struct RIResult {
    pub place_id: String,
    pub year: i32,
    pub population: u64,
    pub distances_km: [f64; NUM_CATEGORIES],
    pub raw: f64,
    pub scaled: f64,
    pub flags: ClampFlags,
}

/// Everything computed for one year, in place-set order.
#[derive(Debug, Clone)]
pub struct YearOutput {
    pub year: i32,
    pub results: Vec<RIResult>,
    pub vectors: Vec<DistanceVector>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    PopulationClamped,
    DistanceClamped,
    DistanceFallback,
    DegenerateGroup,
    DuplicatePosition,
    RejectedRow,
}

/// A counted condition worth reporting alongside the output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub year: Option<i32>,
    /// 1-based category for distance warnings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<usize>,
    pub count: u64,
}

/// Output of a full run over one or more years.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Ascending by year.
    pub years: Vec<YearOutput>,
    pub warnings: Vec<Warning>,
}

impl RunOutput {
    pub fn results(&self) -> impl Iterator<Item = &RIResult> {
        self.years.iter().flat_map(|y| y.results.iter())
    }
}

/// Raw values and distance vectors for one year, before scaling.
fn raw_year(
    ps: &PlaceSet,
    cfg: &RunConfig,
    registry: &IndexRegistry,
) -> Result<YearOutput, ComputeError> {
    let metric = cfg.metric_for(ps.mode())?;
    let strategy = registry.get(&cfg.index)?;
    let indexes = build_category_indexes(ps, &cfg.categories, metric, strategy.as_ref());
    let vectors = distance_vectors(ps, &indexes, cfg.fallback, cfg.distance_floor_km)?;

    let results = ps
        .iter()
        .zip(&vectors)
        .map(|(r, dv)| {
            let raw = raw_ri(r.population, &dv.d, &cfg.weights, cfg);
            RIResult {
                place_id: r.place_id.clone(),
                year: r.year,
                population: r.population,
                distances_km: dv.d,
                raw: raw.value,
                scaled: f64::NAN,
                flags: ClampFlags {
                    population_clamped: raw.population_clamped,
                    distance_clamped: raw.distance_clamped || dv.any(Provenance::Clamped),
                    distance_fallback: dv.any(Provenance::Fallback),
                },
            }
        })
        .collect();
    Ok(YearOutput {
        year: ps.year(),
        results,
        vectors,
        degenerate: false,
    })
}

fn apply_scaling(out: &mut YearOutput, group: &ScaledGroup, offset: usize) {
    for (r, v) in out.results.iter_mut().zip(&group.values[offset..]) {
        r.scaled = *v;
    }
}

/// Full pipeline for a single year with the built-in index registry.
pub fn compute_year(ps: &PlaceSet, cfg: &RunConfig) -> Result<YearOutput, ComputeError> {
    compute_year_with(ps, cfg, &IndexRegistry::with_builtin())
}

/// Full pipeline for a single year. The year is its own scaling group
/// regardless of [`RunConfig::scaling`].
pub fn compute_year_with(
    ps: &PlaceSet,
    cfg: &RunConfig,
    registry: &IndexRegistry,
) -> Result<YearOutput, ComputeError> {
    cfg.validate()?;
    let mut out = raw_year(ps, cfg, registry)?;
    let raws: Vec<f64> = out.results.iter().map(|r| r.raw).collect();
    let group = scale_ri(&raws);
    out.degenerate = group.degenerate;
    apply_scaling(&mut out, &group, 0);
    Ok(out)
}

/// Runs every year and scales according to [`RunConfig::scaling`].
pub fn compute_multi_year(sets: &[PlaceSet], cfg: &RunConfig) -> Result<RunOutput, ComputeError> {
    compute_multi_year_with(sets, cfg, &IndexRegistry::with_builtin())
}

pub fn compute_multi_year_with(
    sets: &[PlaceSet],
    cfg: &RunConfig,
    registry: &IndexRegistry,
) -> Result<RunOutput, ComputeError> {
    cfg.validate()?;
    let mut years_seen = BTreeSet::new();
    for s in sets {
        if !years_seen.insert(s.year()) {
            return Err(ComputeError::DuplicateYear(s.year()));
        }
    }
    if sets.iter().all(PlaceSet::is_empty) {
        return Err(ComputeError::NoPlaces);
    }

    let mut sorted: Vec<&PlaceSet> = sets.iter().filter(|s| !s.is_empty()).collect();
    sorted.sort_by_key(|s| s.year());
    let mut years = sorted
        .into_iter()
        .map(|ps| raw_year(ps, cfg, registry))
        .collect::<Result<Vec<_>, _>>()?;

    let mut warnings = Vec::new();
    match cfg.scaling {
        ScalingMode::PerYear => {
            for y in &mut years {
                let raws: Vec<f64> = y.results.iter().map(|r| r.raw).collect();
                let group = scale_ri(&raws);
                y.degenerate = group.degenerate;
                apply_scaling(y, &group, 0);
                if group.degenerate {
                    warnings.push(Warning {
                        kind: WarningKind::DegenerateGroup,
                        year: Some(y.year),
                        category: None,
                        count: raws.len() as u64,
                    });
                }
            }
        }
        ScalingMode::Global => {
            let raws: Vec<f64> = years
                .iter()
                .flat_map(|y| y.results.iter().map(|r| r.raw))
                .collect();
            let group = scale_ri(&raws);
            let mut offset = 0;
            for y in &mut years {
                y.degenerate = group.degenerate;
                apply_scaling(y, &group, offset);
                offset += y.results.len();
            }
            if group.degenerate {
                warnings.push(Warning {
                    kind: WarningKind::DegenerateGroup,
                    year: None,
                    category: None,
                    count: raws.len() as u64,
                });
            }
        }
    }

    for y in &years {
        warnings.extend(clamp_warnings(y));
    }
    warnings.sort();
    Ok(RunOutput { years, warnings })
}

/// Counts of clamped populations and clamped or substituted distances.
pub fn clamp_warnings(y: &YearOutput) -> Vec<Warning> {
    let mut counts: BTreeMap<(WarningKind, Option<usize>), u64> = BTreeMap::new();
    for r in &y.results {
        if r.flags.population_clamped {
            *counts.entry((WarningKind::PopulationClamped, None)).or_default() += 1;
        }
    }
    for dv in &y.vectors {
        for (k, p) in dv.provenance.iter().enumerate() {
            let kind = match p {
                Provenance::Measured => continue,
                Provenance::Clamped => WarningKind::DistanceClamped,
                Provenance::Fallback => WarningKind::DistanceFallback,
            };
            *counts.entry((kind, Some(k + 1))).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((kind, category), count)| Warning {
            kind,
            year: Some(y.year),
            category,
            count,
        })
        .collect()
}
