//! Within-county spread of the place-level index and its agreement with
//! county-level ordinal classifications (RUCC, NCHS and the like).

mod spearman;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::index_core::RIResult;
use crate::ingest::PlaceSet;

pub use spearman::{average_ranks, spearman};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no place in year {year} carries a county_id")]
    NoCountyIds { year: i32 },
    #[error("only {matched} place(s) matched a county code, need at least 2")]
    InsufficientOverlap { matched: usize },
    #[error("rank correlation undefined: index values or county codes are constant")]
    ConstantRanks,
    #[error("county `{0}` appears more than once in the code table")]
    DuplicateCounty(String),
    #[error("county code table is empty")]
    EmptyCodeTable,
    #[error("result for `{place_id}` ({year}) has no matching place record")]
    UnknownPlace { place_id: String, year: i32 },
    #[error("{path}: {detail}")]
    Input { path: String, detail: String },
}

/// Ordinal county codes of one external classification scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CountyCodeTable {
    pub scheme: String,
    codes: BTreeMap<String, i64>,
}

impl CountyCodeTable {
    pub fn new(
        scheme: impl Into<String>,
        entries: impl IntoIterator<Item = (String, i64)>,
    ) -> Result<Self, AnalysisError> {
        let mut codes = BTreeMap::new();
        for (county, code) in entries {
            if codes.insert(county.clone(), code).is_some() {
                return Err(AnalysisError::DuplicateCounty(county));
            }
        }
        if codes.is_empty() {
            return Err(AnalysisError::EmptyCodeTable);
        }
        Ok(Self {
            scheme: scheme.into(),
            codes,
        })
    }

    /// Reads a `county_id,code` CSV.
    pub fn from_csv(path: &Path, scheme: impl Into<String>) -> Result<Self, AnalysisError> {
        let input_err = |detail: String| AnalysisError::Input {
            path: path.display().to_string(),
            detail,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(|e| input_err(e.to_string()))?;
        let header = rdr.headers().map_err(|e| input_err(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != ["county_id", "code"] {
            return Err(input_err(format!(
                "expected header `county_id,code`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| input_err(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let code = rec[1]
                .trim()
                .parse::<i64>()
                .map_err(|_| input_err(format!("line {line}: code `{}` is not an integer", &rec[1])))?;
            entries.push((rec[0].trim().to_string(), code));
        }
        Self::new(scheme, entries)
    }

    pub fn get(&self, county_id: &str) -> Option<i64> {
        self.codes.get(county_id).copied()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountyStats {
    pub county_id: String,
    pub places: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    /// Population standard deviation (divides by n).
    pub std_dev: f64,
}

/// One-way decomposition of the scaled index variance by county. All three
/// variances divide by the number of places, so `within + between = total`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceDecomposition {
    pub total: f64,
    pub within: f64,
    pub between: f64,
    /// `within / total`; `None` when every place has the same value.
    pub within_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeAgreement {
    pub scheme: String,
    pub spearman: f64,
    pub matched: usize,
    /// Places whose county is missing or has no code.
    pub unmatched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityReport {
    pub year: i32,
    pub places: usize,
    pub places_without_county: usize,
    pub counties: Vec<CountyStats>,
    pub variance: VarianceDecomposition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<CodeAgreement>,
}

/// Results for one year joined to their place records, ordered by place id
/// so that every statistic is independent of input order.
fn join<'a>(
    results: &'a [RIResult],
    places: &'a PlaceSet,
) -> Result<Vec<(&'a RIResult, Option<&'a str>)>, AnalysisError> {
    let county: HashMap<&str, Option<&str>> = places
        .iter()
        .map(|r| (r.place_id.as_str(), r.county_id.as_deref()))
        .collect();
    let mut joined = Vec::new();
    for r in results.iter().filter(|r| r.year == places.year()) {
        let c = county.get(r.place_id.as_str()).ok_or_else(|| AnalysisError::UnknownPlace {
            place_id: r.place_id.clone(),
            year: r.year,
        })?;
        joined.push((r, *c));
    }
    joined.sort_by(|a, b| a.0.place_id.cmp(&b.0.place_id));
    Ok(joined)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Per-county statistics of the scaled index and the variance decomposition.
pub fn heterogeneity(
    results: &[RIResult],
    places: &PlaceSet,
) -> Result<HeterogeneityReport, AnalysisError> {
    let joined = join(results, places)?;
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut without = 0;
    for (r, county) in &joined {
        match county {
            Some(c) => groups.entry(c).or_default().push(r.scaled),
            None => without += 1,
        }
    }
    if groups.is_empty() {
        return Err(AnalysisError::NoCountyIds {
            year: places.year(),
        });
    }

    let all: Vec<f64> = groups.values().flatten().copied().collect();
    let n = all.len() as f64;
    let grand = mean(&all);
    let total_ss: f64 = all.iter().map(|x| (x - grand).powi(2)).sum();

    let mut within_ss = 0.0;
    let mut between_ss = 0.0;
    let mut counties = Vec::with_capacity(groups.len());
    for (county, xs) in &groups {
        let m = mean(xs);
        let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
        within_ss += ss;
        between_ss += xs.len() as f64 * (m - grand).powi(2);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        counties.push(CountyStats {
            county_id: county.to_string(),
            places: xs.len(),
            mean: m,
            min,
            max,
            range: max - min,
            std_dev: (ss / xs.len() as f64).sqrt(),
        });
    }

    let within_share = if total_ss > 0.0 {
        Some((within_ss / total_ss).clamp(0.0, 1.0))
    } else {
        None
    };
    Ok(HeterogeneityReport {
        year: places.year(),
        places: joined.len(),
        places_without_county: without,
        counties,
        variance: VarianceDecomposition {
            total: total_ss / n,
            within: within_ss / n,
            between: between_ss / n,
            within_share,
        },
        agreement: None,
    })
}

/// Spearman correlation between each place's scaled index and the code of
/// its county.
pub fn code_agreement(
    results: &[RIResult],
    places: &PlaceSet,
    codes: &CountyCodeTable,
) -> Result<CodeAgreement, AnalysisError> {
    let joined = join(results, places)?;
    let mut ri = Vec::new();
    let mut code = Vec::new();
    for (r, county) in &joined {
        if let Some(c) = county.and_then(|c| codes.get(c)) {
            ri.push(r.scaled);
            code.push(c as f64);
        }
    }
    if ri.len() < 2 {
        return Err(AnalysisError::InsufficientOverlap { matched: ri.len() });
    }
    let rho = spearman(&ri, &code).ok_or(AnalysisError::ConstantRanks)?;
    Ok(CodeAgreement {
        scheme: codes.scheme.clone(),
        spearman: rho,
        matched: ri.len(),
        unmatched: joined.len() - ri.len(),
    })
}

/// Full analysis output across years.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub years: Vec<HeterogeneityReport>,
}

/// Plain-text rendering of a report for terminals.
pub fn render_table(report: &AnalysisReport) -> String {
    let mut s = String::new();
    for y in &report.years {
        let _ = writeln!(
            s,
            "year {}: {} places, {} counties, {} without county",
            y.year,
            y.places,
            y.counties.len(),
            y.places_without_county
        );
        let share = y
            .variance
            .within_share
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            s,
            "  variance total {:.6}  within {:.6}  between {:.6}  within-share {share}",
            y.variance.total, y.variance.within, y.variance.between
        );
        if let Some(a) = &y.agreement {
            let _ = writeln!(
                s,
                "  spearman vs {}: {:.4} ({} matched, {} unmatched)",
                a.scheme, a.spearman, a.matched, a.unmatched
            );
        }
        let _ = writeln!(
            s,
            "  {:<16} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "county", "places", "mean", "min", "max", "range", "sd"
        );
        for c in &y.counties {
            let _ = writeln!(
                s,
                "  {:<16} {:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                c.county_id, c.places, c.mean, c.min, c.max, c.range, c.std_dev
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_core::ClampFlags;
    use crate::ingest::{Coord, CoordinateMode, PlaceRecord};

    fn fixture(rows: &[(&str, Option<&str>, f64)]) -> (Vec<RIResult>, PlaceSet) {
        let places = PlaceSet::new(
            2010,
            CoordinateMode::Planar,
            rows.iter()
                .enumerate()
                .map(|(i, &(id, county, _))| {
                    let r = PlaceRecord::new(id, 2010, Coord::new(i as f64, 0.0), 100);
                    match county {
                        Some(c) => r.with_county(c),
                        None => r,
                    }
                })
                .collect(),
        )
        .unwrap();
        let results = rows
            .iter()
            .map(|&(id, _, scaled)| RIResult {
                place_id: id.to_string(),
                year: 2010,
                population: 100,
                distances_km: [1.0; 5],
                raw: scaled,
                scaled,
                flags: ClampFlags::default(),
            })
            .collect();
        (results, places)
    }

    #[test]
    fn single_county_is_all_within() {
        let (r, p) = fixture(&[("a", Some("k"), 0.1), ("b", Some("k"), 0.7), ("c", Some("k"), 0.3)]);
        let rep = heterogeneity(&r, &p).unwrap();
        assert_eq!(rep.variance.within_share, Some(1.0));
        assert_eq!(rep.variance.between, 0.0);
    }

    #[test]
    fn singleton_counties_are_all_between() {
        let (r, p) = fixture(&[("a", Some("k1"), 0.1), ("b", Some("k2"), 0.7), ("c", Some("k3"), 0.3)]);
        let rep = heterogeneity(&r, &p).unwrap();
        assert_eq!(rep.variance.within_share, Some(0.0));
        assert_eq!(rep.counties.iter().map(|c| c.std_dev).sum::<f64>(), 0.0);
    }

    #[test]
    fn two_county_hand_computation() {
        // Grand mean 0.5; both county means 0.5, so between = 0 and
        // within = total = (0.25 + 0.25 + 0.01 + 0.01) / 4 = 0.13.
        let (r, p) = fixture(&[
            ("a", Some("x"), 0.0),
            ("b", Some("x"), 1.0),
            ("c", Some("y"), 0.4),
            ("d", Some("y"), 0.6),
        ]);
        let rep = heterogeneity(&r, &p).unwrap();
        assert_eq!(rep.counties[0].range, 1.0);
        assert!((rep.counties[1].range - 0.2).abs() < 1e-12);
        assert!((rep.variance.total - 0.13).abs() < 1e-12);
        assert!((rep.variance.within - 0.13).abs() < 1e-12);
        assert!(rep.variance.between.abs() < 1e-12);
        assert!((rep.counties[0].std_dev - 0.5).abs() < 1e-12);
        assert!((rep.counties[1].std_dev - 0.1).abs() < 1e-12);
    }

    #[test]
    fn missing_counties() {
        let (r, p) = fixture(&[("a", None, 0.0), ("b", None, 1.0)]);
        assert_eq!(
            heterogeneity(&r, &p).unwrap_err(),
            AnalysisError::NoCountyIds { year: 2010 }
        );
        let (r, p) = fixture(&[("a", None, 0.0), ("b", Some("k"), 1.0), ("c", Some("k"), 0.5)]);
        assert_eq!(heterogeneity(&r, &p).unwrap().places_without_county, 1);
    }

    #[test]
    fn constant_values_have_no_share() {
        let (r, p) = fixture(&[("a", Some("k"), 0.5), ("b", Some("j"), 0.5)]);
        assert_eq!(heterogeneity(&r, &p).unwrap().variance.within_share, None);
    }

    #[test]
    fn agreement_and_overlap() {
        let (r, p) = fixture(&[
            ("a", Some("k1"), 0.1),
            ("b", Some("k2"), 0.5),
            ("c", Some("k3"), 0.9),
            ("d", Some("zz"), 0.2),
            ("e", None, 0.3),
        ]);
        let codes = CountyCodeTable::new(
            "rucc",
            [("k1".to_string(), 1), ("k2".to_string(), 4), ("k3".to_string(), 9)],
        )
        .unwrap();
        let a = code_agreement(&r, &p, &codes).unwrap();
        assert_eq!(a.spearman, 1.0);
        assert_eq!((a.matched, a.unmatched), (3, 2));

        let one = CountyCodeTable::new("rucc", [("k1".to_string(), 1)]).unwrap();
        assert_eq!(
            code_agreement(&r, &p, &one).unwrap_err(),
            AnalysisError::InsufficientOverlap { matched: 1 }
        );
    }

    #[test]
    fn code_table_rejects_duplicates() {
        let err = CountyCodeTable::new("x", [("a".to_string(), 1), ("a".to_string(), 2)]).unwrap_err();
        assert_eq!(err, AnalysisError::DuplicateCounty("a".into()));
        assert_eq!(
            CountyCodeTable::new("x", Vec::new()).unwrap_err(),
            AnalysisError::EmptyCodeTable
        );
    }

    #[test]
    fn unknown_place_is_an_error() {
        let (mut r, p) = fixture(&[("a", Some("k"), 0.5)]);
        r[0].place_id = "ghost".into();
        assert!(matches!(heterogeneity(&r, &p), Err(AnalysisError::UnknownPlace { .. })));
    }
}
