//! Place tables: parsing, validation and export.
//!
//! Input is one point per place (typically the polygon centroid of a census
//! place) with a population count and a census year. Files are CSV with a
//! fixed header, or GeoJSON FeatureCollections of Point features. Rows that
//! violate a record invariant are not dropped silently: they end up in the
//! rejection list returned alongside the accepted records.

mod csv_input;
mod geojson_input;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_input::{GEOGRAPHIC_HEADER, PLANAR_HEADER};

/// How the two coordinate columns of an input are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordinateMode {
    /// `lon`/`lat` in decimal degrees.
    Geographic,
    /// `x`/`y` in meters of some projected system.
    Planar,
}

impl CoordinateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoordinateMode::Geographic => "geographic",
            CoordinateMode::Planar => "planar",
        }
    }
}

impl fmt::Display for CoordinateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CoordinateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geographic" => Ok(CoordinateMode::Geographic),
            "planar" => Ok(CoordinateMode::Planar),
            other => Err(format!("unknown coordinate mode `{other}`")),
        }
    }
}

/// A point position. In geographic mode `x` is longitude and `y` latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// One populated place in one census year.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceRecord {
    pub place_id: String,
    pub name: Option<String>,
    pub year: i32,
    pub coord: Coord,
    pub population: u64,
    pub county_id: Option<String>,
}

impl PlaceRecord {
    pub fn new(place_id: impl Into<String>, year: i32, coord: Coord, population: u64) -> Self {
        Self {
            place_id: place_id.into(),
            name: None,
            year,
            coord,
            population,
            county_id: None,
        }
    }

    pub fn with_county(mut self, county_id: impl Into<String>) -> Self {
        self.county_id = Some(county_id.into());
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// All places of a single year, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceSet {
    year: i32,
    mode: CoordinateMode,
    records: Vec<PlaceRecord>,
}

impl PlaceSet {
    /// Builds a set from already-parsed records, enforcing the per-year
    /// invariants (shared year, unique ids, valid coordinates).
    pub fn new(
        year: i32,
        mode: CoordinateMode,
        records: Vec<PlaceRecord>,
    ) -> Result<Self, IngestError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.year != year {
                return Err(IngestError::YearMismatch {
                    place_id: r.place_id.clone(),
                    expected: year,
                    found: r.year,
                });
            }
            if !seen.insert(r.place_id.as_str()) {
                return Err(IngestError::DuplicatePlace {
                    place_id: r.place_id.clone(),
                    year,
                });
            }
            check_coordinate(mode, r.coord).map_err(|detail| IngestError::InvalidCoordinate {
                place_id: r.place_id.clone(),
                detail,
            })?;
        }
        Ok(Self {
            year,
            mode,
            records,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn mode(&self) -> CoordinateMode {
        self.mode
    }

    pub fn records(&self) -> &[PlaceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PlaceRecord> {
        self.records.iter()
    }
}

/// Why a single input row was not turned into a [`PlaceRecord`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    DuplicatePlace { place_id: String, year: i32 },
    InvalidCoordinate { place_id: String, detail: String },
    NegativePopulation { place_id: String, value: i64 },
    Malformed { detail: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::DuplicatePlace { place_id, year } => {
                write!(f, "duplicate place `{place_id}` in year {year}")
            }
            RejectReason::InvalidCoordinate { place_id, detail } => {
                write!(f, "invalid coordinate for `{place_id}`: {detail}")
            }
            RejectReason::NegativePopulation { place_id, value } => {
                write!(f, "negative population {value} for `{place_id}`")
            }
            RejectReason::Malformed { detail } => write!(f, "malformed row: {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub source: PathBuf,
    /// 1-based line (CSV) or feature (GeoJSON) number.
    pub row: u64,
    pub reason: RejectReason,
}

impl Rejection {
    fn into_error(self) -> IngestError {
        match self.reason {
            RejectReason::DuplicatePlace { place_id, year } => {
                IngestError::DuplicatePlace { place_id, year }
            }
            RejectReason::InvalidCoordinate { place_id, detail } => {
                IngestError::InvalidCoordinate { place_id, detail }
            }
            RejectReason::NegativePopulation { place_id, value } => {
                IngestError::NegativePopulation { place_id, value }
            }
            RejectReason::Malformed { detail } => IngestError::MalformedInput {
                path: self.source,
                detail: format!("row {}: {detail}", self.row),
            },
        }
    }
}

/// Places sharing an exact position. Not an error: the distance floor
/// absorbs the resulting zero distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplicatePosition {
    pub year: i32,
    pub coord: Coord,
    pub place_ids: Vec<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: header `{found}` matches neither `{}` nor `{}`", path.display(), GEOGRAPHIC_HEADER.join(","), PLANAR_HEADER.join(","))]
    MalformedHeader { path: PathBuf, found: String },
    #[error("{}: {detail}", path.display())]
    MalformedInput { path: PathBuf, detail: String },
    #[error("duplicate place `{place_id}` in year {year}")]
    DuplicatePlace { place_id: String, year: i32 },
    #[error("invalid coordinate for `{place_id}`: {detail}")]
    InvalidCoordinate { place_id: String, detail: String },
    #[error("negative population {value} for `{place_id}`")]
    NegativePopulation { place_id: String, value: i64 },
    #[error("inputs mix coordinate modes: {first} and {second}")]
    MixedCoordinateModes {
        first: CoordinateMode,
        second: CoordinateMode,
    },
    #[error("record `{place_id}` has year {found}, set is for {expected}")]
    YearMismatch {
        place_id: String,
        expected: i32,
        found: i32,
    },
}

/// Result of reading one or more input files.
#[derive(Debug, Clone)]
pub struct ParsedPlaces {
    pub mode: CoordinateMode,
    /// One set per distinct year, ascending by year.
    pub sets: Vec<PlaceSet>,
    pub rejections: Vec<Rejection>,
}

impl ParsedPlaces {
    /// Turns the first rejected row, if any, into an error.
    pub fn strict(self) -> Result<Self, IngestError> {
        match self.rejections.first() {
            Some(r) => Err(r.clone().into_error()),
            None => Ok(self),
        }
    }

    pub fn total_records(&self) -> usize {
        self.sets.iter().map(PlaceSet::len).sum()
    }
}

/// A row after field decoding but before set-level checks.
pub(crate) struct RawRow {
    pub row: u64,
    pub place_id: String,
    pub name: Option<String>,
    pub year: i32,
    pub coord: Coord,
    pub population: i64,
    pub county_id: Option<String>,
}

/// Returns a description of the violated bound, if any.
pub fn check_coordinate(mode: CoordinateMode, c: Coord) -> Result<(), String> {
    if !c.x.is_finite() || !c.y.is_finite() {
        return Err(format!("non-finite coordinate ({}, {})", c.x, c.y));
    }
    if mode == CoordinateMode::Geographic {
        if !(-90.0..=90.0).contains(&c.y) {
            return Err(format!("latitude {} outside [-90, 90]", c.y));
        }
        if !(-180.0..=180.0).contains(&c.x) {
            return Err(format!("longitude {} outside [-180, 180]", c.x));
        }
    }
    Ok(())
}

fn is_geojson(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("geojson") | Some("json")
    )
}

/// Reads a single file. See [`parse_inputs`].
pub fn parse_places(path: &Path, mode: Option<CoordinateMode>) -> Result<ParsedPlaces, IngestError> {
    parse_inputs(&[path.to_path_buf()], mode)
}

/// Reads every input and partitions the accepted rows by year.
///
/// CSV files fix their coordinate mode through the header; GeoJSON files take
/// the requested mode (geographic when none is requested). Every file in one
/// run must resolve to the same mode. Rows keep file order within each year,
/// and files are consumed in the order given.
pub fn parse_inputs(
    paths: &[PathBuf],
    mode: Option<CoordinateMode>,
) -> Result<ParsedPlaces, IngestError> {
    let mut resolved = mode;
    let mut per_file = Vec::with_capacity(paths.len());

    for path in paths {
        let (file_mode, rows, rejects) = if is_geojson(path) {
            let m = resolved.unwrap_or(CoordinateMode::Geographic);
            let (rows, rejects) = geojson_input::read(path)?;
            (m, rows, rejects)
        } else {
            csv_input::read(path)?
        };
        match resolved {
            Some(m) if m != file_mode => {
                return Err(IngestError::MixedCoordinateModes {
                    first: m,
                    second: file_mode,
                })
            }
            _ => resolved = Some(file_mode),
        }
        per_file.push((path.clone(), rows, rejects));
    }

    let mode = resolved.unwrap_or(CoordinateMode::Geographic);
    let mut by_year: BTreeMap<i32, Vec<PlaceRecord>> = BTreeMap::new();
    let mut seen: HashSet<(i32, String)> = HashSet::new();
    let mut rejections = Vec::new();

    for (path, rows, mut file_rejects) in per_file {
        for raw in rows {
            let reject = |reason| Rejection {
                source: path.clone(),
                row: raw.row,
                reason,
            };
            if raw.population < 0 {
                file_rejects.push(reject(RejectReason::NegativePopulation {
                    place_id: raw.place_id.clone(),
                    value: raw.population,
                }));
                continue;
            }
            if let Err(detail) = check_coordinate(mode, raw.coord) {
                file_rejects.push(reject(RejectReason::InvalidCoordinate {
                    place_id: raw.place_id.clone(),
                    detail,
                }));
                continue;
            }
            if !seen.insert((raw.year, raw.place_id.clone())) {
                file_rejects.push(reject(RejectReason::DuplicatePlace {
                    place_id: raw.place_id.clone(),
                    year: raw.year,
                }));
                continue;
            }
            by_year.entry(raw.year).or_default().push(PlaceRecord {
                place_id: raw.place_id,
                name: raw.name,
                year: raw.year,
                coord: raw.coord,
                population: raw.population as u64,
                county_id: raw.county_id,
            });
        }
        file_rejects.sort_by_key(|r| r.row);
        rejections.extend(file_rejects);
    }

    let sets = by_year
        .into_iter()
        .map(|(year, records)| PlaceSet {
            year,
            mode,
            records,
        })
        .collect();

    Ok(ParsedPlaces {
        mode,
        sets,
        rejections,
    })
}

/// Re-checks the coordinate invariants of a set and reports places that share
/// an exact position. Co-located places are flagged, not rejected.
pub fn validate_coordinates(ps: &PlaceSet) -> Result<Vec<DuplicatePosition>, IngestError> {
    let mut groups: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for (i, r) in ps.records.iter().enumerate() {
        check_coordinate(ps.mode, r.coord).map_err(|detail| IngestError::InvalidCoordinate {
            place_id: r.place_id.clone(),
            detail,
        })?;
        // -0.0 and 0.0 are the same position.
        let key = ((r.coord.x + 0.0).to_bits(), (r.coord.y + 0.0).to_bits());
        groups.entry(key).or_default().push(i);
    }
    let mut dups: Vec<DuplicatePosition> = groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|g| DuplicatePosition {
            year: ps.year,
            coord: ps.records[g[0]].coord,
            place_ids: g.iter().map(|&i| ps.records[i].place_id.clone()).collect(),
        })
        .collect();
    dups.sort_by(|a, b| a.place_ids[0].cmp(&b.place_ids[0]));
    Ok(dups)
}

/// Writes sets back out in the canonical CSV layout for their mode.
pub fn write_places_csv<W: Write>(out: W, sets: &[PlaceSet]) -> Result<(), csv::Error> {
    let mode = sets.first().map(|s| s.mode).unwrap_or(CoordinateMode::Geographic);
    let header = match mode {
        CoordinateMode::Geographic => GEOGRAPHIC_HEADER,
        CoordinateMode::Planar => PLANAR_HEADER,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for set in sets {
        for r in &set.records {
            w.write_record([
                r.place_id.as_str(),
                r.name.as_deref().unwrap_or(""),
                &r.year.to_string(),
                &r.coord.x.to_string(),
                &r.coord.y.to_string(),
                &r.population.to_string(),
                r.county_id.as_deref().unwrap_or(""),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn partitions_by_year() {
        let f = write_tmp(
            "place_id,name,year,lon,lat,population,county_id\n\
             a,A,2000,-100,40,100,c1\n\
             b,,2010,-101,41,2000,\n\
             c,C,2000,-102,42,30000,c2\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert_eq!(parsed.mode, CoordinateMode::Geographic);
        let sizes: Vec<_> = parsed.sets.iter().map(|s| (s.year(), s.len())).collect();
        assert_eq!(sizes, vec![(2000, 2), (2010, 1)]);
        assert!(parsed.rejections.is_empty());
        let b = &parsed.sets[1].records()[0];
        assert_eq!(b.name, None);
        assert_eq!(b.county_id, None);
        assert_eq!(parsed.sets[0].records()[1].place_id, "c");
    }

    #[test]
    fn negative_population_is_rejected_and_others_kept() {
        let f = write_tmp(
            "place_id,name,year,x,y,population,county_id\n\
             a,,2010,0,0,100,\n\
             b,,2010,10,0,-5,\n\
             c,,2010,20,0,7,\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert_eq!(parsed.mode, CoordinateMode::Planar);
        assert_eq!(parsed.total_records(), 2);
        assert_eq!(parsed.rejections.len(), 1);
        assert_eq!(parsed.rejections[0].row, 3);
        assert_eq!(
            parsed.rejections[0].reason,
            RejectReason::NegativePopulation {
                place_id: "b".into(),
                value: -5
            }
        );
        let err = parsed.strict().unwrap_err();
        assert!(matches!(err, IngestError::NegativePopulation { value: -5, .. }));
    }

    #[test]
    fn duplicate_place_within_year_rejected_across_years_allowed() {
        let f = write_tmp(
            "place_id,name,year,x,y,population,county_id\n\
             a,,2010,0,0,100,\n\
             a,,2000,0,0,100,\n\
             a,,2010,5,5,100,\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert_eq!(parsed.total_records(), 2);
        assert!(matches!(
            parsed.rejections[0].reason,
            RejectReason::DuplicatePlace { year: 2010, .. }
        ));
    }

    #[test]
    fn bad_header() {
        let f = write_tmp("id,year,lon,lat,pop\n1,2000,0,0,1\n", ".csv");
        assert!(matches!(
            parse_places(f.path(), None),
            Err(IngestError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn requested_mode_must_match_header() {
        let f = write_tmp("place_id,name,year,x,y,population,county_id\n", ".csv");
        assert!(matches!(
            parse_places(f.path(), Some(CoordinateMode::Geographic)),
            Err(IngestError::MixedCoordinateModes { .. })
        ));
    }

    #[test]
    fn unparseable_fields_are_rejections_not_drops() {
        let f = write_tmp(
            "place_id,name,year,x,y,population,county_id\n\
             a,,20x0,0,0,100,\n\
             b,,2010,0,0\n\
             ,,2010,0,0,1,\n\
             d,,2010,0,0,1.5,\n\
             e,,2010,1,1,3,\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert_eq!(parsed.total_records(), 1);
        assert_eq!(parsed.rejections.len(), 4);
        assert!(parsed
            .rejections
            .iter()
            .all(|r| matches!(r.reason, RejectReason::Malformed { .. })));
    }

    #[test]
    fn latitude_out_of_range() {
        let f = write_tmp(
            "place_id,name,year,lon,lat,population,county_id\nz,,2010,10,91,5,\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert!(matches!(
            parsed.rejections[0].reason,
            RejectReason::InvalidCoordinate { .. }
        ));

        let set = PlaceSet::new(
            2010,
            CoordinateMode::Geographic,
            vec![PlaceRecord::new("z", 2010, Coord::new(10.0, 91.0), 5)],
        );
        assert!(matches!(set, Err(IngestError::InvalidCoordinate { .. })));
    }

    #[test]
    fn planar_nan_is_invalid() {
        let f = write_tmp(
            "place_id,name,year,x,y,population,county_id\nz,,2010,NaN,0,5,\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert!(matches!(
            parsed.rejections[0].reason,
            RejectReason::InvalidCoordinate { .. }
        ));
        assert!(check_coordinate(CoordinateMode::Planar, Coord::new(f64::NAN, 0.0)).is_err());
        assert!(check_coordinate(CoordinateMode::Planar, Coord::new(1e9, -1e9)).is_ok());
    }

    #[test]
    fn duplicate_positions_are_flagged() {
        let set = PlaceSet::new(
            2010,
            CoordinateMode::Geographic,
            vec![
                PlaceRecord::new("p", 2010, Coord::new(-90.0, 35.0), 10),
                PlaceRecord::new("q", 2010, Coord::new(-91.0, 35.0), 10),
                PlaceRecord::new("r", 2010, Coord::new(-90.0, 35.0), 10),
            ],
        )
        .unwrap();
        let dups = validate_coordinates(&set).unwrap();
        assert_eq!(dups.len(), 1);
        assert_eq!(dups[0].place_ids, vec!["p".to_string(), "r".to_string()]);
    }

    #[test]
    fn mixed_modes_across_files() {
        let a = write_tmp("place_id,name,year,x,y,population,county_id\n", ".csv");
        let b = write_tmp("place_id,name,year,lon,lat,population,county_id\n", ".csv");
        let err = parse_inputs(&[a.path().into(), b.path().into()], None).unwrap_err();
        assert!(matches!(err, IngestError::MixedCoordinateModes { .. }));
    }

    #[test]
    fn geojson_points() {
        let f = write_tmp(
            r#"{"type":"FeatureCollection","features":[
                {"type":"Feature","geometry":{"type":"Point","coordinates":[-100.5,40.25]},
                 "properties":{"place_id":"g1","year":2010,"population":1234,"name":"Gee","county_id":"c9"}},
                {"type":"Feature","geometry":{"type":"Point","coordinates":[-101.0,41.0]},
                 "properties":{"place_id":7,"year":2010,"population":-1}},
                {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]},
                 "properties":{"place_id":"g3","year":2010,"population":5}}
            ]}"#,
            ".geojson",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        assert_eq!(parsed.total_records(), 1);
        let r = &parsed.sets[0].records()[0];
        assert_eq!(r.place_id, "g1");
        assert_eq!(r.coord, Coord::new(-100.5, 40.25));
        assert_eq!(r.county_id.as_deref(), Some("c9"));
        assert_eq!(parsed.rejections.len(), 2);
        assert!(matches!(
            parsed.rejections[0].reason,
            RejectReason::NegativePopulation { .. }
        ));
        assert_eq!(parsed.rejections[1].row, 3);
    }

    #[test]
    fn csv_roundtrip() {
        let f = write_tmp(
            "place_id,name,year,x,y,population,county_id\n\
             a,\"Alpha, City\",2010,0.1,-3.3333333333333335,100,k\n\
             b,,2010,1e7,2,0,\n",
            ".csv",
        );
        let parsed = parse_places(f.path(), None).unwrap();
        let mut buf = Vec::new();
        write_places_csv(&mut buf, &parsed.sets).unwrap();
        let g = write_tmp(std::str::from_utf8(&buf).unwrap(), ".csv");
        let again = parse_places(g.path(), None).unwrap();
        assert_eq!(parsed.sets, again.sets);
    }
}
