//! Result files: the results CSV, GeoJSON points, the distance dump, and
//! all-or-nothing writing of a batch of output files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::index_core::{ClampFlags, RIResult, RunOutput};
use crate::ingest::PlaceSet;
use crate::spatial::NUM_CATEGORIES;

use super::exit::CliError;

pub const RESULTS_HEADER: &[&str] = &[
    "place_id", "year", "population", "d1_km", "d2_km", "d3_km", "d4_km", "d5_km", "raw_ri", "ri",
    "flags",
];

pub const DEBUG_HEADER: &[&str] = &["place_id", "year", "pc", "distance_km", "nearest_id", "provenance"];

fn csv_err(e: csv::Error) -> CliError {
    CliError::Internal(format!("csv encoding failed: {e}"))
}

pub fn results_csv(run: &RunOutput) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).map_err(csv_err)?;
    for r in run.results() {
        let mut row = Vec::with_capacity(RESULTS_HEADER.len());
        row.push(r.place_id.clone());
        row.push(r.year.to_string());
        row.push(r.population.to_string());
        row.extend(r.distances_km.iter().map(f64::to_string));
        row.push(r.raw.to_string());
        row.push(r.scaled.to_string());
        row.push(r.flags.to_field());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Reads a results CSV written by [`results_csv`].
pub fn read_results_csv(path: &Path) -> Result<Vec<RIResult>, CliError> {
    let bad = |detail: String| {
        CliError::from(crate::ingest::IngestError::MalformedInput {
            path: path.to_path_buf(),
            detail,
        })
    };
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != RESULTS_HEADER {
        return Err(CliError::from(crate::ingest::IngestError::MalformedHeader {
            path: path.to_path_buf(),
            found: header.iter().collect::<Vec<_>>().join(","),
        }));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("line {line}: `{}` is not a number", &rec[i])))
        };
        let mut d = [0.0; NUM_CATEGORIES];
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = num(3 + k)?;
        }
        out.push(RIResult {
            place_id: rec[0].to_string(),
            year: rec[1]
                .parse()
                .map_err(|_| bad(format!("line {line}: bad year `{}`", &rec[1])))?,
            population: rec[2]
                .parse()
                .map_err(|_| bad(format!("line {line}: bad population `{}`", &rec[2])))?,
            distances_km: d,
            raw: num(8)?,
            scaled: num(9)?,
            flags: ClampFlags::parse_field(&rec[10]).map_err(|e| bad(format!("line {line}: {e}")))?,
        });
    }
    Ok(out)
}

/// Point features carrying the index as properties.
pub fn results_geojson(run: &RunOutput, sets: &[PlaceSet]) -> Result<Vec<u8>, CliError> {
    let mut features = Vec::new();
    for y in &run.years {
        let set = sets
            .iter()
            .find(|s| s.year() == y.year)
            .ok_or_else(|| CliError::Internal(format!("no place set for year {}", y.year)))?;
        for (rec, r) in set.iter().zip(&y.results) {
            debug_assert_eq!(rec.place_id, r.place_id);
            let mut props = Map::new();
            props.insert("place_id".into(), json!(rec.place_id));
            if let Some(n) = &rec.name {
                props.insert("name".into(), json!(n));
            }
            props.insert("year".into(), json!(rec.year));
            props.insert("population".into(), json!(rec.population));
            if let Some(c) = &rec.county_id {
                props.insert("county_id".into(), json!(c));
            }
            for (k, d) in r.distances_km.iter().enumerate() {
                props.insert(format!("d{}_km", k + 1), json!(d));
            }
            props.insert("raw_ri".into(), json!(r.raw));
            props.insert("ri".into(), json!(r.scaled));
            props.insert("flags".into(), json!(r.flags.to_field()));
            features.push(json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [rec.coord.x, rec.coord.y]},
                "properties": Value::Object(props),
            }));
        }
    }
    let doc = json!({"type": "FeatureCollection", "features": features});
    let mut bytes = serde_json::to_vec(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn debug_distances_csv(run: &RunOutput) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DEBUG_HEADER).map_err(csv_err)?;
    for y in &run.years {
        for dv in &y.vectors {
            for k in 0..NUM_CATEGORIES {
                w.write_record([
                    dv.place_id.as_str(),
                    &y.year.to_string(),
                    &(k + 1).to_string(),
                    &dv.d[k].to_string(),
                    dv.nearest_id[k].as_deref().unwrap_or(""),
                    &dv.provenance[k].to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Writes every file to a temporary sibling first and renames them into place
/// only once all of them have been written.
pub fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::Builder::new()
            .prefix(".remoteness-")
            .tempfile_in(&dir)
            .map_err(|e| CliError::io(&dir, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
        tmp.flush().map_err(|e| CliError::io(path, e))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    }
    Ok(())
}
