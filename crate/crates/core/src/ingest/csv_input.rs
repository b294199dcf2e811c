use std::fs::File;
use std::path::Path;

use super::{Coord, CoordinateMode, IngestError, RawRow, RejectReason, Rejection};

pub const GEOGRAPHIC_HEADER: &[&str] = &[
    "place_id",
    "name",
    "year",
    "lon",
    "lat",
    "population",
    "county_id",
];

pub const PLANAR_HEADER: &[&str] = &[
    "place_id",
    "name",
    "year",
    "x",
    "y",
    "population",
    "county_id",
];

pub(super) fn read(
    path: &Path,
) -> Result<(CoordinateMode, Vec<RawRow>, Vec<Rejection>), IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let header = rdr.headers().map_err(|e| csv_to_ingest(path, e))?.clone();
    let fields: Vec<&str> = header
        .iter()
        .enumerate()
        .map(|(i, h)| if i == 0 { h.trim_start_matches('\u{feff}') } else { h })
        .collect();
    let mode = if fields == GEOGRAPHIC_HEADER {
        CoordinateMode::Geographic
    } else if fields == PLANAR_HEADER {
        CoordinateMode::Planar
    } else {
        return Err(IngestError::MalformedHeader {
            path: path.to_path_buf(),
            found: fields.join(","),
        });
    };

    let mut rows = Vec::new();
    let mut rejects = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let row = record.position().map(|p| p.line()).unwrap_or(line);
                match decode(&record) {
                    Ok(mut raw) => {
                        raw.row = row;
                        rows.push(raw);
                    }
                    Err(detail) => rejects.push(Rejection {
                        source: path.to_path_buf(),
                        row,
                        reason: RejectReason::Malformed { detail },
                    }),
                }
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => return Err(csv_to_ingest(path, e)),
                _ => rejects.push(Rejection {
                    source: path.to_path_buf(),
                    row: e.position().map(|p| p.line()).unwrap_or(line),
                    reason: RejectReason::Malformed {
                        detail: e.to_string(),
                    },
                }),
            },
        }
    }
    Ok((mode, rows, rejects))
}

fn csv_to_ingest(path: &Path, e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => IngestError::MalformedInput {
            path: path.to_path_buf(),
            detail: format!("{other:?}"),
        },
    }
}

fn optional(s: &str) -> Option<String> {
    if s.is_empty() {
        None
    } else {
        Some(s.to_string())
    }
}

fn decode(rec: &csv::StringRecord) -> Result<RawRow, String> {
    if rec.len() != GEOGRAPHIC_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            GEOGRAPHIC_HEADER.len(),
            rec.len()
        ));
    }
    let place_id = rec[0].trim();
    if place_id.is_empty() {
        return Err("empty place_id".into());
    }
    let year = rec[2]
        .trim()
        .parse::<i32>()
        .map_err(|_| format!("year `{}` is not an integer", &rec[2]))?;
    let x = parse_float(&rec[3])?;
    let y = parse_float(&rec[4])?;
    let population = rec[5]
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("population `{}` is not an integer", &rec[5]))?;
    Ok(RawRow {
        row: 0,
        place_id: place_id.to_string(),
        name: optional(&rec[1]),
        year,
        coord: Coord::new(x, y),
        population,
        county_id: optional(rec[6].trim()),
    })
}

fn parse_float(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("coordinate `{s}` is not a number"))
}
