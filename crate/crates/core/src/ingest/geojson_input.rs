use std::path::Path;

use serde_json::Value;

use super::{Coord, IngestError, RawRow, RejectReason, Rejection};

pub(super) fn read(path: &Path) -> Result<(Vec<RawRow>, Vec<Rejection>), IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |detail: String| IngestError::MalformedInput {
        path: path.to_path_buf(),
        detail,
    };
    let doc: Value = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(malformed("top-level object is not a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing `features` array".into()))?;

    let mut rows = Vec::with_capacity(features.len());
    let mut rejects = Vec::new();
    for (i, feature) in features.iter().enumerate() {
        let row = i as u64 + 1;
        match decode(feature) {
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
    Ok((rows, rejects))
}

fn id_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn decode(feature: &Value) -> Result<RawRow, String> {
    let geometry = feature.get("geometry").ok_or("feature without geometry")?;
    if geometry.get("type").and_then(Value::as_str) != Some("Point") {
        return Err("geometry is not a Point".into());
    }
    let coords = geometry
        .get("coordinates")
        .and_then(Value::as_array)
        .ok_or("Point without coordinates")?;
    if coords.len() < 2 {
        return Err("Point needs two coordinates".into());
    }
    let x = coords[0].as_f64().ok_or("non-numeric coordinate")?;
    let y = coords[1].as_f64().ok_or("non-numeric coordinate")?;

    let props = feature
        .get("properties")
        .and_then(Value::as_object)
        .ok_or("feature without properties")?;
    let place_id = props
        .get("place_id")
        .and_then(id_string)
        .ok_or("missing place_id")?;
    let year = props
        .get("year")
        .and_then(Value::as_i64)
        .and_then(|y| i32::try_from(y).ok())
        .ok_or("missing or non-integer year")?;
    let population = props
        .get("population")
        .and_then(Value::as_i64)
        .ok_or("missing or non-integer population")?;
    let text = |key: &str| {
        props
            .get(key)
            .and_then(Value::as_str)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
    };

    Ok(RawRow {
        row: 0,
        place_id,
        name: text("name"),
        year,
        coord: Coord::new(x, y),
        population,
        county_id: props.get("county_id").and_then(id_string),
    })
}
