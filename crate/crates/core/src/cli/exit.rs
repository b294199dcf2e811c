//! Error-to-exit-code mapping for the command-line tool.
//!
//! | code | kind |
//! |-----:|------|
//! | 0 | success |
//! | 1 | Internal |
//! | 2 | Usage (argument parsing) |
//! | 3 | Io |
//! | 10 | MalformedHeader |
//! | 11 | MalformedInput |
//! | 12 | DuplicatePlace |
//! | 13 | InvalidCoordinate |
//! | 14 | NegativePopulation |
//! | 15 | MixedCoordinateModes |
//! | 20 | InvalidConfig |
//! | 21 | MissingCategory |
//! | 22 | NoPlaces |
//! | 23 | DuplicateYear |
//! | 30 | NoCountyIds |
//! | 31 | InsufficientOverlap |
//! | 32 | ConstantRanks |
//! | 33 | CodeTable |
//! | 34 | UnknownPlace |

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::index_core::ComputeError;
use crate::ingest::IngestError;
use crate::spatial::SpatialError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Compute(#[from] ComputeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable name of the error kind, as printed on the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Ingest(e) => match e {
                IngestError::Io { .. } => "Io",
                IngestError::MalformedHeader { .. } => "MalformedHeader",
                IngestError::MalformedInput { .. } | IngestError::YearMismatch { .. } => {
                    "MalformedInput"
                }
                IngestError::DuplicatePlace { .. } => "DuplicatePlace",
                IngestError::InvalidCoordinate { .. } => "InvalidCoordinate",
                IngestError::NegativePopulation { .. } => "NegativePopulation",
                IngestError::MixedCoordinateModes { .. } => "MixedCoordinateModes",
            },
            CliError::Compute(e) => match e {
                ComputeError::InvalidConfig(_) => "InvalidConfig",
                ComputeError::Spatial(SpatialError::MissingCategory { .. })
                | ComputeError::Spatial(SpatialError::EmptyCategory { .. }) => "MissingCategory",
                ComputeError::Spatial(_) => "InvalidConfig",
                ComputeError::NoPlaces => "NoPlaces",
                ComputeError::DuplicateYear(_) => "DuplicateYear",
            },
            CliError::Analysis(e) => match e {
                AnalysisError::NoCountyIds { .. } => "NoCountyIds",
                AnalysisError::InsufficientOverlap { .. } => "InsufficientOverlap",
                AnalysisError::ConstantRanks => "ConstantRanks",
                AnalysisError::DuplicateCounty(_)
                | AnalysisError::EmptyCodeTable
                | AnalysisError::Input { .. } => "CodeTable",
                AnalysisError::UnknownPlace { .. } => "UnknownPlace",
            },
            CliError::Io { .. } => "Io",
            CliError::Usage(_) => "Usage",
            CliError::Internal(_) => "Internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code_for(self.kind())
    }

    /// `error code=<n> kind=<Kind> message="<json-escaped text>"`
    pub fn error_line(&self) -> String {
        let msg = serde_json::to_string(&self.to_string()).unwrap_or_else(|_| "\"\"".into());
        format!(
            "error code={} kind={} message={msg}",
            self.exit_code(),
            self.kind()
        )
    }
}

pub fn exit_code_for(kind: &str) -> i32 {
    match kind {
        "Internal" => 1,
        "Usage" => 2,
        "Io" => 3,
        "MalformedHeader" => 10,
        "MalformedInput" => 11,
        "DuplicatePlace" => 12,
        "InvalidCoordinate" => 13,
        "NegativePopulation" => 14,
        "MixedCoordinateModes" => 15,
        "InvalidConfig" => 20,
        "MissingCategory" => 21,
        "NoPlaces" => 22,
        "DuplicateYear" => 23,
        "NoCountyIds" => 30,
        "InsufficientOverlap" => 31,
        "ConstantRanks" => 32,
        "CodeTable" => 33,
        "UnknownPlace" => 34,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::DEFAULT_CATEGORIES;

    #[test]
    fn distinct_codes() {
        let kinds = [
            "Internal", "Usage", "Io", "MalformedHeader", "MalformedInput", "DuplicatePlace",
            "InvalidCoordinate", "NegativePopulation", "MixedCoordinateModes", "InvalidConfig",
            "MissingCategory", "NoPlaces", "DuplicateYear", "NoCountyIds", "InsufficientOverlap",
            "ConstantRanks", "CodeTable", "UnknownPlace",
        ];
        let mut codes: Vec<i32> = kinds.iter().map(|k| exit_code_for(k)).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), kinds.len());
    }

    #[test]
    fn error_line_format() {
        let e = CliError::from(ComputeError::Spatial(SpatialError::MissingCategory {
            year: 2010,
            category: 5,
            band: DEFAULT_CATEGORIES[4],
        }));
        let line = e.error_line();
        assert!(line.starts_with("error code=21 kind=MissingCategory message=\"year 2010: category 5"), "{line}");
        assert_eq!(line.lines().count(), 1);
    }
}
