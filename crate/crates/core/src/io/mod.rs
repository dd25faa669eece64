//! Weather and building readers, result writers.

mod building;
mod results;
mod tmy2;
mod weather;

pub use building::{building_from_json, parse_building, BuildingDescription};
pub use results::{
    field_file_name, format_sig6, write_field_file, write_results, write_summary_csv, FieldBlock, SUMMARY_COLUMNS,
};
pub use tmy2::{parse_tmy2_subset, read_tmy2, Tmy2Data, Tmy2Header, TMY2_RECORD_LENGTH};
pub use weather::{format_timestamp, parse_timestamp, parse_weather_csv, read_weather_csv, write_weather_csv};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::daylight::DaylightError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{kind} not found: {}", path.display())]
    NotFound { kind: &'static str, path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {message}")]
    Data { line: u64, message: String },
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("{field}: {source}")]
    Geometry {
        field: String,
        #[source]
        source: DaylightError,
    },
}

impl IoError {
    /// Line of the offending input, for parse and data errors.
    pub fn line(&self) -> Option<u64> {
        match self {
            IoError::Parse { line, .. } | IoError::Data { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn open(path: &Path, kind: &'static str) -> Result<std::fs::File, IoError> {
    std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => IoError::NotFound {
            kind,
            path: path.to_path_buf(),
        },
        _ => IoError::io(path, e),
    })
}
