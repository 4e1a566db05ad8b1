//! Files in and out: instance and allocation documents, the synthetic
//! generator, and CSV export of metric series.

mod csv;
mod files;
mod generator;

pub use csv::{export_metrics, metrics_to_csv, METRICS_HEADER};
pub use files::{
    allocation_from_str, allocation_to_string, instance_from_str, instance_to_string, read_allocation, read_instance,
    read_instance_document, write_allocation, write_instance, write_instance_document, InstanceDocument,
    SCHEMA_VERSION,
};
pub use generator::{generate, read_generator_config, GeneratorConfig, GroupSpec, SupplyModel};

use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invalid generator config: {}", .0.join("; "))]
    Config(Vec<String>),
}

impl DataError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        DataError::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    fn io(path: &std::path::Path, source: io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Rationals stored as decimal (or `p/q`) strings.
pub(crate) mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::{parse_rational, render_rational, Rational};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}
