//! Network ingestion: IEEE Common Data Format and a JSON fixture format,
//! both normalized into a per-unit [`NetworkModel`].

mod cdf;
mod json;
mod model;
mod validate;

use std::collections::HashSet;

use thiserror::Error;

pub use cdf::parse_cdf;
pub use json::{parse_json_network, to_json_network};
pub use model::{BranchRecord, BusRecord, BusType, NetworkModel};
pub use validate::{validate_network, Diagnostic, DiagnosticKind, Severity};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("missing section: {0}")]
    MissingSection(String),
    #[error("line {line}: malformed {field}: {reason}")]
    MalformedRecord {
        line: usize,
        field: String,
        reason: String,
    },
    #[error("no slack bus in case")]
    NoSlackBus,
    #[error("duplicate bus id {0}")]
    DuplicateBusId(u32),
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },
}

/// Checks shared by every parser: bus ids are unique and a slack bus exists.
/// Returns the position of the first bus id seen twice, if any.
fn check_bus_set(buses: &[BusRecord]) -> Result<(), IngestError> {
    let mut seen = HashSet::with_capacity(buses.len());
    for bus in buses {
        if !seen.insert(bus.id) {
            return Err(IngestError::DuplicateBusId(bus.id));
        }
    }
    if !buses.iter().any(|b| b.bus_type == BusType::Slack) {
        return Err(IngestError::NoSlackBus);
    }
    Ok(())
}
