//! Versioned JSON envelopes for every artifact the crate reads or writes.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// An artifact with a leading `schema_version` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<A> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub artifact: A,
}

impl<A> Versioned<A> {
    pub fn new(artifact: A) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact,
        }
    }
}

/// Pretty JSON of `artifact` wrapped in the current schema version.
pub fn to_json<A: Serialize>(artifact: &A) -> Result<String> {
    serde_json::to_string_pretty(&Versioned::new(artifact))
        .map_err(|e| invalid(format!("cannot serialize artifact: {e}")))
}

/// Pretty JSON array of versioned artifacts.
pub fn to_json_array<A: Serialize>(artifacts: &[A]) -> Result<String> {
    let wrapped: Vec<_> = artifacts.iter().map(Versioned::new).collect();
    serde_json::to_string_pretty(&wrapped)
        .map_err(|e| invalid(format!("cannot serialize artifacts: {e}")))
}

/// Parses a versioned artifact, rejecting unknown schema versions.
pub fn from_json<A: DeserializeOwned>(text: &str) -> std::result::Result<A, serde_json::Error> {
    unwrap_version(serde_json::from_str(text)?)
}

/// Like [`from_json`] for an already parsed JSON value.
pub fn from_value<A: DeserializeOwned>(
    value: serde_json::Value,
) -> std::result::Result<A, serde_json::Error> {
    unwrap_version(serde_json::from_value(value)?)
}

fn unwrap_version<A>(v: Versioned<A>) -> std::result::Result<A, serde_json::Error> {
    if v.schema_version != SCHEMA_VERSION {
        return Err(serde::de::Error::custom(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            v.schema_version
        )));
    }
    Ok(v.artifact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::Convention;
    use crate::persistence::PersistenceDiagram;

    #[test]
    fn envelope_round_trip() {
        let d = PersistenceDiagram::from_points(
            0,
            Convention::Superlevel,
            &[(0.3, 0.1), (1.0 / 3.0, 0.0)],
        )
        .unwrap();
        let text = to_json(&d).unwrap();
        assert!(text.starts_with("{\n  \"schema_version\": 1"));
        let back: PersistenceDiagram<f64> = from_json(&text).unwrap();
        assert_eq!(back, d);
        let wrong = text.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(from_json::<PersistenceDiagram<f64>>(&wrong).is_err());
    }
}
