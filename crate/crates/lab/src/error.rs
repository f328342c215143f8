use std::fmt;

use serde_json::{json, Value};

#[derive(Debug)]
pub enum LabError {
    /// A numerical routine rejected its input or failed.
    Core(lane_emden_core::Error),
    /// Malformed or inconsistent configuration.
    Config(String),
    Io(String),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Config(m) => write!(f, "invalid configuration: {m}"),
            LabError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<lane_emden_core::Error> for LabError {
    fn from(e: lane_emden_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl LabError {
    /// `{"error": {...}, "message": "..."}` for scripts.
    pub fn to_json(&self) -> Value {
        let detail = match self {
            LabError::Core(e) => serde_json::to_value(e).unwrap_or(Value::Null),
            LabError::Config(m) => json!({ "Config": m }),
            LabError::Io(m) => json!({ "Io": m }),
        };
        json!({ "error": detail, "message": self.to_string() })
    }
}
