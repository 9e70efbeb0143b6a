use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};
use subkoba::Error;

use crate::config::{Format, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    CheckFailed,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InputError => 1,
            Status::CheckFailed => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
}

/// Command failure: a bad input or a failed check.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub entry: ErrorEntry,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { status: Status::InputError, entry: ErrorEntry { kind: "input".into(), message: message.into() } }
    }
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::UnsupportedType(_) => "unsupported_type",
        Error::InvalidRealForm(_) => "invalid_real_form",
        Error::InvalidGradingElement(_) => "invalid_grading_element",
        Error::DomainError(_) => "domain_error",
        Error::NotNegative { .. } => "not_negative",
        Error::FlowEscape { .. } => "flow_escape",
        Error::DegenerateFrame(_) => "degenerate_frame",
        Error::NoConnection(_) => "no_connection",
        Error::DiscEscape(_) => "disc_escape",
        Error::InvalidCertificate(_) => "invalid_certificate",
        Error::InvalidIdeal(_) => "invalid_ideal",
        Error::UnboundedEntry(_) => "unbounded_entry",
        Error::Fixture(_) => "fixture",
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotNegative { .. }
            | Error::FlowEscape { .. }
            | Error::DegenerateFrame(_)
            | Error::NoConnection(_)
            | Error::DiscEscape(_)
            | Error::InvalidCertificate(_) => Status::CheckFailed,
            _ => Status::InputError,
        };
        Self { status, entry: ErrorEntry { kind: kind_of(&e).into(), message: e.to_string() } }
    }
}

/// Outcome of a command: a result and, for failed checks, the reasons.
pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub errors: Vec<ErrorEntry>,
}

impl Outcome {
    pub fn ok(result: impl Serialize) -> Self {
        Self { status: Status::Ok, result: to_value(result), errors: Vec::new() }
    }

    pub fn failed(result: impl Serialize, kind: &str, message: impl Into<String>) -> Self {
        Self {
            status: Status::CheckFailed,
            result: to_value(result),
            errors: vec![ErrorEntry { kind: kind.into(), message: message.into() }],
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }))
}

pub fn envelope(config: Option<&RunConfig>, outcome: &Outcome, timestamp: bool) -> Value {
    let mut v = json!({
        "tool": "subkoba",
        "version": env!("CARGO_PKG_VERSION"),
        "status": outcome.status,
        "config": config,
        "result": outcome.result,
        "errors": outcome.errors,
    });
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        v["timestamp_unix"] = json!(secs);
    }
    v
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub fn render(report: &Value, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(report).map_err(|e| e.to_string())?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(|e| e.to_string())?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

pub fn emit(bytes: &[u8], output: Option<&std::path::Path>) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(bytes).map_err(|e| e.to_string()),
    }
}
