//! Versioned JSON reports shared by every command.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::marginals::ActionSpec;

pub const SCHEMA: &str = "bernlab/1";

/// `sha256:<hex>` of the compact JSON form of an action.
pub fn spec_digest(spec: &ActionSpec) -> String {
    let json = serde_json::to_string(spec).expect("spec serializes");
    let hash = Sha256::digest(json.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_digest: Option<String>,
    pub seeds: Vec<u64>,
    pub results: Value,
    pub certificates: Vec<Value>,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(command: impl Into<String>, spec: Option<&ActionSpec>, results: impl Serialize) -> Result<Self> {
        Ok(Report {
            schema: SCHEMA,
            tool: "bernlab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            spec_digest: spec.map(spec_digest),
            seeds: Vec::new(),
            results: serde_json::to_value(results)?,
            certificates: Vec::new(),
            wall_time_ms: 0.0,
        })
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn with_certificate(mut self, cert: impl Serialize) -> Result<Self> {
        self.certificates.push(serde_json::to_value(cert)?);
        Ok(self)
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Everything except the wall time, for reproducibility comparisons.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("wall_time_ms");
        v
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::InvalidArgument(format!("report lacks field {key:?}")))
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

/// Checks the envelope and that every numeric `value` comes with a
/// nonnegative `err` next to it.
pub fn validate_report(v: &Value) -> Result<()> {
    if field(v, "schema")?.as_str() != Some(SCHEMA) {
        return Err(invalid(format!("schema must be {SCHEMA:?}")));
    }
    for key in ["tool", "version", "command"] {
        if !field(v, key)?.is_string() {
            return Err(invalid(format!("{key} must be a string")));
        }
    }
    if let Some(d) = v.get("spec_digest") {
        let ok = d.as_str().and_then(|s| s.strip_prefix("sha256:")).is_some_and(|h| {
            h.len() == 64 && h.bytes().all(|b| b.is_ascii_hexdigit())
        });
        if !ok {
            return Err(invalid("spec_digest must be sha256:<64 hex digits>".into()));
        }
    }
    if !field(v, "seeds")?.as_array().is_some_and(|a| a.iter().all(Value::is_u64)) {
        return Err(invalid("seeds must be a list of integers".into()));
    }
    if !field(v, "certificates")?.is_array() {
        return Err(invalid("certificates must be a list".into()));
    }
    if !field(v, "wall_time_ms")?.is_number() {
        return Err(invalid("wall_time_ms must be a number".into()));
    }
    check_errs(field(v, "results")?, "results")?;
    for (i, c) in v["certificates"].as_array().into_iter().flatten().enumerate() {
        check_errs(c, &format!("certificates[{i}]"))?;
    }
    Ok(())
}

fn check_errs(v: &Value, path: &str) -> Result<()> {
    match v {
        Value::Object(map) => {
            if map.get("value").is_some_and(Value::is_number) {
                match map.get("err").and_then(Value::as_f64) {
                    Some(e) if e >= 0.0 => {}
                    _ => return Err(invalid(format!("{path}: numeric value without a nonnegative err"))),
                }
            }
            for (k, x) in map {
                check_errs(x, &format!("{path}.{k}"))?;
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                check_errs(x, &format!("{path}[{i}]"))?;
            }
        }
        _ => {}
    }
    Ok(())
}
