use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass | Verdict::NotApplicable => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Exit code for bad input of any kind.
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub input_digest: String,
    pub result: serde_json::Value,
    pub verdict: Verdict,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn new(command: Vec<String>, digest: String, result: serde_json::Value, verdict: Verdict, started: Instant) -> Self {
        RunReport {
            command,
            input_digest: digest,
            result,
            verdict,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// SHA-256 of the canonical form of a JSON input (sorted keys, no whitespace).
/// Non-JSON input is hashed as raw bytes.
pub fn digest(text: &str) -> String {
    let canonical = match serde_json::from_str::<serde_json::Value>(text) {
        Ok(v) => v.to_string(),
        Err(_) => text.to_string(),
    };
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
