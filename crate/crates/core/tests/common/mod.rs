#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn credal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_credal")).args(args).output().expect("runs the binary")
}

/// Runs the binary, expecting success, and parses stdout as JSON.
pub fn credal_json(args: &[&str]) -> Value {
    let out = credal(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

/// Drops every timing field.
pub fn without_timing(mut value: Value) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(map) => {
                map.retain(|k, _| !k.ends_with("wall_time_ms"));
                map.values_mut().for_each(strip);
            }
            Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut value);
    value
}

/// Every `[lower, upper]` pair in the `results` of an infer report.
pub fn intervals(report: &Value) -> Vec<(f64, f64)> {
    report["results"]
        .as_array()
        .expect("results")
        .iter()
        .map(|r| (r["lower"].as_f64().unwrap(), r["upper"].as_f64().unwrap()))
        .collect()
}
