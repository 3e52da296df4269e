//! Byte-level and value-level pins of the file formats.

mod common;

use common::{credal, credal_json, data, fixture, without_timing};
use credal_polytree::cli::{network_to_string, parse_network};
use serde_json::Value;

fn golden(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

#[test]
fn generated_network_is_byte_stable() {
    let out = credal(&["generate", "--nodes", "5", "--categories", "2..3", "--vertices", "1..3", "--seed", "7"]);
    assert!(out.status.success());
    let pinned = std::fs::read(fixture("generated_seed7.json")).unwrap();
    assert_eq!(out.stdout, pinned);
}

#[test]
fn pinned_files_round_trip_byte_exactly() {
    for path in [fixture("generated_seed7.json"), data("fig1_like.json")] {
        let net = parse_network(&path).unwrap();
        assert_eq!(network_to_string(&net).as_bytes(), std::fs::read(&path).unwrap());
    }
}

#[test]
fn collider_reports() {
    let network = fixture("collider.json");
    let network = network.to_str().unwrap();
    for (algorithm, file) in [("ar", "collider_ar.json"), ("ar-plus", "collider_ar_plus.json"), ("bnb", "collider_bnb.json")] {
        let report = credal_json(&["infer", "--network", network, "--query", "Y", "--evidence", "W=w0", "--algorithm", algorithm]);
        assert_eq!(without_timing(report), without_timing(golden(file)), "{algorithm}");
    }
}

#[test]
fn fig1_like_exact_bounds() {
    let network = data("fig1_like.json");
    let report = credal_json(&["infer", "--network", network.to_str().unwrap(), "--query", "E", "--algorithm", "bnb"]);
    assert_eq!(without_timing(report), without_timing(golden("fig1_like_bnb_E.json")));
}

#[test]
fn digest_matches_input_bytes() {
    use sha2::{Digest, Sha256};
    let path = fixture("collider.json");
    let report = credal_json(&["infer", "--network", path.to_str().unwrap(), "--query", "Y", "--algorithm", "ar"]);
    let expected = format!("sha256:{}", hex::encode(Sha256::digest(std::fs::read(&path).unwrap())));
    assert_eq!(report["input_digest"], Value::String(expected));
}
