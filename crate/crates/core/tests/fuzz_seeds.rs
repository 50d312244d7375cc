//! Replays the checked-in fuzz corpus seeds through the same parsers the
//! fuzz targets exercise.

use std::path::Path;

use anchorlab::lab::{BatteryConfig, BatteryReport, FactInstance};
use anchorlab::qmath::{CQState, DensityOperator, PureState};
use anchorlab::{FiniteDistribution, Game};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed_"))
        .map(|p| (p.display().to_string(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn distribution_seeds_parse() {
    for (name, text) in seeds("distribution_json") {
        serde_json::from_str::<FiniteDistribution>(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn game_seeds_parse() {
    for (name, text) in seeds("game_json") {
        Game::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn operator_seeds_parse() {
    for (name, text) in seeds("operator_json") {
        let ok = serde_json::from_str::<DensityOperator>(&text).is_ok() || serde_json::from_str::<PureState>(&text).is_ok();
        assert!(ok, "{name}");
    }
}

#[test]
fn cq_state_seeds_parse() {
    for (name, text) in seeds("cq_state_json") {
        serde_json::from_str::<CQState>(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn fact_instance_seeds_evaluate() {
    for (name, text) in seeds("fact_instance_json") {
        let inst: FactInstance = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let outcome = inst.evaluate().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(outcome.value.is_finite(), "{name}");
    }
}

#[test]
fn battery_seeds_parse() {
    for (name, text) in seeds("battery_json") {
        let ok = serde_json::from_str::<BatteryConfig>(&text).is_ok() || serde_json::from_str::<BatteryReport>(&text).is_ok();
        assert!(ok, "{name}");
    }
}
