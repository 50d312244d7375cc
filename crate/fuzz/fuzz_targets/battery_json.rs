#![no_main]

use anchorlab::lab::{BatteryConfig, BatteryReport};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<BatteryConfig>(data) {
        let _ = cfg.validate();
    }
    if let Ok(report) = serde_json::from_slice::<BatteryReport>(data) {
        let _ = report.passed();
        let _ = report.to_json();
    }
});
