#![no_main]

use anchorlab::FiniteDistribution;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(p) = serde_json::from_slice::<FiniteDistribution>(data) else {
        return;
    };
    let text = serde_json::to_string(&p).unwrap();
    let back: FiniteDistribution = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p);
    let total: f64 = p.weights().iter().sum();
    assert!((total - 1.0).abs() <= 1e-9);
});
