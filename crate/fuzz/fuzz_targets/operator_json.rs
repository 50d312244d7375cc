#![no_main]

use anchorlab::qmath::{DensityOperator, Operator, Povm, PureState};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rho) = serde_json::from_slice::<DensityOperator>(data) {
        assert!(rho.eigenvalues().iter().all(|v| v.is_finite()));
        let back: DensityOperator = serde_json::from_str(&serde_json::to_string(&rho).unwrap()).unwrap();
        assert_eq!(back.space(), rho.space());
    }
    if let Ok(op) = serde_json::from_slice::<Operator>(data) {
        let _ = serde_json::to_string(&op).unwrap();
    }
    if let Ok(psi) = serde_json::from_slice::<PureState>(data) {
        assert!((psi.vector().norm() - 1.0).abs() <= 1e-6);
    }
    if let Ok(m) = serde_json::from_slice::<Povm>(data) {
        assert!(!m.is_empty());
    }
});
