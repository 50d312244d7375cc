#![no_main]

use anchorlab::qmath::CQState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(cq) = serde_json::from_slice::<CQState>(data) else {
        return;
    };
    assert_eq!(cq.states().len(), cq.classical().len());
    let _ = serde_json::to_string(&cq).unwrap();
});
