#![no_main]

use anchorlab::lab::FactInstance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(inst) = serde_json::from_slice::<FactInstance>(data) else {
        return;
    };
    // Errors are fine; panics and non-finite margins on accepted input are not.
    if let Ok(outcome) = inst.evaluate() {
        assert!(!outcome.value.is_nan());
    }
});
