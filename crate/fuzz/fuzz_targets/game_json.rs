#![no_main]

use anchorlab::games::classical::ENUMERATION_LIMIT;
use anchorlab::games::classical_value_exact;
use anchorlab::Game;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(g) = Game::from_json(text) else {
        return;
    };
    assert_eq!(Game::from_json(&g.to_json()).unwrap(), g);
    let (nx, ny, na, nb) = g.sizes();
    if (na as f64).powi(nx as i32) * (nb as f64).powi(ny as i32) <= ENUMERATION_LIMIT / 1e4 {
        let v = classical_value_exact(&g).unwrap().0;
        assert!((0.0..=1.0 + 1e-12).contains(&v));
    }
});
