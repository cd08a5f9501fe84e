#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(op) = pqnorm::io::parse_operator(text) {
            let round = pqnorm::io::to_json(&op);
            let back = pqnorm::io::parse_operator(&round).expect("round trip must stay valid");
            assert_eq!(op, back);
        }
    }
});
