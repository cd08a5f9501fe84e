#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(elem) = pqnorm::io::parse_element(text) {
            let round = pqnorm::io::to_json(&elem);
            let back = pqnorm::io::parse_element(&round).expect("round trip must stay valid");
            assert_eq!(elem, back);
        }
    }
});
