#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Parsing must reject or accept without panicking; accepted
        // descriptors must re-serialize and re-validate.
        if let Ok(space) = pqnorm::io::parse_space(text) {
            let round = pqnorm::io::to_json(&space);
            let back = pqnorm::io::parse_space(&round).expect("round trip must stay valid");
            assert_eq!(space, back);
        }
    }
});
