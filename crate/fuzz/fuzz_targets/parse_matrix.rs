#![no_main]

use cholcov::io::{format_matrix, parse_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((header, m)) = parse_matrix(text) {
        // Anything accepted must survive a write/read round trip.
        let (again_header, again) = parse_matrix(&format_matrix(&m, &header)).expect("round trip");
        assert_eq!(again.as_slice(), m.as_slice());
        assert_eq!(again_header.p, header.p);
    }
});
