//! Algorithm lists; every accepted name must survive a display round trip.

#![no_main]

use backbone_cli::config::parse_algorithms;
use backbone_core::Algorithm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(algos) = parse_algorithms(s) {
        for a in algos {
            let back: Algorithm = a.to_string().parse().expect("display output parses");
            assert_eq!(back.slug(), a.slug());
        }
    }
});
