#![no_main]

use backbone_core::ingest::Cutoff;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(Cutoff::Fraction(f)) = s.parse::<Cutoff>() {
            assert!((0.0..=1.0).contains(&f));
        }
    }
});
