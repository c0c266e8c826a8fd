#![no_main]

use backbone_cli::config::parse_lambda_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = parse_lambda_grid(s) {
        assert!(!grid.is_empty());
        assert!(grid.iter().all(|l| (0.0..=1.0).contains(l)));
    }
});
