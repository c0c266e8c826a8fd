//! Rating-file parsing in every delimiter mode, strict and lenient, followed
//! by the temporal split of whatever parsed.

#![no_main]

use backbone_core::ingest::{
    filter_cold_start, parse_ratings, temporal_split, Cutoff, Delimiter, FormatConfig, SplitConfig,
};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for delimiter in [Delimiter::Whitespace, Delimiter::Comma, Delimiter::DoubleColon] {
        let strict = parse_ratings(
            data,
            FormatConfig {
                delimiter,
                lenient: false,
            },
        );
        let lenient = parse_ratings(
            data,
            FormatConfig {
                delimiter,
                lenient: true,
            },
        )
        .expect("lenient mode only fails on i/o");
        if let Ok(strict) = strict {
            assert_eq!(strict.records, lenient.records);
            assert_eq!(lenient.skipped, 0);
        }
        let records = lenient.records;
        let Ok(cutoff) = Cutoff::Fraction(0.9).resolve(&records) else {
            continue;
        };
        let config = SplitConfig {
            cutoff,
            probe_ratio: Some(0.5),
            rating_min: Some(2.0),
            seed: 1,
        };
        if let Ok(ds) = temporal_split(&records, &config) {
            let ds = filter_cold_start(ds);
            for &(u, i) in ds.probe.pairs() {
                assert!(ds.training.user_degree(u) > 0 && ds.training.item_degree(i) > 0);
            }
        }
    }
});
