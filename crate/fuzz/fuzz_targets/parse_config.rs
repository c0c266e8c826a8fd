//! TOML config files, then validation of the merged settings.

#![no_main]

use backbone_cli::config::{parse_config_file, Flags, Settings};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = parse_config_file(text) {
        let _ = Settings::resolve(Flags::default().or(file));
    }
});
