//! Fuzzes the TOML run-config parser and the semantic resolution behind it.
//! Parsing and resolving must never panic, whatever the input.

#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use mcflow::config::{self, Overrides, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = RunConfig::from_toml_str(text) else {
        return;
    };
    // resolution must reject bad semantics with an error, never a panic;
    // raster paths resolve under an empty directory so no real file is read
    let _ = config::resolve(&config, Path::new("/nonexistent"), "fuzz", &Overrides::default());
});
