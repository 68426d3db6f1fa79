//! Fuzzes the JSON sidecar parser and raw-image assembly.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mcflow::raster;

fuzz_target!(|data: &[u8]| {
    let Ok(sidecar) = raster::LabelSidecar::from_json_bytes(data) else {
        return;
    };
    for phase in 0..4 {
        let _ = sidecar.label_for_phase(phase);
    }
    // reuse the same bytes as a raw payload against the parsed dimensions
    let _ = raster::parse_raw(data, &sidecar);
});
