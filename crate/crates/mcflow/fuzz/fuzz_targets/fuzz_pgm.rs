//! Fuzzes the binary PGM label-image parser, and the periodic signed
//! distance transform on small parsed images.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mcflow::raster;

fuzz_target!(|data: &[u8]| {
    let Ok(image) = raster::parse_pgm(data) else {
        return;
    };
    // distance transform on small images only; it must handle any label
    // pattern, including a label that fills the image
    if image.width * image.height <= 4096 {
        let label = image.pixels[0];
        let _ = raster::signed_distance_field(&image, label, 0.5, 1.0);
        let _ = raster::signed_distance_field(&image, label.wrapping_add(1), 1.0, 1.0);
    }
});
