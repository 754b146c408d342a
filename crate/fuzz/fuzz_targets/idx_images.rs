//! Fuzz the IDX image-file parser with arbitrary bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Must never panic, hang, or over-allocate; errors are fine.
    let _ = fedscam::data::parse_idx_images(data);
});
