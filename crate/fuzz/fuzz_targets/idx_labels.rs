//! Fuzz the IDX label-file parser with arbitrary bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = fedscam::data::parse_idx_labels(data);
});
