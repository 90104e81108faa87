#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use relgraph::cli::parse_checkpoint_manifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(entries) = parse_checkpoint_manifest(text, Path::new("/base")) {
            assert!(!entries.is_empty());
        }
    }
});
