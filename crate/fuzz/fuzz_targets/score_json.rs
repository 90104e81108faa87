#![no_main]

use libfuzzer_sys::fuzz_target;
use relgraph::cli::parse_scores;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(scores) = parse_scores(text) {
            assert!(scores.iter().all(|s| !s.is_nan()));
        }
    }
});
