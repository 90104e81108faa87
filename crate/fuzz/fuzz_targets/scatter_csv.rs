#![no_main]

use libfuzzer_sys::fuzz_target;
use relgraph::relmap::{parse_scatter_csv, scatter_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_scatter_csv(text) {
        let again = parse_scatter_csv(&scatter_csv(&points)).expect("written CSV parses");
        assert_eq!(again.len(), points.len());
    }
});
