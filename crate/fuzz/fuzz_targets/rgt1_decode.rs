#![no_main]

use libfuzzer_sys::fuzz_target;
use relgraph::tensorio::{decode_tensor, encode_tensor};

fuzz_target!(|data: &[u8]| {
    // anything that decodes must re-encode to the same bytes
    if let Ok(tensor) = decode_tensor(data) {
        assert_eq!(encode_tensor(&tensor), data);
    }
});
