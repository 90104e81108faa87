//! Replays the checked-in fuzz seed corpora through the fuzz-target checks.

use std::fs;
use std::path::{Path, PathBuf};

use relgraph::cli::{parse_checkpoint_manifest, parse_scores};
use relgraph::relmap::{parse_scatter_csv, scatter_csv};
use relgraph::tensorio::{decode_tensor, encode_tensor};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn rgt1_seeds() {
    let mut accepted = 0;
    for (path, bytes) in seeds("rgt1_decode") {
        if let Ok(t) = decode_tensor(&bytes) {
            assert_eq!(encode_tensor(&t), bytes, "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn score_json_seeds() {
    for (path, bytes) in seeds("score_json") {
        let scores = parse_scores(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(scores.iter().all(|s| !s.is_nan()));
    }
}

#[test]
fn scatter_csv_seeds() {
    let mut accepted = 0;
    for (_, bytes) in seeds("scatter_csv") {
        if let Ok(points) = parse_scatter_csv(std::str::from_utf8(&bytes).unwrap()) {
            assert_eq!(parse_scatter_csv(&scatter_csv(&points)).unwrap(), points);
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn checkpoint_manifest_seeds() {
    let parsed: Vec<bool> = seeds("checkpoint_manifest")
        .iter()
        .map(|(_, bytes)| parse_checkpoint_manifest(std::str::from_utf8(bytes).unwrap(), Path::new("/base")).is_ok())
        .collect();
    // empty, missing_probs, two_entries
    assert_eq!(parsed, [false, false, true]);
}
