//! Relation maps: how an anchor sample's relation values to every other
//! sample evolve across training checkpoints.
//!
//! Each partner `j` becomes a point with the mean and population standard
//! deviation of `r_k(anchor, j)` over checkpoints `k`, colored by the value
//! at the last checkpoint.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{relation_value, KernelConfig};
use crate::tensorio::{validate_dataset, DataError, Embeddings, LabelVector};

pub const SVG_SIZE: f64 = 600.0;
/// Upper end of the std axis; larger values are drawn at the edge.
pub const STD_AXIS_MAX: f64 = 0.5;

#[derive(Debug, Error)]
pub enum RelMapError {
    #[error("anchor {anchor} out of range for {n} samples")]
    InvalidAnchor { anchor: usize, n: usize },
    #[error("checkpoint series is empty")]
    NoCheckpoints,
    #[error("checkpoint {index} disagrees with the first: {detail}")]
    InconsistentCheckpoint { index: usize, detail: String },
    #[error("no points to emit")]
    NoPoints,
    #[error("invalid data: {0}")]
    Data(#[from] DataError),
    #[error("malformed scatter csv: {0}")]
    Csv(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Features and probabilities of the same samples at several checkpoints.
#[derive(Debug, Clone)]
pub struct CheckpointSeries {
    checkpoints: Vec<Embeddings>,
}

impl CheckpointSeries {
    pub fn new(checkpoints: Vec<Embeddings>) -> Result<Self, RelMapError> {
        let first = checkpoints.first().ok_or(RelMapError::NoCheckpoints)?;
        let dims = |e: &Embeddings| (e.len(), e.features().cols(), e.probs().classes());
        let want = dims(first);
        for (index, e) in checkpoints.iter().enumerate().skip(1) {
            let got = dims(e);
            if got != want {
                return Err(RelMapError::InconsistentCheckpoint {
                    index,
                    detail: format!("(n, d, C) = {got:?}, expected {want:?}"),
                });
            }
        }
        Ok(Self { checkpoints })
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.checkpoints[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationMapPoint {
    pub partner: usize,
    pub mean: f64,
    pub std: f64,
    #[serde(rename = "final")]
    pub last: f64,
}

pub fn relation_map(
    series: &CheckpointSeries,
    labels: &LabelVector,
    anchor: usize,
    config: &KernelConfig,
) -> Result<Vec<RelationMapPoint>, RelMapError> {
    let n = series.samples();
    if anchor >= n {
        return Err(RelMapError::InvalidAnchor { anchor, n });
    }
    let handles = series
        .checkpoints
        .iter()
        .map(|e| {
            validate_dataset(e.features().clone(), e.probs().clone(), labels.clone())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k = handles.len() as f64;
    Ok((0..n)
        .filter(|&j| j != anchor)
        .map(|j| {
            let values: Vec<f64> = handles
                .iter()
                .map(|h| relation_value(h, anchor, j, config) as f64)
                .collect();
            let mean = values.iter().sum::<f64>() / k;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
            RelationMapPoint {
                partner: j,
                mean,
                std: var.sqrt(),
                last: *values.last().unwrap(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterFormat {
    Csv,
    Svg,
}

/// Shortest decimal that round-trips the value rounded to 9 significant
/// digits.
fn sig9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

pub fn scatter_csv(points: &[RelationMapPoint]) -> String {
    let mut out = String::from("partner,mean,std,final\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.partner, sig9(p.mean), sig9(p.std), sig9(p.last));
    }
    out
}

pub fn parse_scatter_csv(text: &str) -> Result<Vec<RelationMapPoint>, RelMapError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| RelMapError::Csv(e.to_string()))?;
    if headers != vec!["partner", "mean", "std", "final"] {
        return Err(RelMapError::Csv(format!("unexpected header {headers:?}")));
    }
    let mut points = Vec::new();
    for record in reader.deserialize::<RelationMapPoint>() {
        let p = record.map_err(|e| RelMapError::Csv(e.to_string()))?;
        if !(p.mean.is_finite() && p.std.is_finite() && p.last.is_finite()) {
            return Err(RelMapError::Csv(format!("non-finite value for partner {}", p.partner)));
        }
        points.push(p);
    }
    Ok(points)
}

/// Ramp over [-1, 1]: blue at -1, gray at 0, red at +1.
pub fn ramp_color(value: f64) -> (u8, u8, u8) {
    const BLUE: [f64; 3] = [0.0, 0.0, 255.0];
    const GRAY: [f64; 3] = [128.0, 128.0, 128.0];
    const RED: [f64; 3] = [255.0, 0.0, 0.0];
    let v = if value.is_nan() { 0.0 } else { value.clamp(-1.0, 1.0) };
    let (from, to, t) = if v < 0.0 { (GRAY, BLUE, -v) } else { (GRAY, RED, v) };
    let mix = |c: usize| (from[c] + (to[c] - from[c]) * t).round() as u8;
    (mix(0), mix(1), mix(2))
}

pub fn scatter_svg(points: &[RelationMapPoint]) -> String {
    let s = SVG_SIZE;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white"/>"#);
    // mean = 0 reference line
    let _ = writeln!(
        out,
        r#"<line x1="0" y1="{}" x2="{s}" y2="{}" stroke="black" stroke-width="0.5"/>"#,
        s / 2.0,
        s / 2.0
    );
    for p in points {
        let x = p.std.clamp(0.0, STD_AXIS_MAX) / STD_AXIS_MAX * s;
        let y = (1.0 - p.mean.clamp(-1.0, 1.0)) / 2.0 * s;
        let (r, g, b) = ramp_color(p.last);
        let _ = writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="2" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            x, y
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_scatter(
    points: &[RelationMapPoint],
    path: impl AsRef<Path>,
    format: ScatterFormat,
) -> Result<(), RelMapError> {
    if points.is_empty() {
        return Err(RelMapError::NoPoints);
    }
    let body = match format {
        ScatterFormat::Csv => scatter_csv(points),
        ScatterFormat::Svg => scatter_svg(points),
    };
    fs::write(path, body)?;
    Ok(())
}
