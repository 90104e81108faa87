use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::io::{parse_checkpoint_manifest, parse_scores, serialize_scores, write_json, write_tensor, RunManifest};
use super::{BaselineArgs, CliError, DetectLabelsArgs, DetectOutliersArgs, EnsembleArgs, EvalArgs, GenNoiseArgs, RelmapArgs};
use crate::baselines::{score_label_baseline, score_ood_baseline, BaselineKind, OodInputs};
use crate::kernel::{KernelConfig, KernelKind};
use crate::labelnoise::{detect_label_noise, detect_label_noise_single, ensemble_scores, LabelNoiseError, MaxCutConfig, NoiseScoreResult};
use crate::metrics::evaluate;
use crate::noisegen::{inject_noise, NoiseSpec};
use crate::outlier::{outlier_scores, sample_reference, OutlierConfig};
use crate::relmap::{emit_scatter, relation_map, CheckpointSeries, RelMapError, ScatterFormat};
use crate::tensorio::{validate_dataset, DatasetHandle, Embeddings, FeatureMatrix, LabelVector, LogitMatrix, ProbMatrix, Tensor};

/// Default temperature outside label-error detection.
const DEFAULT_T: f64 = 1.0;

fn load_features(m: &mut RunManifest, flag: &str, path: &Path) -> Result<FeatureMatrix, CliError> {
    FeatureMatrix::from_tensor(m.read_tensor(flag, path)?).map_err(|e| CliError::Validation(format!("--{flag}: {e}")))
}

fn load_probs(m: &mut RunManifest, flag: &str, path: &Path) -> Result<ProbMatrix, CliError> {
    ProbMatrix::from_tensor(m.read_tensor(flag, path)?).map_err(|e| CliError::Validation(format!("--{flag}: {e}")))
}

fn load_labels(m: &mut RunManifest, flag: &str, path: &Path) -> Result<LabelVector, CliError> {
    LabelVector::from_tensor(m.read_tensor(flag, path)?).map_err(|e| CliError::Validation(format!("--{flag}: {e}")))
}

fn load_embeddings(m: &mut RunManifest, ff: &str, fp: &Path, pf: &str, pp: &Path) -> Result<Embeddings, CliError> {
    let features = load_features(m, ff, fp)?;
    let probs = load_probs(m, pf, pp)?;
    Embeddings::new(features, probs).map_err(|e| CliError::Validation(format!("--{ff} / --{pf}: {e}")))
}

fn required<'a, T>(value: &'a Option<T>, kind: BaselineKind, flag: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Validation(format!("baseline {kind} requires --{flag}")))
}

fn record_kernel(m: &mut RunManifest, k: &KernelConfig) {
    m.set("kernel", k.kind);
    m.set("t", k.temperature);
    m.set("clamp", k.clamp);
    m.set("compat", k.use_compatibility);
    if k.kind == KernelKind::Rbf {
        m.set("rbf_gamma", k.rbf_gamma);
    }
}

fn label_noise_error(e: LabelNoiseError) -> CliError {
    match e {
        LabelNoiseError::TooLarge { .. } => CliError::Guard(e.to_string()),
        other => CliError::invalid(other),
    }
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string(value).expect("outputs serialize");
    writeln!(out, "{text}").map_err(|e| CliError::Io(format!("stdout: {e}")))
}

#[derive(Serialize)]
struct LabelOutput<'a> {
    #[serde(flatten)]
    result: &'a NoiseScoreResult,
    manifest: &'a RunManifest,
}

pub(super) fn detect_labels(a: &DetectLabelsArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("detect-labels");
    let kcfg = a.kernel.resolve(KernelConfig::label_error().temperature);
    let mcfg = MaxCutConfig {
        lambda: a.lambda,
        max_iters: a.max_iters,
        partition_size: a.partition_size,
        seed: a.seed,
    };
    if a.single_node && a.partition_size > 0 {
        return Err(CliError::Validation("--single-node cannot be combined with --partition-size".into()));
    }
    record_kernel(&mut m, &kcfg);
    m.set("lambda", mcfg.lambda);
    m.set("max_iters", mcfg.max_iters);
    m.set("partition_size", mcfg.partition_size);
    m.set("single_node", a.single_node);
    m.seed = Some(a.seed);

    let features = load_features(&mut m, "features", &a.features)?;
    let probs = load_probs(&mut m, "probs", &a.probs)?;
    let labels = load_labels(&mut m, "labels", &a.labels)?;
    let handle: DatasetHandle = validate_dataset(features, probs, labels).map_err(CliError::invalid)?;

    let result = if a.single_node {
        detect_label_noise_single(&handle, &kcfg, &mcfg)
    } else {
        detect_label_noise(&handle, &kcfg, &mcfg)
    }
    .map_err(label_noise_error)?;
    write_json(&a.out, &LabelOutput { result: &result, manifest: &m })
}

#[derive(Serialize)]
struct OutlierOutput<'a> {
    #[serde(serialize_with = "serialize_scores")]
    scores: &'a [f64],
    subset: &'a [usize],
    manifest: &'a RunManifest,
}

pub(super) fn detect_outliers(a: &DetectOutliersArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("detect-outliers");
    let config = OutlierConfig {
        subset_size: a.subset_size,
        seed: a.seed,
        kernel: a.kernel.resolve(DEFAULT_T),
    };
    record_kernel(&mut m, &config.kernel);
    m.set("subset_size", config.subset_size);
    m.seed = Some(a.seed);

    let query = load_embeddings(&mut m, "query-features", &a.query_features, "query-probs", &a.query_probs)?;
    let reference = load_embeddings(&mut m, "ref-features", &a.ref_features, "ref-probs", &a.ref_probs)?;
    let subset = sample_reference(reference.len(), &config).map_err(CliError::invalid)?;
    let scores = outlier_scores(&query, &reference, &subset, &config.kernel).map_err(CliError::invalid)?;
    write_json(
        &a.out,
        &OutlierOutput {
            scores: &scores,
            subset: &subset,
            manifest: &m,
        },
    )
}

#[derive(Serialize)]
struct BaselineOutput<'a> {
    kind: BaselineKind,
    #[serde(serialize_with = "serialize_scores")]
    scores: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_clamped: Option<bool>,
    manifest: &'a RunManifest,
}

pub(super) fn baseline(a: &BaselineArgs) -> Result<(), CliError> {
    let kind: BaselineKind = a.kind.parse().map_err(CliError::invalid)?;
    let mut m = RunManifest::new("baseline");
    m.set("kind", kind);

    let (scores, k, k_clamped) = if kind.is_label_baseline() {
        let probs = load_probs(&mut m, "probs", required(&a.probs, kind, "probs")?)?;
        let labels = load_labels(&mut m, "labels", required(&a.labels, kind, "labels")?)?;
        let scores = score_label_baseline(kind, &probs, &labels).map_err(CliError::invalid)?;
        (scores, None, None)
    } else {
        let mut probs = None;
        let mut logits = None;
        let mut features = None;
        let mut reference = None;
        let mut fraction = 1.0;
        match kind {
            BaselineKind::Msp => probs = Some(load_probs(&mut m, "probs", required(&a.probs, kind, "probs")?)?),
            BaselineKind::MaxLogit | BaselineKind::Energy => {
                let path = required(&a.logits, kind, "logits")?;
                let t = m.read_tensor("logits", path)?;
                logits = Some(LogitMatrix::from_tensor(t).map_err(|e| CliError::Validation(format!("--logits: {e}")))?);
            }
            _ => {
                features = Some(load_features(&mut m, "features", required(&a.features, kind, "features")?)?);
                let full = load_features(&mut m, "ref-features", required(&a.ref_features, kind, "ref-features")?)?;
                let cfg = OutlierConfig {
                    subset_size: a.ref_subset_size,
                    seed: a.seed,
                    ..OutlierConfig::ood()
                };
                let subset = sample_reference(full.rows(), &cfg).map_err(CliError::invalid)?;
                fraction = subset.len() as f64 / full.rows() as f64;
                reference = Some(full.select_rows(&subset));
                m.set("ref_subset_size", a.ref_subset_size);
                m.seed = Some(a.seed);
            }
        }
        let inputs = OodInputs {
            probs: probs.as_ref(),
            logits: logits.as_ref(),
            features: features.as_ref(),
            reference: reference.as_ref(),
            reference_fraction: fraction,
        };
        let out = score_ood_baseline(kind, &inputs).map_err(CliError::invalid)?;
        let clamped = out.k.map(|_| out.k_clamped);
        (out.scores, out.k, clamped)
    };
    write_json(
        &a.out,
        &BaselineOutput {
            kind,
            scores: &scores,
            k,
            k_clamped,
            manifest: &m,
        },
    )
}

#[derive(Serialize)]
struct EvalOutput<'a, T: Serialize> {
    #[serde(flatten)]
    report: &'a T,
    manifest: &'a RunManifest,
}

pub(super) fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut m = RunManifest::new("eval");
    let text = read_text(&mut m, "scores", &a.scores)?;
    let scores = parse_scores(&text)?;
    let truth = m
        .read_tensor("truth", &a.truth)?
        .into_i64()
        .ok_or_else(|| CliError::Validation("--truth must be an int64 tensor".into()))?;
    let truth = truth
        .iter()
        .enumerate()
        .map(|(i, &v)| match v {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(CliError::Validation(format!("--truth entry {i} is {other}, expected 0 or 1"))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    let report = evaluate(&scores, &truth).map_err(CliError::invalid)?;
    print_json(out, &report)?;
    if let Some(path) = &a.out {
        write_json(path, &EvalOutput { report: &report, manifest: &m })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct NoiseSummary<'a> {
    samples: usize,
    flipped: usize,
    manifest: &'a RunManifest,
}

pub(super) fn gen_noise(a: &GenNoiseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut m = RunManifest::new("gen-noise");
    m.set("ratio", a.ratio);
    m.seed = Some(a.seed);
    let probs = load_probs(&mut m, "probs", &a.probs)?;
    let labels = load_labels(&mut m, "labels", &a.labels)?;
    let noisy = inject_noise(&probs, &labels, &NoiseSpec { ratio: a.ratio, seed: a.seed }).map_err(CliError::invalid)?;
    write_tensor(&a.out_labels, &noisy.labels.to_tensor())?;
    let mask: Vec<i64> = noisy.flipped.iter().map(|&f| f as i64).collect();
    write_tensor(&a.out_mask, &Tensor::from_i64(vec![mask.len()], mask).expect("1-d mask"))?;
    print_json(
        out,
        &NoiseSummary {
            samples: labels.len(),
            flipped: noisy.flip_count(),
            manifest: &m,
        },
    )
}

#[derive(Serialize)]
struct RelmapSummary<'a> {
    anchor: usize,
    checkpoints: usize,
    points: usize,
    format: ScatterFormat,
    manifest: &'a RunManifest,
}

fn relmap_error(e: RelMapError) -> CliError {
    match e {
        RelMapError::Io(err) => CliError::Io(err.to_string()),
        other => CliError::invalid(other),
    }
}

pub(super) fn relmap(a: &RelmapArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut m = RunManifest::new("relmap");
    let kcfg = a.kernel.resolve(DEFAULT_T);
    record_kernel(&mut m, &kcfg);
    m.set("anchor", a.anchor);
    m.set("format", ScatterFormat::from(a.format));

    let text = read_text(&mut m, "checkpoints", &a.checkpoints)?;
    let base = a.checkpoints.parent().unwrap_or(Path::new("."));
    let entries = parse_checkpoint_manifest(&text, base)?;
    let mut checkpoints = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let ff = format!("checkpoints[{i}].features");
        let pf = format!("checkpoints[{i}].probs");
        checkpoints.push(load_embeddings(&mut m, &ff, &e.features, &pf, &e.probs)?);
    }
    let labels = load_labels(&mut m, "labels", &a.labels)?;
    let series = CheckpointSeries::new(checkpoints).map_err(relmap_error)?;
    let points = relation_map(&series, &labels, a.anchor, &kcfg).map_err(relmap_error)?;
    emit_scatter(&points, &a.out, a.format.into()).map_err(relmap_error)?;
    print_json(
        out,
        &RelmapSummary {
            anchor: a.anchor,
            checkpoints: series.len(),
            points: points.len(),
            format: a.format.into(),
            manifest: &m,
        },
    )
}

#[derive(Serialize)]
struct EnsembleOutput<'a> {
    #[serde(serialize_with = "serialize_scores")]
    scores: &'a [f64],
    manifest: &'a RunManifest,
}

pub(super) fn ensemble(a: &EnsembleArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("ensemble");
    let mut vectors = Vec::with_capacity(a.scores.len());
    for (i, path) in a.scores.iter().enumerate() {
        let v = parse_scores(&read_text(&mut m, &format!("scores[{i}]"), path)?)?;
        if v.iter().any(|s| !s.is_finite()) {
            return Err(CliError::Validation(format!("{} holds non-finite scores", path.display())));
        }
        vectors.push(v);
    }
    let scores = ensemble_scores(&vectors).map_err(CliError::invalid)?;
    write_json(&a.out, &EnsembleOutput { scores: &scores, manifest: &m })
}

fn read_text(m: &mut RunManifest, flag: &str, path: &Path) -> Result<String, CliError> {
    let bytes = m.read(flag, path)?;
    String::from_utf8(bytes).map_err(|_| CliError::Validation(format!("--{flag} is not UTF-8")))
}
