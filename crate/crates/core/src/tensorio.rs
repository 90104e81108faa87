//! RGT1 tensor files and the validated matrices built from them.
//!
//! Layout of an RGT1 file:
//!
//! ```text
//! "RGT1" | dtype: u8 (0 = f32, 1 = i64) | ndim: u8 | ndim x u64 LE dims | LE row-major payload
//! ```
//!
//! The byte length must match the header exactly. `f32` payloads are
//! rejected if they contain NaN or an infinity.

use std::fs;
use std::path::Path;

use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"RGT1";
pub const MAX_DIMS: usize = 2;

/// Absolute tolerance on probability row sums.
pub const SIMPLEX_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, expected \"RGT1\"")]
    BadMagic,
    #[error("truncated header")]
    TruncatedHeader,
    #[error("unknown dtype code {0}")]
    UnknownDType(u8),
    #[error("unsupported dimensionality {0} (expected 1 or 2)")]
    BadDimensionality(u8),
    #[error("invalid shape {0:?}")]
    InvalidShape(Vec<u64>),
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("trailing bytes: expected {expected} payload bytes, found {actual}")]
    TrailingBytes { expected: usize, actual: usize },
    #[error("non-finite value at element {0}")]
    NonFinite(usize),
    #[error("shape {shape:?} does not match {len} elements")]
    ShapeMismatch { shape: Vec<usize>, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum DType {
    F32 = 0,
    I64 = 1,
}

impl DType {
    pub fn from_code(code: u8) -> Result<Self, TensorError> {
        match code {
            0 => Ok(DType::F32),
            1 => Ok(DType::I64),
            other => Err(TensorError::UnknownDType(other)),
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::I64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    I64(Vec<i64>),
}

impl TensorData {
    fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::I64(v) => v.len(),
        }
    }
}

/// A 1-D or 2-D dense tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: TensorData) -> Result<Self, TensorError> {
        let valid = !shape.is_empty() && shape.len() <= MAX_DIMS && shape.iter().all(|&d| d >= 1);
        let count = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if !valid || count != Some(data.len()) {
            return Err(TensorError::ShapeMismatch {
                shape,
                len: data.len(),
            });
        }
        if let TensorData::F32(values) = &data {
            if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
                return Err(TensorError::NonFinite(pos));
            }
        }
        Ok(Self { shape, data })
    }

    pub fn from_f32(shape: Vec<usize>, values: Vec<f32>) -> Result<Self, TensorError> {
        Self::new(shape, TensorData::F32(values))
    }

    pub fn from_i64(shape: Vec<usize>, values: Vec<i64>) -> Result<Self, TensorError> {
        Self::new(shape, TensorData::I64(values))
    }

    pub fn dtype(&self) -> DType {
        match self.data {
            TensorData::F32(_) => DType::F32,
            TensorData::I64(_) => DType::I64,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.len() == 0
    }

    /// Shape viewed as a matrix; vectors are a single column.
    pub fn matrix_dims(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [n] => (*n, 1),
            [r, c] => (*r, *c),
            _ => unreachable!("shape validated on construction"),
        }
    }

    pub fn into_f32(self) -> Option<Vec<f32>> {
        match self.data {
            TensorData::F32(v) => Some(v),
            TensorData::I64(_) => None,
        }
    }

    pub fn into_i64(self) -> Option<Vec<i64>> {
        match self.data {
            TensorData::I64(v) => Some(v),
            TensorData::F32(_) => None,
        }
    }
}

pub fn encode_tensor(tensor: &Tensor) -> Vec<u8> {
    let payload = tensor.len() * tensor.dtype().size();
    let mut out = Vec::with_capacity(6 + 8 * tensor.shape.len() + payload);
    out.extend_from_slice(MAGIC);
    out.push(tensor.dtype().code());
    out.push(tensor.shape.len() as u8);
    for &d in &tensor.shape {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match &tensor.data {
        TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::I64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    out
}

/// Decodes an RGT1 byte buffer. Never allocates more than the buffer
/// length justifies, so arbitrary input is safe to feed in.
pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor, TensorError> {
    if bytes.len() < 4 {
        return Err(if MAGIC.starts_with(bytes) {
            TensorError::TruncatedHeader
        } else {
            TensorError::BadMagic
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(TensorError::BadMagic);
    }
    let header = bytes.get(4..6).ok_or(TensorError::TruncatedHeader)?;
    let dtype = DType::from_code(header[0])?;
    let ndim = header[1];
    if ndim == 0 || ndim as usize > MAX_DIMS {
        return Err(TensorError::BadDimensionality(ndim));
    }
    let dims_end = 6 + 8 * ndim as usize;
    let dim_bytes = bytes.get(6..dims_end).ok_or(TensorError::TruncatedHeader)?;
    let raw_dims: Vec<u64> = dim_bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let expected = raw_dims
        .iter()
        .try_fold(dtype.size() as u64, |acc, &d| {
            if d == 0 {
                None
            } else {
                acc.checked_mul(d)
            }
        })
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| TensorError::InvalidShape(raw_dims.clone()))?;
    let payload = &bytes[dims_end..];
    if payload.len() < expected {
        return Err(TensorError::TruncatedPayload {
            expected,
            actual: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(TensorError::TrailingBytes {
            expected,
            actual: payload.len(),
        });
    }

    let shape: Vec<usize> = raw_dims.iter().map(|&d| d as usize).collect();
    let data = match dtype {
        DType::F32 => TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        DType::I64 => TensorData::I64(
            payload
                .chunks_exact(8)
                .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
    };
    Tensor::new(shape, data)
}

pub fn save_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<(), TensorError> {
    fs::write(path, encode_tensor(tensor))?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor, TensorError> {
    decode_tensor(&fs::read(path)?)
}

/// Semantic validation failures for matrices and datasets.
#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("expected a {expected} tensor")]
    WrongDType { expected: &'static str },
    #[error("matrix must have at least one row and column")]
    Empty,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("probability out of [0, 1] at row {row}, column {col}: {value}")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f32 },
    #[error("probability row {row} sums to {sum} (worst row)")]
    SimplexViolation { row: usize, sum: f64 },
    #[error("label {label} at index {index} outside [0, {classes})")]
    LabelOutOfRange {
        index: usize,
        label: i64,
        classes: usize,
    },
}

fn check_dims(rows: usize, cols: usize, len: usize) -> Result<(), DataError> {
    if rows == 0 || cols == 0 {
        return Err(DataError::Empty);
    }
    if rows.checked_mul(cols) != Some(len) {
        return Err(DataError::ShapeMismatch {
            what: "element count",
            expected: format!("{rows}x{cols}"),
            found: len.to_string(),
        });
    }
    Ok(())
}

fn check_finite(cols: usize, values: &[f32]) -> Result<(), DataError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(DataError::NonFinite {
            row: pos / cols,
            col: pos % cols,
        }),
        None => Ok(()),
    }
}

fn f32_matrix(tensor: Tensor) -> Result<(usize, usize, Vec<f32>), DataError> {
    let (rows, cols) = tensor.matrix_dims();
    let values = tensor
        .into_f32()
        .ok_or(DataError::WrongDType { expected: "float32" })?;
    Ok((rows, cols, values))
}

macro_rules! row_accessors {
    () => {
        pub fn rows(&self) -> usize {
            self.rows
        }

        pub fn cols(&self) -> usize {
            self.cols
        }

        pub fn row(&self, i: usize) -> &[f32] {
            &self.values[i * self.cols..(i + 1) * self.cols]
        }

        pub fn values(&self) -> &[f32] {
            &self.values
        }

        /// Copies the listed rows, in order, into a new matrix.
        pub fn select_rows(&self, indices: &[usize]) -> Self {
            let mut values = Vec::with_capacity(indices.len() * self.cols);
            for &i in indices {
                values.extend_from_slice(self.row(i));
            }
            Self {
                rows: indices.len(),
                cols: self.cols,
                values,
            }
        }

        pub fn to_tensor(&self) -> Tensor {
            Tensor::from_f32(vec![self.rows, self.cols], self.values.clone())
                .expect("matrix invariants imply a valid tensor")
        }
    };
}

/// n x d sample embeddings. Zero rows are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self, DataError> {
        check_dims(rows, cols, values.len())?;
        check_finite(cols, &values)?;
        Ok(Self { rows, cols, values })
    }

    pub fn from_tensor(tensor: Tensor) -> Result<Self, DataError> {
        let (rows, cols, values) = f32_matrix(tensor)?;
        Self::new(rows, cols, values)
    }

    pub fn scaled(&self, alpha: f32) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v * alpha).collect(),
        }
    }

    row_accessors!();
}

/// n x C predicted class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
}

impl ProbMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self, DataError> {
        check_dims(rows, cols, values.len())?;
        check_finite(cols, &values)?;
        if let Some(pos) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(DataError::ProbabilityOutOfRange {
                row: pos / cols,
                col: pos % cols,
                value: values[pos],
            });
        }
        let worst = values
            .chunks_exact(cols)
            .map(|r| r.iter().map(|&v| v as f64).sum::<f64>())
            .enumerate()
            .max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()));
        if let Some((row, sum)) = worst {
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(DataError::SimplexViolation { row, sum });
            }
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_tensor(tensor: Tensor) -> Result<Self, DataError> {
        let (rows, cols, values) = f32_matrix(tensor)?;
        Self::new(rows, cols, values)
    }

    pub fn classes(&self) -> usize {
        self.cols
    }

    /// Index of the largest entry in row `i`; ties go to the lowest class.
    pub fn argmax(&self, i: usize) -> usize {
        let row = self.row(i);
        let mut best = 0;
        for (c, &p) in row.iter().enumerate().skip(1) {
            if p > row[best] {
                best = c;
            }
        }
        best
    }

    row_accessors!();
}

/// n x C unnormalized classifier outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
}

impl LogitMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self, DataError> {
        check_dims(rows, cols, values.len())?;
        check_finite(cols, &values)?;
        Ok(Self { rows, cols, values })
    }

    pub fn from_tensor(tensor: Tensor) -> Result<Self, DataError> {
        let (rows, cols, values) = f32_matrix(tensor)?;
        Self::new(rows, cols, values)
    }

    row_accessors!();
}

/// Assigned class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<i64>,
}

impl LabelVector {
    pub fn new(labels: Vec<i64>) -> Result<Self, DataError> {
        if labels.is_empty() {
            return Err(DataError::Empty);
        }
        if let Some(index) = labels.iter().position(|&l| l < 0) {
            return Err(DataError::LabelOutOfRange {
                index,
                label: labels[index],
                classes: usize::MAX,
            });
        }
        Ok(Self { labels })
    }

    pub fn from_tensor(tensor: Tensor) -> Result<Self, DataError> {
        if tensor.shape().len() != 1 && tensor.matrix_dims().1 != 1 {
            return Err(DataError::ShapeMismatch {
                what: "label tensor",
                expected: "vector".into(),
                found: format!("{:?}", tensor.shape()),
            });
        }
        let labels = tensor
            .into_i64()
            .ok_or(DataError::WrongDType { expected: "int64" })?;
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.labels
    }

    pub fn check_classes(&self, classes: usize) -> Result<(), DataError> {
        match self.labels.iter().position(|&l| l as usize >= classes) {
            Some(index) => Err(DataError::LabelOutOfRange {
                index,
                label: self.labels[index],
                classes,
            }),
            None => Ok(()),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_i64(vec![self.labels.len()], self.labels.clone())
            .expect("non-empty label vector")
    }
}

/// Features and probabilities over the same samples, with cached L2 row
/// norms. This is everything the similarity kernel needs.
#[derive(Debug, Clone)]
pub struct Embeddings {
    features: FeatureMatrix,
    probs: ProbMatrix,
    norms: Vec<f64>,
}

impl Embeddings {
    pub fn new(features: FeatureMatrix, probs: ProbMatrix) -> Result<Self, DataError> {
        if features.rows() != probs.rows() {
            return Err(DataError::ShapeMismatch {
                what: "sample count of features vs probs",
                expected: features.rows().to_string(),
                found: probs.rows().to_string(),
            });
        }
        let norms = (0..features.rows())
            .map(|i| {
                features
                    .row(i)
                    .iter()
                    .map(|&v| v as f64 * v as f64)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(Self {
            features,
            probs,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn probs(&self) -> &ProbMatrix {
        &self.probs
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            probs: self.probs.select_rows(indices),
            norms: indices.iter().map(|&i| self.norms[i]).collect(),
        }
    }
}

/// A validated (features, probs, labels) triple.
#[derive(Debug, Clone)]
pub struct DatasetHandle {
    embeddings: Embeddings,
    labels: LabelVector,
}

impl DatasetHandle {
    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn embeddings(&self) -> &Embeddings {
        &self.embeddings
    }

    pub fn labels(&self) -> &LabelVector {
        &self.labels
    }

    pub fn into_embeddings(self) -> Embeddings {
        self.embeddings
    }

    /// Sub-dataset over `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            embeddings: self.embeddings.select(indices),
            labels: self.labels.select(indices),
        }
    }
}

pub fn validate_dataset(
    features: FeatureMatrix,
    probs: ProbMatrix,
    labels: LabelVector,
) -> Result<DatasetHandle, DataError> {
    let embeddings = Embeddings::new(features, probs)?;
    if labels.len() != embeddings.len() {
        return Err(DataError::ShapeMismatch {
            what: "sample count of labels",
            expected: embeddings.len().to_string(),
            found: labels.len().to_string(),
        });
    }
    labels.check_classes(embeddings.probs().classes())?;
    Ok(DatasetHandle { embeddings, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_zero_f32_layout() {
        let t = Tensor::from_f32(vec![1], vec![0.0]).unwrap();
        let bytes = encode_tensor(&t);
        let expected: Vec<u8> = [
            &[0x52, 0x47, 0x54, 0x31][..],
            &[0x00],
            &[0x01],
            &[0x01, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0],
        ]
        .concat();
        assert_eq!(bytes.len(), 18);
        assert_eq!(bytes, expected);
    }

    #[test]
    fn int64_vector_header() {
        let t = Tensor::from_i64(vec![2], vec![3, 7]).unwrap();
        let bytes = encode_tensor(&t);
        assert_eq!(&bytes[..6], b"RGT1\x01\x01");
        assert_eq!(&bytes[6..14], &2u64.to_le_bytes());
        assert_eq!(bytes.len() - 14, 16);
        assert_eq!(&bytes[14..22], &3i64.to_le_bytes());
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_tensor(&Tensor::from_f32(vec![1], vec![1.0]).unwrap());
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_tensor(&bytes), Err(TensorError::BadMagic)));
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = b"RGT1\x00\x02".to_vec();
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 12]);
        assert!(matches!(
            decode_tensor(&bytes),
            Err(TensorError::TruncatedPayload {
                expected: 16,
                actual: 12
            })
        ));
    }

    #[test]
    fn distinct_header_errors() {
        assert!(matches!(
            decode_tensor(b"RGT1\x07\x01"),
            Err(TensorError::UnknownDType(7))
        ));
        assert!(matches!(
            decode_tensor(b"RGT1\x00\x03"),
            Err(TensorError::BadDimensionality(3))
        ));
        assert!(matches!(
            decode_tensor(b"RGT1\x00\x01\x01"),
            Err(TensorError::TruncatedHeader)
        ));
        let mut zero_dim = b"RGT1\x00\x01".to_vec();
        zero_dim.extend_from_slice(&0u64.to_le_bytes());
        assert!(matches!(
            decode_tensor(&zero_dim),
            Err(TensorError::InvalidShape(_))
        ));
        let mut huge = b"RGT1\x01\x02".to_vec();
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_tensor(&huge), Err(TensorError::InvalidShape(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let mut bytes = b"RGT1\x00\x01".to_vec();
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_tensor(&bytes), Err(TensorError::NonFinite(1))));
    }

    #[test]
    fn trailing_bytes() {
        let mut bytes = encode_tensor(&Tensor::from_i64(vec![1], vec![5]).unwrap());
        bytes.push(0);
        assert!(matches!(
            decode_tensor(&bytes),
            Err(TensorError::TrailingBytes { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.rgt");
        let values: Vec<f32> = (0..12).map(|i| (i as f32 * 0.37).sin()).collect();
        let t = Tensor::from_f32(vec![4, 3], values).unwrap();
        save_tensor(&path, &t).unwrap();
        assert_eq!(load_tensor(&path).unwrap(), t);
    }

    fn tensor_strategy() -> impl Strategy<Value = Tensor> {
        let f32s = (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            prop::collection::vec(-1e30f32..1e30f32, r * c)
                .prop_map(move |v| Tensor::from_f32(vec![r, c], v).unwrap())
        });
        let i64s = (1usize..20).prop_flat_map(|n| {
            prop::collection::vec(any::<i64>(), n)
                .prop_map(move |v| Tensor::from_i64(vec![n], v).unwrap())
        });
        prop_oneof![f32s, i64s]
    }

    proptest! {
        #[test]
        fn encode_decode_identity(t in tensor_strategy()) {
            let bytes = encode_tensor(&t);
            let back = decode_tensor(&bytes).unwrap();
            prop_assert_eq!(encode_tensor(&back), bytes);
            prop_assert_eq!(back, t);
        }

        #[test]
        fn decode_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            let _ = decode_tensor(&bytes);
        }
    }

    #[test]
    fn dataset_shape_mismatch() {
        let f = FeatureMatrix::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let p = ProbMatrix::new(4, 1, vec![1.0; 4]).unwrap();
        let l = LabelVector::new(vec![0, 0, 0]).unwrap();
        assert!(matches!(
            validate_dataset(f, p, l),
            Err(DataError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn simplex_violation_reports_worst_row() {
        let err = ProbMatrix::new(3, 2, vec![0.5, 0.5, 0.7, 0.7, 0.6, 0.6]).unwrap_err();
        match err {
            DataError::SimplexViolation { row, sum } => {
                assert_eq!(row, 1);
                assert!((sum - 1.4).abs() < 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
        // float32 softmax drift is tolerated
        assert!(ProbMatrix::new(1, 2, vec![0.5, 0.5004]).is_ok());
    }

    #[test]
    fn label_out_of_range() {
        let f = FeatureMatrix::new(2, 1, vec![1.0, 2.0]).unwrap();
        let p = ProbMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let l = LabelVector::new(vec![0, 2]).unwrap();
        assert_eq!(
            validate_dataset(f, p, l).unwrap_err(),
            DataError::LabelOutOfRange {
                index: 1,
                label: 2,
                classes: 2
            }
        );
        assert!(LabelVector::new(vec![-1]).is_err());
    }

    #[test]
    fn cached_norms_match_recomputation() {
        let vals = vec![3.0, 4.0, 0.0, 0.0, 1.0, 1.0];
        let f = FeatureMatrix::new(3, 2, vals.clone()).unwrap();
        let p = ProbMatrix::new(3, 1, vec![1.0; 3]).unwrap();
        let l = LabelVector::new(vec![0, 0, 0]).unwrap();
        let h = validate_dataset(f, p, l).unwrap();
        for (i, chunk) in vals.chunks(2).enumerate() {
            let expect = chunk.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
            let got = h.embeddings().norms()[i];
            assert!((got - expect).abs() <= 1e-6 * expect.max(1e-300));
        }
        assert_eq!(h.embeddings().norms()[0], 5.0);
    }
}
