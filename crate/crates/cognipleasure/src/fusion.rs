//! Forward-only, small-matrix implementation of the cross-modal fusion math.
//!
//! This module exists to verify the fusion equations by invariant checks at
//! desk scale, not to train anything: temporal convolution, sinusoidal
//! position embeddings, masked cross-attention, residual-style concatenation,
//! a single pre-norm transformer encoder block over a CLS-prepended sequence,
//! CLS fusion, and the weighted multi-task absolute-error loss.

use std::collections::BTreeMap;

use ndarray::{s, Array1, Array2, Array3};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("position embedding width must be even, got {0}")]
    OddWidth(usize),
    #[error("temporal convolution kernel size must be odd, got {0}")]
    EvenKernel(usize),
    #[error("sequence must contain at least one time step")]
    EmptySequence,
    #[error("mask must leave at least one position attendable")]
    AllMasked,
    #[error("model width {d_model} is not divisible by {heads} heads")]
    HeadsDontDivide { d_model: usize, heads: usize },
    #[error("modality {0:?} supplied more than once")]
    DuplicateModality(Modality),
    #[error("loss weights must be non-negative and not all zero")]
    InvalidLossWeights,
}

/// Input stream tag. Fusion concatenates CLS states in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Modality {
    Audio,
    Visual,
    Text,
}

/// One modality's feature sequence with a key-padding mask
/// (`true` = real position, `false` = padding).
#[derive(Debug, Clone)]
pub struct ModalitySequence {
    pub modality: Modality,
    pub features: Array2<f64>,
    pub mask: Vec<bool>,
}

impl ModalitySequence {
    pub fn new(
        modality: Modality,
        features: Array2<f64>,
        mask: Vec<bool>,
    ) -> Result<Self, FusionError> {
        if features.nrows() == 0 {
            return Err(FusionError::EmptySequence);
        }
        if mask.len() != features.nrows() {
            return Err(FusionError::ShapeMismatch {
                what: "mask length",
                expected: features.nrows().to_string(),
                found: mask.len().to_string(),
            });
        }
        if !mask.iter().any(|&m| m) {
            return Err(FusionError::AllMasked);
        }
        Ok(ModalitySequence {
            modality,
            features,
            mask,
        })
    }
}

/// Temporal convolution weights: `kernel_size x d_in x d_out`.
#[derive(Debug, Clone)]
pub struct Conv1dKernel {
    pub weights: Array3<f64>,
}

impl Conv1dKernel {
    /// A centre-tap identity kernel (requires `d_in == d_out`).
    pub fn identity(kernel_size: usize, width: usize) -> Self {
        let mut weights = Array3::zeros((kernel_size, width, width));
        for i in 0..width {
            weights[[kernel_size / 2, i, i]] = 1.0;
        }
        Conv1dKernel { weights }
    }
}

/// Same-length 1-D convolution along time with symmetric zero padding.
pub fn temporal_conv1d(
    seq: &Array2<f64>,
    kernel: &Conv1dKernel,
) -> Result<Array2<f64>, FusionError> {
    let (k, d_in, d_out) = kernel.weights.dim();
    if k.is_multiple_of(2) {
        return Err(FusionError::EvenKernel(k));
    }
    if seq.ncols() != d_in {
        return Err(FusionError::ShapeMismatch {
            what: "convolution input width",
            expected: d_in.to_string(),
            found: seq.ncols().to_string(),
        });
    }
    let t_len = seq.nrows();
    let half = (k / 2) as isize;
    let mut out = Array2::zeros((t_len, d_out));
    for t in 0..t_len {
        for j in 0..k {
            let src = t as isize + j as isize - half;
            if src < 0 || src >= t_len as isize {
                continue;
            }
            let row = seq.row(src as usize);
            let tap = kernel.weights.slice(s![j, .., ..]);
            for o in 0..d_out {
                let mut acc = 0.0;
                for i in 0..d_in {
                    acc += tap[[i, o]] * row[i];
                }
                out[[t, o]] += acc;
            }
        }
    }
    Ok(out)
}

/// Fixed sine/cosine position embeddings: even columns carry
/// `sin(pos / 10000^(2i/d))`, odd columns the matching cosine. Every entry
/// lies in `[-1, 1]` and position zero alternates 0 and 1.
pub fn sinusoidal_pe(t_len: usize, width: usize) -> Result<Array2<f64>, FusionError> {
    if !width.is_multiple_of(2) {
        return Err(FusionError::OddWidth(width));
    }
    let mut pe = Array2::zeros((t_len, width));
    for pos in 0..t_len {
        for i in 0..width / 2 {
            let rate = 10_000f64.powf(2.0 * i as f64 / width as f64);
            let angle = pos as f64 / rate;
            pe[[pos, 2 * i]] = angle.sin();
            pe[[pos, 2 * i + 1]] = angle.cos();
        }
    }
    Ok(pe)
}

/// Query/key/value projection matrices, all `d_in x d`.
#[derive(Debug, Clone)]
pub struct AttentionProjections {
    pub w_q: Array2<f64>,
    pub w_k: Array2<f64>,
    pub w_v: Array2<f64>,
}

/// Attention output together with the post-softmax weight matrix
/// (`T_q x T_kv`, rows summing to one).
#[derive(Debug, Clone)]
pub struct Attention {
    pub output: Array2<f64>,
    pub weights: Array2<f64>,
}

/// Row-wise softmax with masked columns forced to exactly zero weight.
fn masked_softmax(scores: &Array2<f64>, mask: &[bool]) -> Array2<f64> {
    let mut weights = Array2::zeros(scores.dim());
    for (row_idx, row) in scores.rows().into_iter().enumerate() {
        let max = row
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for (col, (&score, &m)) in row.iter().zip(mask).enumerate() {
            if m {
                let e = (score - max).exp();
                weights[[row_idx, col]] = e;
                denom += e;
            }
        }
        for col in 0..mask.len() {
            weights[[row_idx, col]] /= denom;
        }
    }
    weights
}

/// Scaled dot-product attention with queries from one sequence and keys and
/// values from another. Masked key positions receive exactly zero weight, so
/// every output row is a convex combination of unmasked projected value rows.
pub fn cross_attention(
    query_seq: &Array2<f64>,
    kv_seq: &Array2<f64>,
    kv_mask: &[bool],
    proj: &AttentionProjections,
) -> Result<Attention, FusionError> {
    if query_seq.ncols() != proj.w_q.nrows() || kv_seq.ncols() != proj.w_k.nrows() {
        return Err(FusionError::ShapeMismatch {
            what: "attention projection input width",
            expected: proj.w_q.nrows().to_string(),
            found: query_seq.ncols().to_string(),
        });
    }
    if kv_mask.len() != kv_seq.nrows() {
        return Err(FusionError::ShapeMismatch {
            what: "key mask length",
            expected: kv_seq.nrows().to_string(),
            found: kv_mask.len().to_string(),
        });
    }
    if !kv_mask.iter().any(|&m| m) {
        return Err(FusionError::AllMasked);
    }
    let q = query_seq.dot(&proj.w_q);
    let k = kv_seq.dot(&proj.w_k);
    let v = kv_seq.dot(&proj.w_v);
    let scale = (q.ncols() as f64).sqrt();
    let scores = q.dot(&k.t()) / scale;
    let weights = masked_softmax(&scores, kv_mask);
    Ok(Attention {
        output: weights.dot(&v),
        weights,
    })
}

/// Feature-wise concatenation keeping the original stream intact: the first
/// block of columns is bit-equal to `original`.
pub fn residual_concat(
    original: &Array2<f64>,
    attended: &Array2<f64>,
) -> Result<Array2<f64>, FusionError> {
    if original.nrows() != attended.nrows() {
        return Err(FusionError::ShapeMismatch {
            what: "residual concat rows",
            expected: original.nrows().to_string(),
            found: attended.nrows().to_string(),
        });
    }
    let mut out = Array2::zeros((original.nrows(), original.ncols() + attended.ncols()));
    out.slice_mut(s![.., ..original.ncols()]).assign(original);
    out.slice_mut(s![.., original.ncols()..]).assign(attended);
    Ok(out)
}

/// One pre-norm transformer encoder block plus the learned CLS token.
#[derive(Debug, Clone)]
pub struct EncoderParams {
    pub heads: usize,
    pub cls: Array1<f64>,
    pub w_q: Array2<f64>,
    pub w_k: Array2<f64>,
    pub w_v: Array2<f64>,
    pub w_o: Array2<f64>,
    pub ff_w1: Array2<f64>,
    pub ff_w2: Array2<f64>,
}

impl EncoderParams {
    pub fn d_model(&self) -> usize {
        self.cls.len()
    }

    fn validate(&self) -> Result<(), FusionError> {
        let d = self.d_model();
        if self.heads == 0 || !d.is_multiple_of(self.heads) {
            return Err(FusionError::HeadsDontDivide {
                d_model: d,
                heads: self.heads.max(1),
            });
        }
        let square = |m: &Array2<f64>| m.nrows() == d && m.ncols() == d;
        if !(square(&self.w_q) && square(&self.w_k) && square(&self.w_v) && square(&self.w_o)) {
            return Err(FusionError::ShapeMismatch {
                what: "encoder projection shape",
                expected: format!("{d}x{d}"),
                found: format!("{}x{}", self.w_q.nrows(), self.w_q.ncols()),
            });
        }
        if self.ff_w1.nrows() != d
            || self.ff_w2.ncols() != d
            || self.ff_w1.ncols() != self.ff_w2.nrows()
        {
            return Err(FusionError::ShapeMismatch {
                what: "feed-forward shape",
                expected: format!("{d}xF, Fx{d}"),
                found: format!(
                    "{}x{}, {}x{}",
                    self.ff_w1.nrows(),
                    self.ff_w1.ncols(),
                    self.ff_w2.nrows(),
                    self.ff_w2.ncols()
                ),
            });
        }
        Ok(())
    }
}

/// Row-wise layer normalization (zero mean, unit variance, no affine part).
fn layer_norm(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let mean = row.mean().unwrap();
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64;
        let denom = (var + 1e-5).sqrt();
        row.mapv_inplace(|v| (v - mean) / denom);
    }
    out
}

/// Multi-head self-attention over an already-normalized sequence.
fn self_attention(
    x: &Array2<f64>,
    mask: &[bool],
    params: &EncoderParams,
) -> Result<Array2<f64>, FusionError> {
    let d = params.d_model();
    let head_dim = d / params.heads;
    let q = x.dot(&params.w_q);
    let k = x.dot(&params.w_k);
    let v = x.dot(&params.w_v);
    let mut concat = Array2::zeros((x.nrows(), d));
    for head in 0..params.heads {
        let cols = head * head_dim..(head + 1) * head_dim;
        let qh = q.slice(s![.., cols.clone()]);
        let kh = k.slice(s![.., cols.clone()]);
        let vh = v.slice(s![.., cols.clone()]);
        let scores = qh.dot(&kh.t()) / (head_dim as f64).sqrt();
        let weights = masked_softmax(&scores, mask);
        concat.slice_mut(s![.., cols]).assign(&weights.dot(&vh));
    }
    Ok(concat.dot(&params.w_o))
}

/// Encodes `[CLS; seq]` with one pre-norm block (self-attention, then a ReLU
/// feed-forward, each with a residual connection) and returns the CLS row.
/// Masked sequence rows are invisible to attention; the CLS position is
/// always attendable.
pub fn encode_with_cls(
    seq: &Array2<f64>,
    mask: &[bool],
    params: &EncoderParams,
) -> Result<Array1<f64>, FusionError> {
    params.validate()?;
    let d = params.d_model();
    if seq.ncols() != d {
        return Err(FusionError::ShapeMismatch {
            what: "encoder input width",
            expected: d.to_string(),
            found: seq.ncols().to_string(),
        });
    }
    if mask.len() != seq.nrows() {
        return Err(FusionError::ShapeMismatch {
            what: "encoder mask length",
            expected: seq.nrows().to_string(),
            found: mask.len().to_string(),
        });
    }
    let mut x = Array2::zeros((seq.nrows() + 1, d));
    x.row_mut(0).assign(&params.cls);
    x.slice_mut(s![1.., ..]).assign(seq);
    let mut full_mask = Vec::with_capacity(mask.len() + 1);
    full_mask.push(true);
    full_mask.extend_from_slice(mask);

    let attended = self_attention(&layer_norm(&x), &full_mask, params)?;
    let x = x + attended;
    let ff_in = layer_norm(&x);
    let hidden = ff_in.dot(&params.ff_w1).mapv(|v| v.max(0.0));
    let x = x + hidden.dot(&params.ff_w2);
    Ok(x.row(0).to_owned())
}

/// Final linear head mapping a fused vector to the seven outputs.
#[derive(Debug, Clone)]
pub struct HeadParams {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl HeadParams {
    pub fn apply(&self, input: &Array1<f64>) -> Result<Array1<f64>, FusionError> {
        if input.len() != self.weight.nrows() {
            return Err(FusionError::ShapeMismatch {
                what: "head input width",
                expected: self.weight.nrows().to_string(),
                found: input.len().to_string(),
            });
        }
        Ok(input.dot(&self.weight) + &self.bias)
    }
}

/// Concatenates per-modality CLS vectors in fixed (audio, visual, text)
/// order and applies the head. The fused width is the sum of the CLS widths,
/// so dropping a modality narrows the fusion accordingly.
pub fn fuse_and_head(
    cls_vectors: &[(Modality, Array1<f64>)],
    head: &HeadParams,
) -> Result<Array1<f64>, FusionError> {
    if cls_vectors.is_empty() {
        return Err(FusionError::EmptySequence);
    }
    let mut ordered: Vec<&(Modality, Array1<f64>)> = cls_vectors.iter().collect();
    ordered.sort_by_key(|(m, _)| *m);
    for pair in ordered.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(FusionError::DuplicateModality(pair[0].0));
        }
    }
    let fused_width: usize = ordered.iter().map(|(_, v)| v.len()).sum();
    let mut fused = Array1::zeros(fused_width);
    let mut offset = 0;
    for (_, v) in ordered {
        fused.slice_mut(s![offset..offset + v.len()]).assign(v);
        offset += v.len();
    }
    head.apply(&fused)
}

/// Loss weights for the unimodal heads and the fused head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossWeights {
    pub audio: f64,
    pub visual: f64,
    pub text: f64,
    pub fused: f64,
}

impl LossWeights {
    pub fn uniform() -> Self {
        LossWeights {
            audio: 1.0,
            visual: 1.0,
            text: 1.0,
            fused: 1.0,
        }
    }

    fn get(&self, modality: Modality) -> f64 {
        match modality {
            Modality::Audio => self.audio,
            Modality::Visual => self.visual,
            Modality::Text => self.text,
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        let all = [self.audio, self.visual, self.text, self.fused];
        if all.iter().any(|&a| a < 0.0 || !a.is_finite()) || all.iter().all(|&a| a == 0.0) {
            return Err(FusionError::InvalidLossWeights);
        }
        Ok(())
    }
}

fn mean_absolute_error(pred: &Array1<f64>, target: &Array1<f64>) -> Result<f64, FusionError> {
    if pred.len() != target.len() {
        return Err(FusionError::ShapeMismatch {
            what: "loss vector length",
            expected: target.len().to_string(),
            found: pred.len().to_string(),
        });
    }
    Ok((pred - target).mapv(f64::abs).mean().unwrap())
}

/// Weighted sum of per-head mean absolute errors: one term per supplied
/// unimodal prediction plus the fused term. Zero exactly when every head
/// with positive weight predicts the target.
pub fn multitask_loss(
    unimodal_preds: &[(Modality, Array1<f64>)],
    fused_pred: &Array1<f64>,
    target: &Array1<f64>,
    weights: &LossWeights,
) -> Result<f64, FusionError> {
    weights.validate()?;
    let mut loss = weights.fused * mean_absolute_error(fused_pred, target)?;
    for (modality, pred) in unimodal_preds {
        loss += weights.get(*modality) * mean_absolute_error(pred, target)?;
    }
    Ok(loss)
}

/// Dimensions of a randomly initialized toy model.
#[derive(Debug, Clone, Copy)]
pub struct FusionDims {
    pub d_in: usize,
    pub d: usize,
    pub heads: usize,
    pub ff_width: usize,
    pub kernel_size: usize,
}

impl Default for FusionDims {
    fn default() -> Self {
        FusionDims {
            d_in: 6,
            d: 8,
            heads: 4,
            ff_width: 32,
            kernel_size: 3,
        }
    }
}

/// Everything the toy forward pass needs, at one shared dimensionality.
/// The encoder runs at `d_model = 2 * d` because it consumes the
/// residual-concatenated streams.
#[derive(Debug, Clone)]
pub struct FusionParams {
    pub dims: FusionDims,
    pub conv: BTreeMap<Modality, Conv1dKernel>,
    pub attention: AttentionProjections,
    pub encoder: EncoderParams,
    pub unimodal_heads: BTreeMap<Modality, HeadParams>,
    pub fused_head_2: HeadParams,
    pub fused_head_3: HeadParams,
    pub loss_weights: LossWeights,
}

impl FusionParams {
    /// Uniform random initialization in [-0.5, 0.5], reproducible from the
    /// caller's generator.
    pub fn random<R: Rng>(rng: &mut R, dims: FusionDims) -> Result<Self, FusionError> {
        let d_model = 2 * dims.d;
        if dims.heads == 0 || !d_model.is_multiple_of(dims.heads) {
            return Err(FusionError::HeadsDontDivide {
                d_model,
                heads: dims.heads.max(1),
            });
        }
        let mat = |r: usize, c: usize, rng: &mut R| {
            Array2::from_shape_fn((r, c), |_| rng.gen_range(-0.5..0.5))
        };
        let conv = [Modality::Audio, Modality::Visual, Modality::Text]
            .into_iter()
            .map(|m| {
                let weights = Array3::from_shape_fn((dims.kernel_size, dims.d_in, dims.d), |_| {
                    rng.gen_range(-0.5..0.5)
                });
                (m, Conv1dKernel { weights })
            })
            .collect();
        let attention = AttentionProjections {
            w_q: mat(dims.d, dims.d, rng),
            w_k: mat(dims.d, dims.d, rng),
            w_v: mat(dims.d, dims.d, rng),
        };
        let encoder = EncoderParams {
            heads: dims.heads,
            cls: Array1::from_shape_fn(d_model, |_| rng.gen_range(-0.5..0.5)),
            w_q: mat(d_model, d_model, rng),
            w_k: mat(d_model, d_model, rng),
            w_v: mat(d_model, d_model, rng),
            w_o: mat(d_model, d_model, rng),
            ff_w1: mat(d_model, dims.ff_width, rng),
            ff_w2: mat(dims.ff_width, d_model, rng),
        };
        let unimodal_heads = [Modality::Audio, Modality::Visual, Modality::Text]
            .into_iter()
            .map(|m| {
                (
                    m,
                    HeadParams {
                        weight: Array2::from_shape_fn((d_model, 7), |_| rng.gen_range(-0.5..0.5)),
                        bias: Array1::from_shape_fn(7, |_| rng.gen_range(-0.5..0.5)),
                    },
                )
            })
            .collect();
        let fused_head_2 = HeadParams {
            weight: mat(2 * d_model, 7, rng),
            bias: Array1::from_shape_fn(7, |_| rng.gen_range(-0.5..0.5)),
        };
        let fused_head_3 = HeadParams {
            weight: mat(3 * d_model, 7, rng),
            bias: Array1::from_shape_fn(7, |_| rng.gen_range(-0.5..0.5)),
        };
        Ok(FusionParams {
            dims,
            conv,
            attention,
            encoder,
            unimodal_heads,
            fused_head_2,
            fused_head_3,
            loss_weights: LossWeights::uniform(),
        })
    }
}

/// Diagnostics from one toy forward pass.
#[derive(Debug, Clone, Serialize)]
pub struct ForwardTrace {
    pub modalities: Vec<ModalityTrace>,
    pub fused_width: usize,
    pub fused_pred: Vec<f64>,
    pub loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModalityTrace {
    pub modality: Modality,
    pub seq_len: usize,
    pub conv_width: usize,
    pub concat_width: usize,
    /// Sum of all cross-attention softmax weights; equals the number of
    /// query rows when every row is a proper distribution.
    pub attention_weight_total: f64,
    pub cls_norm: f64,
    pub unimodal_pred: Vec<f64>,
}

/// Runs the full toy pipeline over the supplied modalities (two or three)
/// and returns the loss against `target` along with shape and softmax
/// diagnostics. Each modality queries the next one cyclically for its
/// cross-attention keys and values.
pub fn forward_pass(
    sequences: &[ModalitySequence],
    params: &FusionParams,
    target: &Array1<f64>,
) -> Result<ForwardTrace, FusionError> {
    if sequences.is_empty() {
        return Err(FusionError::EmptySequence);
    }
    let mut ordered: Vec<&ModalitySequence> = sequences.iter().collect();
    ordered.sort_by_key(|s| s.modality);
    for pair in ordered.windows(2) {
        if pair[0].modality == pair[1].modality {
            return Err(FusionError::DuplicateModality(pair[0].modality));
        }
    }

    // Stage 1-2: convolution plus position embeddings, per modality.
    let mut enriched = Vec::new();
    for seq in &ordered {
        let conv = temporal_conv1d(&seq.features, &params.conv[&seq.modality])?;
        let pe = sinusoidal_pe(conv.nrows(), conv.ncols())?;
        enriched.push(conv + pe);
    }

    // Stage 3-5: cross-attend to the next modality, concatenate, encode.
    let mut cls_vectors = Vec::new();
    let mut traces = Vec::new();
    for (idx, seq) in ordered.iter().enumerate() {
        let partner = (idx + 1) % ordered.len();
        let attention = cross_attention(
            &enriched[idx],
            &enriched[partner],
            &ordered[partner].mask,
            &params.attention,
        )?;
        let concat = residual_concat(&enriched[idx], &attention.output)?;
        let cls = encode_with_cls(&concat, &seq.mask, &params.encoder)?;
        let unimodal_pred = params.unimodal_heads[&seq.modality].apply(&cls)?;
        traces.push(ModalityTrace {
            modality: seq.modality,
            seq_len: seq.features.nrows(),
            conv_width: enriched[idx].ncols(),
            concat_width: concat.ncols(),
            attention_weight_total: attention.weights.sum(),
            cls_norm: cls.dot(&cls).sqrt(),
            unimodal_pred: unimodal_pred.to_vec(),
        });
        cls_vectors.push((seq.modality, cls, unimodal_pred));
    }

    let fused_inputs: Vec<(Modality, Array1<f64>)> = cls_vectors
        .iter()
        .map(|(m, cls, _)| (*m, cls.clone()))
        .collect();
    let head = match ordered.len() {
        2 => &params.fused_head_2,
        3 => &params.fused_head_3,
        n => {
            return Err(FusionError::ShapeMismatch {
                what: "modality count",
                expected: "2 or 3".to_string(),
                found: n.to_string(),
            })
        }
    };
    let fused_pred = fuse_and_head(&fused_inputs, head)?;
    let unimodal: Vec<(Modality, Array1<f64>)> = cls_vectors
        .iter()
        .map(|(m, _, pred)| (*m, pred.clone()))
        .collect();
    let loss = multitask_loss(&unimodal, &fused_pred, target, &params.loss_weights)?;

    Ok(ForwardTrace {
        modalities: traces,
        fused_width: fused_inputs.iter().map(|(_, v)| v.len()).sum(),
        fused_pred: fused_pred.to_vec(),
        loss,
    })
}
