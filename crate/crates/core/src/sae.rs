//! Sparse autoencoder: forward pass, L1-regularized loss, toy training,
//! and weight serialization.
//!
//! The model maps an activation vector `x` (length `d_model`) to a wider
//! sparse code `f` (length `d_sae`):
//!
//! ```text
//! pre  = W_e (x - b_d) + b_e
//! f    = activation(pre)          (ReLU or per-feature JumpReLU)
//! xhat = W_d f + b_d
//! loss = ||x - xhat||^2 + lambda * ||f||_1
//! ```
//!
//! # Weight file format
//!
//! Little-endian: magic `"SAEW"`, version `u8` (= 1), activation kind `u8`
//! (0 = ReLU, 1 = JumpReLU), `d_model: u32`, `d_sae: u32`, then `W_e`
//! (`d_sae x d_model`, row-major), `b_e`, `W_d` (`d_model x d_sae`,
//! row-major), `b_d`, and for JumpReLU the `d_sae` thresholds, all `f32`.

use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot_f64, MatrixF32};
use crate::rng::seeded_rng;
use crate::store::ActivationDataset;

pub const SAE_MAGIC: [u8; 4] = *b"SAEW";
pub const SAE_VERSION: u8 = 1;

/// Activation function applied to the encoder pre-activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaeActivation {
    Relu,
    /// Passes values strictly above a per-feature threshold, else zero.
    JumpRelu,
}

/// Where to sample the code: before or after the activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeStage {
    Pre,
    Post,
}

/// Encoder/decoder weights of a sparse autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct SaeModel {
    w_enc: MatrixF32,
    b_enc: Vec<f32>,
    w_dec: MatrixF32,
    b_dec: Vec<f32>,
    activation: SaeActivation,
    thresholds: Option<Vec<f32>>,
}

/// Loss components for one example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaeLoss {
    pub total: f64,
    pub recon: f64,
    pub l1: f64,
}

/// Hyperparameters for the toy trainer.
#[derive(Debug, Clone)]
pub struct SaeTrainConfig {
    /// L1 sparsity coefficient.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl SaeModel {
    /// Validates shapes, finiteness, and the thresholds/activation pairing.
    pub fn new(
        w_enc: MatrixF32,
        b_enc: Vec<f32>,
        w_dec: MatrixF32,
        b_dec: Vec<f32>,
        activation: SaeActivation,
        thresholds: Option<Vec<f32>>,
    ) -> Result<Self> {
        let d_sae = w_enc.rows();
        let d_model = w_enc.cols();
        if d_sae == 0 || d_model == 0 {
            return Err(Error::Shape("SAE dimensions must be positive".to_string()));
        }
        if w_dec.rows() != d_model || w_dec.cols() != d_sae {
            return Err(Error::Shape(format!(
                "decoder is {}x{}, expected {d_model}x{d_sae}",
                w_dec.rows(),
                w_dec.cols()
            )));
        }
        if b_enc.len() != d_sae || b_dec.len() != d_model {
            return Err(Error::Shape("bias length mismatch".to_string()));
        }
        match (activation, &thresholds) {
            (SaeActivation::Relu, Some(_)) => {
                return Err(Error::Validation(
                    "ReLU model must not carry thresholds".to_string(),
                ))
            }
            (SaeActivation::JumpRelu, None) => {
                return Err(Error::Validation(
                    "JumpReLU model requires thresholds".to_string(),
                ))
            }
            (SaeActivation::JumpRelu, Some(t)) => {
                if t.len() != d_sae {
                    return Err(Error::Shape("threshold length mismatch".to_string()));
                }
                if t.iter().any(|&v| !(v >= 0.0)) {
                    return Err(Error::Validation(
                        "thresholds must be finite and non-negative".to_string(),
                    ));
                }
            }
            (SaeActivation::Relu, None) => {}
        }
        let finite = w_enc.is_finite()
            && w_dec.is_finite()
            && b_enc.iter().all(|v| v.is_finite())
            && b_dec.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation(
                "SAE weights contain non-finite entries".to_string(),
            ));
        }
        Ok(SaeModel {
            w_enc,
            b_enc,
            w_dec,
            b_dec,
            activation,
            thresholds,
        })
    }

    pub fn d_model(&self) -> usize {
        self.w_enc.cols()
    }

    pub fn d_sae(&self) -> usize {
        self.w_enc.rows()
    }

    pub fn activation(&self) -> SaeActivation {
        self.activation
    }

    pub fn thresholds(&self) -> Option<&[f32]> {
        self.thresholds.as_deref()
    }

    /// Encoder weight row for one feature; this row is the feature's
    /// direction in activation space.
    pub fn encoder_row(&self, feature: usize) -> &[f32] {
        self.w_enc.row(feature)
    }

    fn activate(&self, pre: &mut [f32]) {
        match self.activation {
            SaeActivation::Relu => {
                for v in pre.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            SaeActivation::JumpRelu => {
                let thresholds = self.thresholds.as_ref().expect("validated at construction");
                for (v, &t) in pre.iter_mut().zip(thresholds) {
                    if !(*v > t) {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    /// Feature code for one activation vector. `Pre` returns the affine
    /// encoder output; `Post` applies the activation function to it.
    pub fn encode(&self, x: &[f32], stage: EncodeStage) -> Result<Vec<f32>> {
        if x.len() != self.d_model() {
            return Err(Error::Shape(format!(
                "input has {} entries, model expects {}",
                x.len(),
                self.d_model()
            )));
        }
        let centered: Vec<f32> = x
            .iter()
            .zip(&self.b_dec)
            .map(|(&xi, &bi)| (f64::from(xi) - f64::from(bi)) as f32)
            .collect();
        let mut code: Vec<f32> = (0..self.d_sae())
            .map(|i| {
                (dot_f64(self.w_enc.row(i), &centered) + f64::from(self.b_enc[i])) as f32
            })
            .collect();
        if stage == EncodeStage::Post {
            self.activate(&mut code);
        }
        Ok(code)
    }

    /// Reconstruction `W_d f + b_d` from a feature code.
    pub fn decode(&self, code: &[f32]) -> Result<Vec<f32>> {
        if code.len() != self.d_sae() {
            return Err(Error::Shape(format!(
                "code has {} entries, model expects {}",
                code.len(),
                self.d_sae()
            )));
        }
        Ok((0..self.d_model())
            .map(|j| (dot_f64(self.w_dec.row(j), code) + f64::from(self.b_dec[j])) as f32)
            .collect())
    }

    /// Reconstruction and sparsity loss for one example.
    pub fn loss(&self, x: &[f32], lambda: f64) -> Result<SaeLoss> {
        let code = self.encode(x, EncodeStage::Post)?;
        let xhat = self.decode(&code)?;
        let recon: f64 = x
            .iter()
            .zip(&xhat)
            .map(|(&xi, &ri)| {
                let d = f64::from(xi) - f64::from(ri);
                d * d
            })
            .sum();
        let l1: f64 = code.iter().map(|&f| f64::from(f).abs()).sum();
        Ok(SaeLoss {
            total: recon + lambda * l1,
            recon,
            l1,
        })
    }

    /// Mean loss over a dataset.
    pub fn mean_loss(&self, data: &ActivationDataset, lambda: f64) -> Result<SaeLoss> {
        let n = data.n_examples();
        if n == 0 {
            return Err(Error::Config("empty dataset".to_string()));
        }
        let mut total = 0.0;
        let mut recon = 0.0;
        let mut l1 = 0.0;
        for i in 0..n {
            let loss = self.loss(data.row(i), lambda)?;
            total += loss.total;
            recon += loss.recon;
            l1 += loss.l1;
        }
        let nf = n as f64;
        Ok(SaeLoss {
            total: total / nf,
            recon: recon / nf,
            l1: l1 / nf,
        })
    }

    /// Encode every row of a dataset into a feature dataset carrying the
    /// same labels. The metadata hook point records the sampling stage.
    pub fn encode_dataset(
        &self,
        data: &ActivationDataset,
        stage: EncodeStage,
    ) -> Result<ActivationDataset> {
        if data.d_model() != self.d_model() {
            return Err(Error::Shape(format!(
                "dataset width {} does not match model d_model {}",
                data.d_model(),
                self.d_model()
            )));
        }
        let mut rows = Vec::with_capacity(data.n_examples());
        for i in 0..data.n_examples() {
            rows.push(self.encode(data.row(i), stage)?);
        }
        let mut meta = data.meta().clone();
        meta.hook_point = format!(
            "{}/sae-{}",
            meta.hook_point,
            match stage {
                EncodeStage::Pre => "pre",
                EncodeStage::Post => "post",
            }
        );
        ActivationDataset::new(MatrixF32::from_rows(&rows)?, data.labels().to_vec(), meta)
    }
}

/// Train a ReLU SAE with mini-batch Adam, keeping decoder columns at unit
/// norm (projection after every update).
///
/// Both ingredients are load-bearing. Without the norm constraint the
/// decoder grows to cancel the L1 pressure and features never specialize;
/// without adaptive step sizes the feature-rotation modes of the loss are
/// too ill-conditioned to traverse in any reasonable epoch budget.
///
/// Weights initialize uniform in `[-1/sqrt(d_model), 1/sqrt(d_model)]`
/// from the config seed, biases at zero. Deterministic for a fixed config.
pub fn train_sae(
    data: &ActivationDataset,
    d_sae: usize,
    cfg: &SaeTrainConfig,
) -> Result<SaeModel> {
    if data.n_examples() == 0 {
        return Err(Error::Config("cannot train on an empty dataset".to_string()));
    }
    let d_model = data.d_model();
    if d_sae < d_model {
        return Err(Error::Config(format!(
            "d_sae {d_sae} must be at least d_model {d_model} for training"
        )));
    }
    if !(cfg.lambda >= 0.0) || !(cfg.learning_rate > 0.0) || cfg.batch_size == 0 {
        return Err(Error::Config(
            "lambda must be >= 0, learning_rate > 0, batch_size > 0".to_string(),
        ));
    }

    let mut rng = seeded_rng(cfg.seed);
    let bound = 1.0 / (d_model as f64).sqrt();
    let mut w_enc = vec![0.0f64; d_sae * d_model];
    for v in &mut w_enc {
        *v = rng.random_range(-bound..=bound);
    }
    // Decoder entries are drawn in the on-disk (d_model x d_sae, row-major)
    // order but held feature-major during training so each feature's column
    // is contiguous in the hot loops.
    let mut w_dec_rowmajor = vec![0.0f64; d_model * d_sae];
    for v in &mut w_dec_rowmajor {
        *v = rng.random_range(-bound..=bound);
    }
    let mut w_dec = vec![0.0f64; d_sae * d_model];
    for j in 0..d_model {
        for i in 0..d_sae {
            w_dec[i * d_model + j] = w_dec_rowmajor[j * d_sae + i];
        }
    }
    drop(w_dec_rowmajor);
    let mut b_enc = vec![0.0f64; d_sae];
    let mut b_dec = vec![0.0f64; d_model];

    let n = data.n_examples();
    let mut order: Vec<usize> = (0..n).collect();

    // Per-batch gradient accumulators, reused across batches.
    let mut g_w_enc = vec![0.0f64; d_sae * d_model];
    let mut g_w_dec = vec![0.0f64; d_sae * d_model];
    let mut g_b_enc = vec![0.0f64; d_sae];
    let mut g_b_dec = vec![0.0f64; d_model];

    // Adam first/second-moment state.
    let mut adam = AdamState::new(&[d_sae * d_model, d_sae * d_model, d_sae, d_model]);

    let mut centered = vec![0.0f64; d_model];
    let mut pre = vec![0.0f64; d_sae];
    let mut resid = vec![0.0f64; d_model];
    let mut active: Vec<usize> = Vec::with_capacity(d_sae);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            g_w_enc.iter_mut().for_each(|v| *v = 0.0);
            g_w_dec.iter_mut().for_each(|v| *v = 0.0);
            g_b_enc.iter_mut().for_each(|v| *v = 0.0);
            g_b_dec.iter_mut().for_each(|v| *v = 0.0);
            let mut batch_loss = 0.0f64;

            for &idx in batch {
                let x = data.row(idx);
                for j in 0..d_model {
                    centered[j] = f64::from(x[j]) - b_dec[j];
                }
                active.clear();
                for i in 0..d_sae {
                    let row = &w_enc[i * d_model..(i + 1) * d_model];
                    // Four partial sums keep the FMA pipeline busy.
                    let mut acc = [0.0f64; 4];
                    let mut chunks = row.chunks_exact(4).zip(centered.chunks_exact(4));
                    for (r, c) in &mut chunks {
                        acc[0] += r[0] * c[0];
                        acc[1] += r[1] * c[1];
                        acc[2] += r[2] * c[2];
                        acc[3] += r[3] * c[3];
                    }
                    let mut total = b_enc[i] + (acc[0] + acc[1]) + (acc[2] + acc[3]);
                    for j in (d_model - d_model % 4)..d_model {
                        total += row[j] * centered[j];
                    }
                    pre[i] = total;
                    if total > 0.0 {
                        active.push(i);
                    }
                }
                // resid = xhat - x, accumulated over the active code only.
                let mut l1 = 0.0f64;
                for j in 0..d_model {
                    resid[j] = b_dec[j] - f64::from(x[j]);
                }
                for &i in &active {
                    let f = pre[i];
                    l1 += f;
                    let col = &w_dec[i * d_model..(i + 1) * d_model];
                    for j in 0..d_model {
                        resid[j] += f * col[j];
                    }
                }
                let recon: f64 = resid.iter().map(|r| r * r).sum();
                batch_loss += recon + cfg.lambda * l1;

                for &i in &active {
                    // d(loss)/d(pre_i) = 2 (W_d^T resid)_i + lambda
                    let col = &w_dec[i * d_model..(i + 1) * d_model];
                    let mut acc = 0.0;
                    for j in 0..d_model {
                        acc += col[j] * resid[j];
                    }
                    let g = 2.0 * acc + cfg.lambda;

                    let enc_grad = &mut g_w_enc[i * d_model..(i + 1) * d_model];
                    for j in 0..d_model {
                        enc_grad[j] += g * centered[j];
                    }
                    g_b_enc[i] += g;

                    let f = pre[i];
                    let dec_grad = &mut g_w_dec[i * d_model..(i + 1) * d_model];
                    for j in 0..d_model {
                        dec_grad[j] += 2.0 * resid[j] * f;
                    }

                    // Encoder-path contribution to the decoder bias.
                    let row = &w_enc[i * d_model..(i + 1) * d_model];
                    for j in 0..d_model {
                        g_b_dec[j] -= g * row[j];
                    }
                }
                // Decoder-path contribution to the decoder bias.
                for j in 0..d_model {
                    g_b_dec[j] += 2.0 * resid[j];
                }
            }

            if !batch_loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: "non-finite batch loss".to_string(),
                });
            }
            let inv_batch = 1.0 / batch.len() as f64;
            for g in g_w_enc.iter_mut() {
                *g *= inv_batch;
            }
            for g in g_w_dec.iter_mut() {
                *g *= inv_batch;
            }
            for g in g_b_enc.iter_mut() {
                *g *= inv_batch;
            }
            for g in g_b_dec.iter_mut() {
                *g *= inv_batch;
            }
            adam.step(
                cfg.learning_rate,
                [&mut w_enc, &mut w_dec, &mut b_enc, &mut b_dec],
                [&g_w_enc, &g_w_dec, &g_b_enc, &g_b_dec],
            );

            // Project decoder columns back onto the unit sphere.
            for col in w_dec.chunks_mut(d_model) {
                let norm_sq: f64 = col.iter().map(|v| v * v).sum();
                if norm_sq > 1e-24 {
                    let inv = 1.0 / norm_sq.sqrt();
                    for v in col.iter_mut() {
                        *v *= inv;
                    }
                }
            }
        }
    }

    let to_f32 = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
    let mut w_dec_out = vec![0.0f32; d_model * d_sae];
    for i in 0..d_sae {
        for j in 0..d_model {
            w_dec_out[j * d_sae + i] = w_dec[i * d_model + j] as f32;
        }
    }
    SaeModel::new(
        MatrixF32::from_vec(d_sae, d_model, to_f32(&w_enc))?,
        to_f32(&b_enc),
        MatrixF32::from_vec(d_model, d_sae, w_dec_out)?,
        to_f32(&b_dec),
        SaeActivation::Relu,
        None,
    )
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl AdamState {
    fn new(sizes: &[usize]) -> Self {
        AdamState {
            m: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, lr: f64, params: [&mut Vec<f64>; 4], grads: [&Vec<f64>; 4]) {
        self.t += 1;
        let bias1 = 1.0 - ADAM_BETA1.powi(self.t);
        let bias2 = 1.0 - ADAM_BETA2.powi(self.t);
        for (group, (param, grad)) in params.into_iter().zip(grads).enumerate() {
            let m = &mut self.m[group];
            let v = &mut self.v[group];
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                param[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            }
        }
    }
}

/// Write SAE weights in the binary format described in the module docs.
pub fn save_sae(model: &SaeModel, path: &Path) -> Result<()> {
    let d_model = model.d_model();
    let d_sae = model.d_sae();
    let mut bytes = Vec::with_capacity(14 + 4 * (2 * d_sae * d_model + d_sae + d_model));
    bytes.extend_from_slice(&SAE_MAGIC);
    bytes.push(SAE_VERSION);
    bytes.push(match model.activation {
        SaeActivation::Relu => 0,
        SaeActivation::JumpRelu => 1,
    });
    bytes.extend_from_slice(&(d_model as u32).to_le_bytes());
    bytes.extend_from_slice(&(d_sae as u32).to_le_bytes());
    for v in model.w_enc.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in &model.b_enc {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in model.w_dec.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in &model.b_dec {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(thresholds) = &model.thresholds {
        for v in thresholds {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, &bytes).map_err(|e| Error::storage(path, e))
}

/// Load SAE weights written by [`save_sae`].
pub fn load_sae(path: &Path) -> Result<SaeModel> {
    let bytes = fs::read(path).map_err(|e| Error::storage(path, e))?;
    let mut cursor = bytes.as_slice();

    let mut magic = [0u8; 4];
    read_exact_format(&mut cursor, &mut magic, "magic")?;
    if magic != SAE_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {SAE_MAGIC:?}"
        )));
    }
    let mut header = [0u8; 2];
    read_exact_format(&mut cursor, &mut header, "version/activation")?;
    if header[0] != SAE_VERSION {
        return Err(Error::Format(format!(
            "unsupported SAE file version {}",
            header[0]
        )));
    }
    let activation = match header[1] {
        0 => SaeActivation::Relu,
        1 => SaeActivation::JumpRelu,
        other => return Err(Error::Format(format!("unknown activation kind {other}"))),
    };
    let mut dims = [0u8; 8];
    read_exact_format(&mut cursor, &mut dims, "dimensions")?;
    let d_model = u32::from_le_bytes(dims[0..4].try_into().unwrap()) as usize;
    let d_sae = u32::from_le_bytes(dims[4..8].try_into().unwrap()) as usize;
    if d_model == 0 || d_sae == 0 {
        return Err(Error::Format("zero dimension in header".to_string()));
    }

    let mut read_f32s = |count: usize, what: &str| -> Result<Vec<f32>> {
        let mut out = Vec::with_capacity(count);
        let mut buf = [0u8; 4];
        for _ in 0..count {
            read_exact_format(&mut cursor, &mut buf, what)?;
            out.push(f32::from_le_bytes(buf));
        }
        Ok(out)
    };
    let w_enc = read_f32s(d_sae * d_model, "encoder weights")?;
    let b_enc = read_f32s(d_sae, "encoder bias")?;
    let w_dec = read_f32s(d_model * d_sae, "decoder weights")?;
    let b_dec = read_f32s(d_model, "decoder bias")?;
    let thresholds = match activation {
        SaeActivation::Relu => None,
        SaeActivation::JumpRelu => Some(read_f32s(d_sae, "thresholds")?),
    };
    if !cursor.is_empty() {
        return Err(Error::Format(format!(
            "{} trailing bytes after weights",
            cursor.len()
        )));
    }

    SaeModel::new(
        MatrixF32::from_vec(d_sae, d_model, w_enc)?,
        b_enc,
        MatrixF32::from_vec(d_model, d_sae, w_dec)?,
        b_dec,
        activation,
        thresholds,
    )
}

fn read_exact_format(cursor: &mut &[u8], buf: &mut [u8], what: &str) -> Result<()> {
    cursor
        .read_exact(buf)
        .map_err(|_| Error::Format(format!("truncated while reading {what}")))
}
