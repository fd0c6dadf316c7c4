//! End-to-end correction pipeline and training.
//!
//! Forward path per image: global features -> predicted matrix `M` ->
//! CAS planes -> 5D coordinates -> corrected luminance (5D LUT) and fringe
//! (1D LUT) -> inverse transform back to RGB. The orthogonal channel passes
//! through untouched. Training backpropagates the composite loss through
//! every stage with hand-written gradients; [`loss`] holds the loss terms
//! and the backward pass, [`train`] the Adam loop.
//!
//! Clamping policy: CAS values and the reconstructed RGB stay unclamped
//! through loss evaluation so gradients are not killed mid-pipeline; pixels
//! are clamped to `[0, 1]` only when an image is emitted.

mod loss;
mod train;

pub use loss::{compute_batch_loss, compute_loss, structural_perceptual_y, LossBreakdown, ParamGrads};
pub use train::{cosine_lr, train, AdamState, EpochLog, TrainConfig, TrainPair};

use crate::cas::{
    extract_global_features, CasPredictor, Mat3, PredictorForward, SINGULAR_EPS,
};
use crate::error::Result;
use crate::imgcore::ImageBuf;
use crate::lut::{raw_coords_at, CoordNorm, Lut1D, Lut5D};

/// Weights of the composite training objective.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    /// Pixel L1 weight.
    pub l1: f64,
    /// Perceptual (luma-structure + chroma) weight.
    pub p: f64,
    /// Chroma weight inside the perceptual term.
    pub chroma: f64,
    /// LUT smoothness weight.
    pub smooth: f64,
    /// Matrix axis-alignment weight.
    pub align: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            l1: 1.0,
            p: 0.1,
            chroma: 1.0,
            smooth: 1e-4,
            align: 1e-3,
        }
    }
}

/// The full trainable model: matrix predictor, both lookup tables, the
/// coordinate normalization they were trained with, and the loss weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub predictor: CasPredictor,
    pub lut5: Lut5D,
    pub lut1: Lut1D,
    pub norm: CoordNorm,
    pub weights: LossWeights,
}

impl Model {
    /// No-op model: base matrix, identity tables. Corrects nothing, damages
    /// nothing.
    pub fn identity() -> Self {
        Model {
            predictor: CasPredictor::zeroed(),
            lut5: Lut5D::identity_default(),
            lut1: Lut1D::identity_default(),
            norm: CoordNorm::default(),
            weights: LossWeights::default(),
        }
    }

    /// Identity tables plus a small random predictor so matrix gradients
    /// flow from the first step.
    pub fn init_for_training(seed: u64) -> Self {
        Model {
            predictor: CasPredictor::random_init(seed, 0.3),
            ..Model::identity()
        }
    }

    pub fn predict(&self, img: &ImageBuf) -> Result<PredictorForward> {
        let feats = extract_global_features(img)?;
        Ok(self.predictor.forward(&feats))
    }
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct TrainForward {
    pub tape: PredictorForward,
    pub inv: Mat3,
    pub width: usize,
    pub height: usize,
    /// CAS planes.
    pub lum: Vec<f64>,
    pub fringe: Vec<f64>,
    pub ortho: Vec<f64>,
    /// Raw (pre-clamp) 5D coordinates, plane-major.
    pub coords_raw: [Vec<f64>; 5],
    /// Corrected luminance and fringe planes.
    pub cp_lum: Vec<f64>,
    pub cp_fringe: Vec<f64>,
    /// Unclamped reconstructed RGB planes.
    pub out: [Vec<f64>; 3],
}

/// Inverse matrix with the training-time singularity guard: a model whose
/// predicted matrix collapses gets a small identity bump instead of
/// aborting the step.
fn guarded_inverse(m: &Mat3, training: bool) -> Result<Mat3> {
    if training && m.det().abs() < SINGULAR_EPS {
        log::warn!(
            "near-singular transform (det = {:.3e}); regularizing before inversion",
            m.det()
        );
        let mut bumped = *m;
        for i in 0..3 {
            bumped.0[i][i] += 1e-3;
        }
        bumped.inverse()
    } else {
        m.inverse()
    }
}

/// Full forward pass retaining intermediates for training.
pub fn forward_train(model: &Model, img: &ImageBuf) -> Result<TrainForward> {
    img.expect_rgb()?;
    let feats = extract_global_features(img)?;
    let tape = model.predictor.forward(&feats);
    let m = tape.matrix;
    let inv = guarded_inverse(&m, true)?;

    let cas = crate::cas::forward_transform(img, &m)?;
    let (w, h) = (img.width(), img.height());
    let n = w * h;

    let mut coords_raw: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut cp_lum = vec![0.0; n];
    let mut cp_fringe = vec![0.0; n];
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);

    let span = model.norm.lum_hi - model.norm.lum_lo;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let raw = raw_coords_at(&cas.lum, &cas.fringe, &model.norm, x, y);
            for d in 0..5 {
                coords_raw[d][i] = raw[d];
            }
            let f5 = model.lut5.lookup(raw.map(|c| c.clamp(0.0, 1.0)));
            cp_lum[i] = model.norm.lum_lo + f5 * span;
            cp_fringe[i] = model.lut1.lookup(cas.fringe.data()[i]);
            let v = inv.mul_vec([cp_lum[i], cp_fringe[i], cas.ortho.data()[i]]);
            for c in 0..3 {
                out[c][i] = v[c];
            }
        }
    }

    Ok(TrainForward {
        tape,
        inv,
        width: w,
        height: h,
        lum: cas.lum.data().to_vec(),
        fringe: cas.fringe.data().to_vec(),
        ortho: cas.ortho.data().to_vec(),
        coords_raw,
        cp_lum,
        cp_fringe,
        out,
    })
}

/// Corrects one image with a trained (or identity) model. Streams per pixel
/// without retaining training intermediates; a singular predicted matrix is
/// a hard error here.
pub fn correct_image(model: &Model, img: &ImageBuf) -> Result<ImageBuf> {
    img.expect_rgb()?;
    let feats = extract_global_features(img)?;
    let m = model.predictor.forward(&feats).matrix;
    let inv = guarded_inverse(&m, false)?;

    let cas = crate::cas::forward_transform(img, &m)?;
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let span = model.norm.lum_hi - model.norm.lum_lo;

    let mut data = vec![0.0; 3 * n];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let raw = raw_coords_at(&cas.lum, &cas.fringe, &model.norm, x, y);
            let f5 = model.lut5.lookup(raw.map(|c| c.clamp(0.0, 1.0)));
            let cp_lum = model.norm.lum_lo + f5 * span;
            let cp_fringe = model.lut1.lookup(cas.fringe.data()[i]);
            let v = inv.mul_vec([cp_lum, cp_fringe, cas.ortho.data()[i]]);
            data[i] = v[0];
            data[n + i] = v[1];
            data[2 * n + i] = v[2];
        }
    }
    ImageBuf::from_planes(w, h, 3, data)
}
