//! Chromatic Aberration Space: an image-adaptive 3x3 color transform.
//!
//! A small statistics-based predictor regresses a per-image matrix `M` as a
//! bounded residual around a fixed chromatic base. Row 1 of the base is the
//! BT.601 luminance vector, row 2 points along the purple-fringe direction
//! (red and blue high, green low), and row 3 completes the basis. Applying
//! `M` per pixel yields a luminance channel, a fringe channel, and an
//! orthogonal channel; the analytic inverse of `M` maps corrected channels
//! back to RGB.
//!
//! The predictor is deliberately tiny: 12 global image statistics feed a
//! two-layer perceptron (hidden width 32) whose tanh-bounded output offsets
//! the base matrix. This keeps the matrix image-adaptive while remaining
//! trainable with hand-written gradients; it is this crate's stand-in for a
//! convolutional encoder, and the one architectural simplification relative
//! to heavyweight learned approaches.

use crate::error::{Error, Result};
use crate::imgcore::{rgb_to_hsv_px, sobel_gradients, to_grayscale, GrayBuf, ImageBuf, LUMA_WEIGHTS};

pub const FEATURE_COUNT: usize = 12;
pub const HIDDEN_WIDTH: usize = 32;

/// Determinant magnitude below which a matrix is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-6;

/// 3x3 matrix, row-major. Rows of a CAS transform are the luminance, fringe,
/// and orthogonal basis vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        self.0[i]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Analytic inverse via adjugate / determinant.
    pub fn inverse(&self) -> Result<Mat3> {
        let det = self.det();
        if det.abs() < SINGULAR_EPS {
            return Err(Error::SingularTransform(det.abs()));
        }
        let m = &self.0;
        let inv_det = 1.0 / det;
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = adj[i][j] * inv_det;
            }
        }
        Ok(Mat3(out))
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for (k, row) in other.0.iter().enumerate() {
                    out[i][j] += self.0[i][k] * row[j];
                }
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = self.0;
        for row in &mut out {
            for v in row {
                *v *= s;
            }
        }
        Mat3(out)
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Fixed chromatic base matrix:
/// row 1 = BT.601 luminance weights,
/// row 2 = unit vector along (0.5, -1, 0.5) — positive on purple, zero on
///         neutral gray,
/// row 3 = normalized cross product of rows 1 and 2.
pub fn base_matrix() -> Mat3 {
    let r1 = LUMA_WEIGHTS;
    let r2 = normalize([0.5, -1.0, 0.5]);
    let r3 = normalize(cross(r1, r2));
    Mat3([r1, r2, r3])
}

/// Image in chromatic aberration space: unbounded luminance / fringe /
/// orthogonal planes plus the matrix that produced them.
#[derive(Debug, Clone)]
pub struct CasImage {
    pub lum: GrayBuf,
    pub fringe: GrayBuf,
    pub ortho: GrayBuf,
    pub matrix: Mat3,
}

impl CasImage {
    pub fn width(&self) -> usize {
        self.lum.width()
    }

    pub fn height(&self) -> usize {
        self.lum.height()
    }
}

/// 12 global statistics standing in for an encoder's pooled features:
/// per-channel means and standard deviations, edge density, purple fraction,
/// mean and max Sobel magnitude, and mean/std of the fringe signal R+B-2G.
pub fn extract_global_features(img: &ImageBuf) -> Result<[f64; FEATURE_COUNT]> {
    img.expect_rgb()?;
    let n = img.plane_len() as f64;
    let mut feats = [0.0; FEATURE_COUNT];

    for c in 0..3 {
        let plane = img.plane(c);
        let mean = plane.iter().sum::<f64>() / n;
        let var = plane.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        feats[c] = mean;
        feats[3 + c] = var.sqrt();
    }

    let gray = to_grayscale(img)?;
    let (_, _, mag) = sobel_gradients(&gray);
    let edge_density = mag.data().iter().filter(|&&v| v > 0.1).count() as f64 / n;
    let mean_mag = mag.data().iter().sum::<f64>() / n;
    let max_mag = mag.data().iter().cloned().fold(0.0f64, f64::max);

    let mut purple = 0usize;
    let mut fringe_sum = 0.0;
    let mut fringe_sq = 0.0;
    for i in 0..img.plane_len() {
        let rgb = [img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]];
        let hsv = rgb_to_hsv_px(rgb);
        let hue_deg = hsv[0] * 360.0;
        if (250.0..=330.0).contains(&hue_deg) && hsv[1] > 0.25 {
            purple += 1;
        }
        let f = rgb[0] + rgb[2] - 2.0 * rgb[1];
        fringe_sum += f;
        fringe_sq += f * f;
    }
    let fringe_mean = fringe_sum / n;
    let fringe_var = (fringe_sq / n - fringe_mean * fringe_mean).max(0.0);

    feats[6] = edge_density;
    feats[7] = purple as f64 / n;
    feats[8] = mean_mag;
    feats[9] = max_mag;
    feats[10] = fringe_mean;
    feats[11] = fringe_var.sqrt();
    Ok(feats)
}

/// Two-layer perceptron predicting a bounded residual on the base matrix:
/// `M = M0 + 0.5 * tanh(W2 * tanh(W1 * normalize(f) + b1) + b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CasPredictor {
    pub feat_mean: [f64; FEATURE_COUNT],
    pub feat_std: [f64; FEATURE_COUNT],
    /// Hidden layer, `[hidden][input]`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Output layer, `[9][hidden]`.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub base: Mat3,
}

/// Fixed normalization constants for the 12 features. Chosen a priori to
/// bring typical photographic statistics to roughly unit scale; serialized
/// with the model so inference always matches training.
pub const FEATURE_MEAN: [f64; FEATURE_COUNT] = [
    0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.1, 0.02, 0.1, 1.0, 0.0, 0.2,
];
pub const FEATURE_STD: [f64; FEATURE_COUNT] = [
    0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.2, 0.1, 0.2, 1.0, 0.3, 0.2,
];

impl CasPredictor {
    /// Zero-weight predictor: `M == M0` for every image.
    pub fn zeroed() -> Self {
        CasPredictor {
            feat_mean: FEATURE_MEAN,
            feat_std: FEATURE_STD,
            w1: vec![0.0; HIDDEN_WIDTH * FEATURE_COUNT],
            b1: vec![0.0; HIDDEN_WIDTH],
            w2: vec![0.0; 9 * HIDDEN_WIDTH],
            b2: vec![0.0; 9],
            base: base_matrix(),
        }
    }

    /// Small random initialization so that feature gradients can flow from
    /// the first training step. `scale` bounds the uniform weight range.
    pub fn random_init(seed: u64, scale: f64) -> Self {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeroed();
        for w in p.w1.iter_mut().chain(p.w2.iter_mut()) {
            *w = rng.random_range(-scale..scale);
        }
        p
    }

    pub fn normalize_features(&self, feats: &[f64; FEATURE_COUNT]) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            out[i] = (feats[i] - self.feat_mean[i]) / self.feat_std[i];
        }
        out
    }

    /// Forward pass returning the intermediate activations needed by the
    /// training backward pass.
    pub fn forward(&self, feats: &[f64; FEATURE_COUNT]) -> PredictorForward {
        let normed = self.normalize_features(feats);
        let mut hidden = vec![0.0; HIDDEN_WIDTH];
        for (j, h) in hidden.iter_mut().enumerate() {
            let mut z = self.b1[j];
            for (i, f) in normed.iter().enumerate() {
                z += self.w1[j * FEATURE_COUNT + i] * f;
            }
            *h = z.tanh();
        }
        let mut raw = [0.0; 9];
        for (k, r) in raw.iter_mut().enumerate() {
            let mut z = self.b2[k];
            for (j, h) in hidden.iter().enumerate() {
                z += self.w2[k * HIDDEN_WIDTH + j] * h;
            }
            *r = z;
        }
        let mut m = self.base.0;
        for k in 0..9 {
            m[k / 3][k % 3] += 0.5 * raw[k].tanh();
        }
        PredictorForward {
            normed,
            hidden,
            raw,
            matrix: Mat3(m),
        }
    }
}

/// Intermediate state of a predictor forward pass.
#[derive(Debug, Clone)]
pub struct PredictorForward {
    pub normed: [f64; FEATURE_COUNT],
    pub hidden: Vec<f64>,
    pub raw: [f64; 9],
    pub matrix: Mat3,
}

/// Predicts the transform matrix for a feature vector.
pub fn predict_matrix(pred: &CasPredictor, feats: &[f64; FEATURE_COUNT]) -> Mat3 {
    pred.forward(feats).matrix
}

/// Per-pixel `M * rgb`: luminance, fringe, orthogonal planes.
pub fn forward_transform(img: &ImageBuf, m: &Mat3) -> Result<CasImage> {
    img.expect_rgb()?;
    let n = img.plane_len();
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut lum = Vec::with_capacity(n);
    let mut fringe = Vec::with_capacity(n);
    let mut ortho = Vec::with_capacity(n);
    for i in 0..n {
        let v = m.mul_vec([r[i], g[i], b[i]]);
        lum.push(v[0]);
        fringe.push(v[1]);
        ortho.push(v[2]);
    }
    Ok(CasImage {
        lum: GrayBuf::from_vec(img.width(), img.height(), lum)?,
        fringe: GrayBuf::from_vec(img.width(), img.height(), fringe)?,
        ortho: GrayBuf::from_vec(img.width(), img.height(), ortho)?,
        matrix: *m,
    })
}

/// Per-pixel `M^-1 * (lum, fringe, ortho)`, clamped to `[0, 1]` for image
/// emission. Training evaluates losses on the unclamped planes instead.
pub fn inverse_transform(cas: &CasImage) -> Result<ImageBuf> {
    let inv = cas.matrix.inverse()?;
    let n = cas.lum.data().len();
    let mut data = vec![0.0; 3 * n];
    for i in 0..n {
        let v = inv.mul_vec([cas.lum.data()[i], cas.fringe.data()[i], cas.ortho.data()[i]]);
        data[i] = v[0];
        data[n + i] = v[1];
        data[2 * n + i] = v[2];
    }
    ImageBuf::from_planes(cas.width(), cas.height(), 3, data)
}

/// Mean over the batch of the squared pairwise row dot products, summed over
/// all six ordered pairs, with its analytic gradient per matrix:
/// `d/dr_i = (4/B) * sum_{j != i} (r_i . r_j) r_j`.
pub fn axis_alignment_loss(mats: &[Mat3]) -> (f64, Vec<Mat3>) {
    assert!(!mats.is_empty(), "alignment loss needs at least one matrix");
    let batch = mats.len() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(mats.len());
    for m in mats {
        let mut grad = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let ri = m.row(i);
                let rj = m.row(j);
                let dot = ri[0] * rj[0] + ri[1] * rj[1] + ri[2] * rj[2];
                loss += dot * dot / batch;
                // Ordered pair (i, j) contributes 2*dot*rj to row i and
                // 2*dot*ri to row j; the (j, i) iteration adds the mirror.
                for c in 0..3 {
                    grad[i][c] += 2.0 * dot * rj[c] / batch;
                    grad[j][c] += 2.0 * dot * ri[c] / batch;
                }
            }
        }
        grads.push(Mat3(grad));
    }
    (loss, grads)
}
