//! Composite loss and the hand-written backward pass.
//!
//! The reconstruction objective combines a pixel L1 term with a perceptual
//! term in YCbCr: a parameter-free structural proxy on luma (L1 between
//! Sobel-magnitude maps plus a low-resolution L1) and direct L1 on the
//! chroma planes. Regularizers are LUT smoothness and matrix axis
//! alignment. The backward pass chains analytically through the inverse
//! transform, both LUT lookups, coordinate construction, the forward
//! transform, and the matrix predictor.

use super::{forward_train, Model, TrainForward};
use crate::cas::{axis_alignment_loss, CasPredictor, Mat3, PredictorForward, FEATURE_COUNT, HIDDEN_WIDTH};
use crate::error::{Error, Result};
use crate::imgcore::color::{ycbcr_planes, YCBCR_FORWARD};
use crate::imgcore::{GrayBuf, ImageBuf};
use crate::lut::smoothness_loss;
use serde::{Deserialize, Serialize};

/// Keeps the Sobel-magnitude map differentiable at zero gradient.
const MAG_EPS: f64 = 1e-12;
/// Weight of the low-resolution luma term inside the structural loss.
const DOWNSAMPLE_WEIGHT: f64 = 0.1;

/// Per-term values of one loss evaluation. `total` is exactly the weighted
/// sum `l1*w.l1 + (perceptual_y + chroma*w.chroma)*w.p + smooth*w.smooth +
/// align*w.align`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l1: f64,
    pub perceptual_y: f64,
    pub chroma: f64,
    pub smooth: f64,
    pub align: f64,
    pub total: f64,
}

/// Gradients for every trainable parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub lut5: Vec<f64>,
    pub lut1: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(model: &Model) -> Self {
        ParamGrads {
            w1: vec![0.0; model.predictor.w1.len()],
            b1: vec![0.0; model.predictor.b1.len()],
            w2: vec![0.0; model.predictor.w2.len()],
            b2: vec![0.0; model.predictor.b2.len()],
            lut5: vec![0.0; model.lut5.len()],
            lut1: vec![0.0; model.lut1.size()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .chain(&self.lut5)
            .chain(&self.lut1)
            .all(|v| v.is_finite())
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// 3x3 convolution with replicate border on a raw plane.
fn conv3(src: &[f64], w: usize, h: usize, k: &[[f64; 3]; 3]) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for (ky, row) in k.iter().enumerate() {
                let sy = (y + ky as isize - 1).clamp(0, h as isize - 1) as usize;
                for (kx, &kv) in row.iter().enumerate() {
                    let sx = (x + kx as isize - 1).clamp(0, w as isize - 1) as usize;
                    acc += kv * src[sy * w + sx];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

/// Exact adjoint of [`conv3`]: scatters each output gradient back through
/// the same clamped source indices.
fn conv3_adjoint(gout: &[f64], w: usize, h: usize, k: &[[f64; 3]; 3]) -> Vec<f64> {
    let mut gin = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let g = gout[y as usize * w + x as usize];
            if g == 0.0 {
                continue;
            }
            for (ky, row) in k.iter().enumerate() {
                let sy = (y + ky as isize - 1).clamp(0, h as isize - 1) as usize;
                for (kx, &kv) in row.iter().enumerate() {
                    let sx = (x + kx as isize - 1).clamp(0, w as isize - 1) as usize;
                    gin[sy * w + sx] += kv * g;
                }
            }
        }
    }
    gin
}

/// 2x box downsample with ragged edge blocks averaged over their actual
/// size. Returns (blocks, block width, block height).
fn box_down2(src: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let bw = w.div_ceil(2);
    let bh = h.div_ceil(2);
    let mut out = vec![0.0; bw * bh];
    for by in 0..bh {
        for bx in 0..bw {
            let x1 = (2 * bx + 2).min(w);
            let y1 = (2 * by + 2).min(h);
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for y in 2 * by..y1 {
                for x in 2 * bx..x1 {
                    acc += src[y * w + x];
                    cnt += 1.0;
                }
            }
            out[by * bw + bx] = acc / cnt;
        }
    }
    (out, bw, bh)
}

fn structural_perceptual_planes(
    y_out: &[f64],
    y_gt: &[f64],
    w: usize,
    h: usize,
) -> (f64, Vec<f64>) {
    let n = (w * h) as f64;

    // Sobel-magnitude term.
    let gx_o = conv3(y_out, w, h, &SOBEL_X);
    let gy_o = conv3(y_out, w, h, &SOBEL_Y);
    let gx_g = conv3(y_gt, w, h, &SOBEL_X);
    let gy_g = conv3(y_gt, w, h, &SOBEL_Y);

    let mut term1 = 0.0;
    let mut ax = vec![0.0; w * h];
    let mut ay = vec![0.0; w * h];
    for i in 0..w * h {
        let mo = (gx_o[i] * gx_o[i] + gy_o[i] * gy_o[i] + MAG_EPS).sqrt();
        let mg = (gx_g[i] * gx_g[i] + gy_g[i] * gy_g[i] + MAG_EPS).sqrt();
        let d = mo - mg;
        term1 += d.abs() / n;
        let e = sgn(d) / n;
        ax[i] = e * gx_o[i] / mo;
        ay[i] = e * gy_o[i] / mo;
    }
    let mut grad = conv3_adjoint(&ax, w, h, &SOBEL_X);
    let gy_part = conv3_adjoint(&ay, w, h, &SOBEL_Y);
    for (g, gy) in grad.iter_mut().zip(&gy_part) {
        *g += gy;
    }

    // Low-resolution luma term.
    let (do_, bw, bh) = box_down2(y_out, w, h);
    let (dg, _, _) = box_down2(y_gt, w, h);
    let nb = (bw * bh) as f64;
    let mut term2 = 0.0;
    for by in 0..bh {
        for bx in 0..bw {
            let d = do_[by * bw + bx] - dg[by * bw + bx];
            term2 += d.abs() / nb;
            let x1 = (2 * bx + 2).min(w);
            let y1 = (2 * by + 2).min(h);
            let cnt = ((x1 - 2 * bx) * (y1 - 2 * by)) as f64;
            let s = DOWNSAMPLE_WEIGHT * sgn(d) / (nb * cnt);
            for y in 2 * by..y1 {
                for x in 2 * bx..x1 {
                    grad[y * w + x] += s;
                }
            }
        }
    }

    (term1 + DOWNSAMPLE_WEIGHT * term2, grad)
}

/// Structural proxy loss between two luma planes: L1 between their
/// Sobel-magnitude maps plus 0.1 times L1 between their 2x box-downsampled
/// versions. Returns the value and its gradient with respect to the first
/// plane.
pub fn structural_perceptual_y(y_out: &GrayBuf, y_gt: &GrayBuf) -> Result<(f64, GrayBuf)> {
    if !y_out.same_dims(y_gt) {
        return Err(Error::DimensionMismatch(
            y_out.width(),
            y_out.height(),
            y_gt.width(),
            y_gt.height(),
        ));
    }
    let (v, g) = structural_perceptual_planes(
        y_out.data(),
        y_gt.data(),
        y_out.width(),
        y_out.height(),
    );
    Ok((v, GrayBuf::from_vec(y_out.width(), y_out.height(), g)?))
}

/// Reconstruction backward for one sample. Scatters loss-weighted LUT
/// gradients into `grads` (scaled by `sample_weight`) and returns the raw
/// per-term values plus the loss-weighted gradient with respect to the
/// sample's matrix (unscaled).
#[allow(clippy::too_many_arguments)]
fn backward_sample(
    model: &Model,
    fwd: &TrainForward,
    input: &ImageBuf,
    gt: &ImageBuf,
    grads: &mut ParamGrads,
    sample_weight: f64,
) -> Result<(f64, f64, f64, Mat3)> {
    if !input.same_dims(gt) {
        return Err(Error::DimensionMismatch(
            input.width(),
            input.height(),
            gt.width(),
            gt.height(),
        ));
    }
    let lw = &model.weights;
    let (w, h) = (fwd.width, fwd.height);
    let n = w * h;
    let n3 = (3 * n) as f64;

    // Pixel L1 on the unclamped reconstruction.
    let mut g_out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    let mut l1_val = 0.0;
    for c in 0..3 {
        let gt_plane = gt.plane(c);
        for i in 0..n {
            let d = fwd.out[c][i] - gt_plane[i];
            l1_val += d.abs() / n3;
            g_out[c][i] = lw.l1 * sgn(d) / n3;
        }
    }

    // YCbCr: structural proxy on Y, direct L1 on Cb/Cr.
    let [yo, cbo, cro] = ycbcr_planes(&fwd.out[0], &fwd.out[1], &fwd.out[2]);
    let [yg, cbg, crg] = ycbcr_planes(gt.plane(0), gt.plane(1), gt.plane(2));

    let (p_val, gy) = structural_perceptual_planes(&yo, &yg, w, h);

    let nf = n as f64;
    let mut chroma_val = 0.0;
    for i in 0..n {
        let dcb = cbo[i] - cbg[i];
        let dcr = cro[i] - crg[i];
        chroma_val += (dcb.abs() + dcr.abs()) / nf;
        let coef_y = lw.p * gy[i];
        let coef_cb = lw.p * lw.chroma * sgn(dcb) / nf;
        let coef_cr = lw.p * lw.chroma * sgn(dcr) / nf;
        for c in 0..3 {
            g_out[c][i] += coef_y * YCBCR_FORWARD[0][c]
                + coef_cb * YCBCR_FORWARD[1][c]
                + coef_cr * YCBCR_FORWARD[2][c];
        }
    }

    // Inverse-transform stage: out = A * (cp_lum, cp_fringe, ortho),
    // A = M^-1. Gradient to the corrected planes is A^T g_out; gradient to
    // M is -A^T (sum g_out cp^T) A^T.
    let a = fwd.inv;
    let at = a.transpose();
    let mut g_cplum = vec![0.0; n];
    let mut g_cpfringe = vec![0.0; n];
    let mut g_ortho = vec![0.0; n];
    let mut d_a = [[0.0; 3]; 3];
    for i in 0..n {
        let go = [g_out[0][i], g_out[1][i], g_out[2][i]];
        let cp = [fwd.cp_lum[i], fwd.cp_fringe[i], fwd.ortho[i]];
        let gcp = at.mul_vec(go);
        g_cplum[i] = gcp[0];
        g_cpfringe[i] = gcp[1];
        g_ortho[i] = gcp[2];
        for r in 0..3 {
            for c in 0..3 {
                d_a[r][c] += go[r] * cp[c];
            }
        }
    }
    let mut m_grad = at.mul_mat(&Mat3(d_a)).mul_mat(&at).scale(-1.0);

    // 1D LUT stage: corrected fringe.
    let mut g_lum = vec![0.0; n];
    let mut g_fringe = vec![0.0; n];
    for i in 0..n {
        let (entry_grads, x_grad) = model.lut1.lookup_backward(fwd.fringe[i], g_cpfringe[i]);
        for (k, g) in entry_grads {
            grads.lut1[k] += sample_weight * g;
        }
        g_fringe[i] += x_grad;
    }

    // 5D LUT stage: corrected luminance, then scatter coordinate gradients
    // back onto the CAS planes through the L-shaped stencil and the central
    // differences.
    let span = model.norm.lum_hi - model.norm.lum_lo;
    let inv_span = 1.0 / span;
    let c4 = 1.0 / (4.0 * model.norm.g_max);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let raw: [f64; 5] = std::array::from_fn(|d| fwd.coords_raw[d][i]);
            let (entry_grads, coord_grads) =
                model.lut5.lookup_backward(raw, g_cplum[i] * span);
            for (k, g) in entry_grads {
                grads.lut5[k] += sample_weight * g;
            }
            g_lum[i] += coord_grads[0] * inv_span;
            let il = y * w + x.saturating_sub(1);
            g_lum[il] += coord_grads[1] * inv_span;
            let it = y.saturating_sub(1) * w + x;
            g_lum[it] += coord_grads[2] * inv_span;

            let ir = y * w + (x + 1).min(w - 1);
            let ilx = y * w + x.saturating_sub(1);
            g_fringe[ir] += coord_grads[3] * c4;
            g_fringe[ilx] -= coord_grads[3] * c4;
            let id = (y + 1).min(h - 1) * w + x;
            let iu = y.saturating_sub(1) * w + x;
            g_fringe[id] += coord_grads[4] * c4;
            g_fringe[iu] -= coord_grads[4] * c4;
        }
    }

    // Forward-transform stage: cas = M * rgb.
    let (r, g, b) = (input.plane(0), input.plane(1), input.plane(2));
    for i in 0..n {
        let gc = [g_lum[i], g_fringe[i], g_ortho[i]];
        let px = [r[i], g[i], b[i]];
        for (row, &gr) in gc.iter().enumerate() {
            for (col, &pv) in px.iter().enumerate() {
                m_grad.0[row][col] += gr * pv;
            }
        }
    }

    Ok((l1_val, p_val, chroma_val, m_grad))
}

/// Backpropagates a matrix gradient through the predictor MLP.
fn backward_predictor(
    pred: &CasPredictor,
    tape: &PredictorForward,
    m_grad: &Mat3,
    grads: &mut ParamGrads,
    weight: f64,
) {
    let mut g_raw = [0.0; 9];
    for k in 0..9 {
        let t = tape.raw[k].tanh();
        g_raw[k] = m_grad.0[k / 3][k % 3] * 0.5 * (1.0 - t * t);
    }
    let mut g_hidden = vec![0.0; HIDDEN_WIDTH];
    for (k, &gr) in g_raw.iter().enumerate() {
        grads.b2[k] += weight * gr;
        for j in 0..HIDDEN_WIDTH {
            grads.w2[k * HIDDEN_WIDTH + j] += weight * gr * tape.hidden[j];
            g_hidden[j] += pred.w2[k * HIDDEN_WIDTH + j] * gr;
        }
    }
    for (j, &gh) in g_hidden.iter().enumerate() {
        let gz = gh * (1.0 - tape.hidden[j] * tape.hidden[j]);
        grads.b1[j] += weight * gz;
        for i in 0..FEATURE_COUNT {
            grads.w1[j * FEATURE_COUNT + i] += weight * gz * tape.normed[i];
        }
    }
}

/// Loss and full parameter gradients for a batch of (input, ground truth)
/// pairs. Reconstruction terms are averaged over the batch; the alignment
/// loss runs over the batch of predicted matrices; regularizers enter once.
pub fn compute_batch_loss(
    model: &Model,
    batch: &[(&ImageBuf, &ImageBuf)],
) -> Result<(LossBreakdown, ParamGrads)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let lw = &model.weights;
    let bsz = batch.len() as f64;
    let sample_weight = 1.0 / bsz;

    let mut grads = ParamGrads::zeros_like(model);
    let mut forwards = Vec::with_capacity(batch.len());
    let mut mats = Vec::with_capacity(batch.len());
    for (input, _) in batch {
        let fwd = forward_train(model, input)?;
        mats.push(fwd.tape.matrix);
        forwards.push(fwd);
    }
    let (align_val, align_grads) = axis_alignment_loss(&mats);

    let (mut l1, mut perceptual, mut chroma) = (0.0, 0.0, 0.0);
    for (idx, (input, gt)) in batch.iter().enumerate() {
        let (l1_s, p_s, ch_s, m_grad_recon) =
            backward_sample(model, &forwards[idx], input, gt, &mut grads, sample_weight)?;
        l1 += l1_s / bsz;
        perceptual += p_s / bsz;
        chroma += ch_s / bsz;

        // Total matrix gradient: batch-averaged reconstruction part plus
        // this sample's share of the alignment loss.
        let mut m_total = m_grad_recon.scale(sample_weight);
        for r in 0..3 {
            for c in 0..3 {
                m_total.0[r][c] += lw.align * align_grads[idx].0[r][c];
            }
        }
        backward_predictor(&model.predictor, &forwards[idx].tape, &m_total, &mut grads, 1.0);
    }

    let (smooth_val, g1, g5) = smoothness_loss(&model.lut1, &model.lut5);
    for (g, s) in grads.lut1.iter_mut().zip(&g1) {
        *g += lw.smooth * s;
    }
    for (g, s) in grads.lut5.iter_mut().zip(&g5) {
        *g += lw.smooth * s;
    }

    let breakdown = LossBreakdown {
        l1,
        perceptual_y: perceptual,
        chroma,
        smooth: smooth_val,
        align: align_val,
        total: lw.l1 * l1
            + lw.p * (perceptual + lw.chroma * chroma)
            + lw.smooth * smooth_val
            + lw.align * align_val,
    };
    Ok((breakdown, grads))
}

/// Single-pair convenience wrapper around [`compute_batch_loss`].
pub fn compute_loss(
    model: &Model,
    input: &ImageBuf,
    gt: &ImageBuf,
) -> Result<(LossBreakdown, ParamGrads)> {
    compute_batch_loss(model, &[(input, gt)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cas::base_matrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, w: usize, h: usize) -> ImageBuf {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageBuf::from_fn_rgb(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    fn random_gray(seed: u64, w: usize, h: usize) -> GrayBuf {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayBuf::from_fn(w, h, |_, _| rng.random())
    }

    #[test]
    fn structural_zero_for_identical_planes() {
        let y = random_gray(1, 8, 8);
        let (v, g) = structural_perceptual_y(&y, &y).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn structural_constant_shift_closed_form() {
        // Gradient maps agree (shift-invariant), downsample term is
        // 0.1 * 0.1 = 0.01.
        let base = random_gray(2, 10, 10);
        let shifted = GrayBuf::from_vec(
            10,
            10,
            base.data().iter().map(|v| v + 0.1).collect(),
        )
        .unwrap();
        let (v, _) = structural_perceptual_y(&shifted, &base).unwrap();
        assert!((v - 0.01).abs() < 1e-9, "value = {v}");
    }

    #[test]
    fn structural_gradient_matches_finite_differences() {
        let yo = random_gray(3, 8, 8);
        let yg = random_gray(4, 8, 8);
        let (_, grad) = structural_perceptual_y(&yo, &yg).unwrap();
        let eps = 1e-6;
        let mut max_rel: f64 = 0.0;
        for i in 0..64 {
            let mut plus = yo.clone();
            plus.data_mut()[i] += eps;
            let mut minus = yo.clone();
            minus.data_mut()[i] -= eps;
            let (vp, _) = structural_perceptual_y(&plus, &yg).unwrap();
            let (vm, _) = structural_perceptual_y(&minus, &yg).unwrap();
            let fd = (vp - vm) / (2.0 * eps);
            let an = grad.data()[i];
            let denom = fd.abs().max(an.abs()).max(1e-6);
            max_rel = max_rel.max(((fd - an) / denom).abs());
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn loss_terms_vanish_for_perfect_reconstruction() {
        // Orthogonal base (identity), identity LUTs, out == gt.
        let mut model = Model::identity();
        model.predictor.base = Mat3::identity();
        let img = random_image(5, 12, 12);
        let (breakdown, _) = compute_loss(&model, &img, &img).unwrap();
        assert!(breakdown.l1.abs() < 1e-12);
        assert!(breakdown.perceptual_y.abs() < 1e-12);
        assert!(breakdown.chroma.abs() < 1e-12);
        assert!(breakdown.align.abs() < 1e-12);
        // The 5D identity ramp leaves a known smooth term.
        assert!((breakdown.smooth - 820.125).abs() < 1e-9);
        assert!((breakdown.total - model.weights.smooth * 820.125).abs() < 1e-12);
    }

    #[test]
    fn total_is_exactly_the_weighted_sum() {
        let model = Model::init_for_training(7);
        let a = (random_image(8, 10, 9), random_image(9, 10, 9));
        let b = (random_image(10, 10, 9), random_image(11, 10, 9));
        let (bd, _) = compute_batch_loss(&model, &[(&a.0, &a.1), (&b.0, &b.1)]).unwrap();
        let lw = &model.weights;
        let expect = lw.l1 * bd.l1
            + lw.p * (bd.perceptual_y + lw.chroma * bd.chroma)
            + lw.smooth * bd.smooth
            + lw.align * bd.align;
        assert!((bd.total - expect).abs() < 1e-9);
        assert!(bd.l1 >= 0.0 && bd.perceptual_y >= 0.0 && bd.chroma >= 0.0);
        assert!(bd.smooth >= 0.0 && bd.align >= 0.0);
    }

    /// Small end-to-end gradient check; the acceptance suite runs the full
    /// version with every MLP weight and sampled LUT entries.
    #[test]
    fn end_to_end_gradients_match_finite_differences() {
        let mut model = Model::init_for_training(21);
        // Globally multilinear (smooth, non-identity) LUTs keep the loss
        // surface kink-free inside the finite-difference windows.
        let res = model.lut5.res;
        for idx in 0..model.lut5.len() {
            let mut rem = idx;
            let mut c = [0.0f64; 5];
            for d in (0..5).rev() {
                c[d] = (rem % res) as f64 / (res - 1) as f64;
                rem /= res;
            }
            model.lut5.entries[idx] =
                0.85 * c[0] + 0.05 * c[1] - 0.04 * c[2] + 0.06 * c[3] * c[4] + 0.02;
        }
        for (k, e) in model.lut1.entries.iter_mut().enumerate() {
            *e = 0.05 + 0.88 * (k as f64 / 1023.0);
        }

        let input = random_image(30, 8, 8);
        // Ground truth offset per-channel keeps |out - gt| away from the L1
        // kinks for every sample.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let gt = ImageBuf::from_planes(
            8,
            8,
            3,
            input
                .data()
                .iter()
                .map(|v| {
                    let off: f64 = rng.random_range(0.1..0.22);
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (v + sign * off).clamp(0.02, 0.98)
                })
                .collect(),
        )
        .unwrap();

        let (_, grads) = compute_loss(&model, &input, &gt).unwrap();
        let eps = 1e-4;
        let tol = 2e-4;

        // A few weights from each MLP group.
        for idx in [0usize, 5, 57, 100] {
            let orig = model.predictor.w1[idx];
            model.predictor.w1[idx] = orig + eps;
            let (lp, _) = compute_loss(&model, &input, &gt).unwrap();
            model.predictor.w1[idx] = orig - eps;
            let (lm, _) = compute_loss(&model, &input, &gt).unwrap();
            model.predictor.w1[idx] = orig;
            let fd = (lp.total - lm.total) / (2.0 * eps);
            let an = grads.w1[idx];
            let denom = fd.abs().max(an.abs()).max(1e-7);
            assert!(((fd - an) / denom).abs() < tol, "w1[{idx}]: {fd} vs {an}");
        }
        for idx in [0usize, 33, 150] {
            let orig = model.predictor.w2[idx];
            model.predictor.w2[idx] = orig + eps;
            let (lp, _) = compute_loss(&model, &input, &gt).unwrap();
            model.predictor.w2[idx] = orig - eps;
            let (lm, _) = compute_loss(&model, &input, &gt).unwrap();
            model.predictor.w2[idx] = orig;
            let fd = (lp.total - lm.total) / (2.0 * eps);
            let an = grads.w2[idx];
            let denom = fd.abs().max(an.abs()).max(1e-7);
            assert!(((fd - an) / denom).abs() < tol, "w2[{idx}]: {fd} vs {an}");
        }
        for idx in [2usize, 17] {
            let orig = model.predictor.b1[idx];
            model.predictor.b1[idx] = orig + eps;
            let (lp, _) = compute_loss(&model, &input, &gt).unwrap();
            model.predictor.b1[idx] = orig - eps;
            let (lm, _) = compute_loss(&model, &input, &gt).unwrap();
            model.predictor.b1[idx] = orig;
            let fd = (lp.total - lm.total) / (2.0 * eps);
            let an = grads.b1[idx];
            let denom = fd.abs().max(an.abs()).max(1e-7);
            assert!(((fd - an) / denom).abs() < tol, "b1[{idx}]: {fd} vs {an}");
        }

        // Sampled LUT entries: the loss is piecewise linear in each entry,
        // so the check holds whenever no |.| argument flips sign.
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..10 {
            let idx = rng.random_range(0..model.lut5.len());
            let orig = model.lut5.entries[idx];
            model.lut5.entries[idx] = orig + eps;
            let (lp, _) = compute_loss(&model, &input, &gt).unwrap();
            model.lut5.entries[idx] = orig - eps;
            let (lm, _) = compute_loss(&model, &input, &gt).unwrap();
            model.lut5.entries[idx] = orig;
            let fd = (lp.total - lm.total) / (2.0 * eps);
            let an = grads.lut5[idx];
            let denom = fd.abs().max(an.abs()).max(1e-7);
            assert!(((fd - an) / denom).abs() < tol, "lut5[{idx}]: {fd} vs {an}");
        }
        for _ in 0..6 {
            let idx = rng.random_range(0..model.lut1.size());
            let orig = model.lut1.entries[idx];
            model.lut1.entries[idx] = orig + eps;
            let (lp, _) = compute_loss(&model, &input, &gt).unwrap();
            model.lut1.entries[idx] = orig - eps;
            let (lm, _) = compute_loss(&model, &input, &gt).unwrap();
            model.lut1.entries[idx] = orig;
            let fd = (lp.total - lm.total) / (2.0 * eps);
            let an = grads.lut1[idx];
            let denom = fd.abs().max(an.abs()).max(1e-7);
            assert!(((fd - an) / denom).abs() < tol, "lut1[{idx}]: {fd} vs {an}");
        }
    }
}
