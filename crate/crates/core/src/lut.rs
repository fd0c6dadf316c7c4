//! Trainable 1D and 5D lookup tables with multilinear interpolation,
//! analytic gradients, and smoothness regularization.
//!
//! The 5D table corrects the luminance channel. Its coordinates fuse an
//! L-shaped spatial stencil (center, left, top luminance) with the fringe
//! channel's horizontal and vertical gradients, so the table can react to
//! the direction and magnitude of a fringe instead of color alone. The 1D
//! table is a learned tone curve on the fringe channel itself.
//!
//! Both tables are identity-initialized: a fresh model is a no-op, and
//! training can only move away from "do nothing".

use crate::cas::CasImage;
use crate::imgcore::GrayBuf;

/// Default 1D table size.
pub const LUT1D_SIZE: usize = 1024;
/// Default 5D resolution per axis (9^5 = 59049 entries).
pub const LUT5D_RES: usize = 9;
/// Corners of a 5D cell.
pub const CORNERS: usize = 32;

/// Coordinate normalization: how raw CAS values map into `[0, 1]` lookup
/// coordinates. Serialized with the model so inference matches training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordNorm {
    /// Luminance range mapped onto [0, 1].
    pub lum_lo: f64,
    pub lum_hi: f64,
    /// Fringe-gradient half-range; a gradient of 0 maps to coordinate 0.5.
    pub g_max: f64,
}

impl Default for CoordNorm {
    fn default() -> Self {
        CoordNorm {
            lum_lo: 0.0,
            lum_hi: 1.0,
            g_max: 1.0,
        }
    }
}

/// Learnable 1D lookup table over a fixed input domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut1D {
    pub entries: Vec<f64>,
    /// Input (and output) domain; values are clamped into it before lookup.
    pub domain: (f64, f64),
}

impl Lut1D {
    /// Identity table: entry k = k/(n-1), so lookup(x) == x on the domain.
    pub fn identity(size: usize, domain: (f64, f64)) -> Self {
        assert!(size >= 2);
        let entries = (0..size).map(|k| k as f64 / (size - 1) as f64).collect();
        Lut1D { entries, domain }
    }

    pub fn identity_default() -> Self {
        Self::identity(LUT1D_SIZE, (-1.0, 1.0))
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    fn locate(&self, x: f64) -> (usize, f64, bool) {
        let (lo, hi) = self.domain;
        let t_raw = (x - lo) / (hi - lo);
        let clamped = !(0.0..=1.0).contains(&t_raw);
        let t = t_raw.clamp(0.0, 1.0);
        let pos = t * (self.size() - 1) as f64;
        let k = (pos.floor() as usize).min(self.size() - 2);
        (k, pos - k as f64, clamped)
    }

    /// Linear interpolation between the two bracketing entries; exact at
    /// grid nodes. Input is clamped to the domain.
    pub fn lookup(&self, x: f64) -> f64 {
        let (k, frac, _) = self.locate(x);
        let norm = self.entries[k] * (1.0 - frac) + self.entries[k + 1] * frac;
        self.domain.0 + norm * (self.domain.1 - self.domain.0)
    }

    pub fn lookup_plane(&self, plane: &GrayBuf) -> GrayBuf {
        GrayBuf::from_vec(
            plane.width(),
            plane.height(),
            plane.data().iter().map(|&v| self.lookup(v)).collect(),
        )
        .expect("same dims")
    }

    /// Gradients of `upstream * lookup(x)`: two (index, weight) entry
    /// gradients plus the gradient with respect to `x` (zero when the input
    /// was clamped to the domain edge).
    pub fn lookup_backward(&self, x: f64, upstream: f64) -> ([(usize, f64); 2], f64) {
        let (k, frac, clamped) = self.locate(x);
        let span = self.domain.1 - self.domain.0;
        let entry_grads = [
            (k, upstream * (1.0 - frac) * span),
            (k + 1, upstream * frac * span),
        ];
        let x_grad = if clamped {
            0.0
        } else {
            // d lookup / dx = (e[k+1]-e[k]) * (n-1) * span / span.
            upstream * (self.entries[k + 1] - self.entries[k]) * (self.size() - 1) as f64
        };
        (entry_grads, x_grad)
    }
}

/// Learnable dense 5D lookup table on a uniform grid over `[0, 1]^5`,
/// axis-0-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut5D {
    pub res: usize,
    pub entries: Vec<f64>,
    /// Per-dimension source ranges, recorded for serialization; lookup
    /// coordinates are already normalized to [0, 1].
    pub domains: [(f64, f64); 5],
}

impl Lut5D {
    /// Identity table: entry at (i0..i4) = i0/(res-1), a pass-through of the
    /// first (center-luminance) coordinate.
    pub fn identity(res: usize) -> Self {
        assert!(res >= 2);
        let n = res.pow(5);
        let mut entries = vec![0.0; n];
        let stride0 = res.pow(4);
        for (idx, e) in entries.iter_mut().enumerate() {
            let i0 = idx / stride0;
            *e = i0 as f64 / (res - 1) as f64;
        }
        Lut5D {
            res,
            entries,
            domains: [(0.0, 1.0); 5],
        }
    }

    pub fn identity_default() -> Self {
        Self::identity(LUT5D_RES)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Flat index of grid node (i0..i4).
    pub fn node_index(&self, idx: [usize; 5]) -> usize {
        let r = self.res;
        (((idx[0] * r + idx[1]) * r + idx[2]) * r + idx[3]) * r + idx[4]
    }

    fn locate(&self, coords: [f64; 5]) -> ([usize; 5], [f64; 5], [bool; 5]) {
        let mut base = [0usize; 5];
        let mut frac = [0.0; 5];
        let mut clamped = [false; 5];
        for d in 0..5 {
            clamped[d] = !(0.0..=1.0).contains(&coords[d]);
            let c = coords[d].clamp(0.0, 1.0);
            let pos = c * (self.res - 1) as f64;
            let k = (pos.floor() as usize).min(self.res - 2);
            base[d] = k;
            frac[d] = pos - k as f64;
        }
        (base, frac, clamped)
    }

    /// Multilinear interpolation over the 32 corners of the containing cell;
    /// exact at grid nodes. Coordinates are clamped to `[0, 1]`.
    pub fn lookup(&self, coords: [f64; 5]) -> f64 {
        let (base, frac, _) = self.locate(coords);
        let mut acc = 0.0;
        for corner in 0..CORNERS {
            let mut w = 1.0;
            let mut idx = [0usize; 5];
            for d in 0..5 {
                if corner >> d & 1 == 1 {
                    w *= frac[d];
                    idx[d] = base[d] + 1;
                } else {
                    w *= 1.0 - frac[d];
                    idx[d] = base[d];
                }
            }
            acc += w * self.entries[self.node_index(idx)];
        }
        acc
    }

    /// Sparse gradients of `upstream * lookup(coords)`: the 32 corner
    /// (index, weight) pairs plus the gradient with respect to each
    /// coordinate. Coordinate gradients are zero where the input clamped.
    pub fn lookup_backward(
        &self,
        coords: [f64; 5],
        upstream: f64,
    ) -> (Vec<(usize, f64)>, [f64; 5]) {
        let (base, frac, clamped) = self.locate(coords);
        let mut entry_grads = Vec::with_capacity(CORNERS);
        let mut coord_grads = [0.0; 5];
        let scale = (self.res - 1) as f64;
        for corner in 0..CORNERS {
            let mut w = 1.0;
            let mut idx = [0usize; 5];
            for d in 0..5 {
                if corner >> d & 1 == 1 {
                    w *= frac[d];
                    idx[d] = base[d] + 1;
                } else {
                    w *= 1.0 - frac[d];
                    idx[d] = base[d];
                }
            }
            let flat = self.node_index(idx);
            entry_grads.push((flat, upstream * w));

            // d lookup / d coord_k replaces axis k's weight with +/-1 times
            // the product of the remaining weights, scaled by (res-1).
            let e = self.entries[flat];
            for k in 0..5 {
                if clamped[k] {
                    continue;
                }
                let mut wk = 1.0;
                for d in 0..5 {
                    if d == k {
                        continue;
                    }
                    wk *= if corner >> d & 1 == 1 {
                        frac[d]
                    } else {
                        1.0 - frac[d]
                    };
                }
                let sign = if corner >> k & 1 == 1 { 1.0 } else { -1.0 };
                coord_grads[k] += upstream * sign * wk * e * scale;
            }
        }
        (entry_grads, coord_grads)
    }
}

/// Five normalized `[0, 1]` coordinate planes feeding the 5D table:
/// center/left/top luminance and the fringe channel's x/y gradients.
#[derive(Debug, Clone)]
pub struct LutCoords {
    pub planes: [GrayBuf; 5],
}

impl LutCoords {
    pub fn at(&self, x: usize, y: usize) -> [f64; 5] {
        [
            self.planes[0].get(x, y),
            self.planes[1].get(x, y),
            self.planes[2].get(x, y),
            self.planes[3].get(x, y),
            self.planes[4].get(x, y),
        ]
    }
}

/// Raw (pre-clamp) coordinates for one pixel. Left/top use replicate
/// borders; gradients are central differences with replicate borders, so a
/// zero gradient lands exactly on coordinate 0.5.
#[inline]
pub(crate) fn raw_coords_at(
    lum: &GrayBuf,
    fringe: &GrayBuf,
    norm: &CoordNorm,
    x: usize,
    y: usize,
) -> [f64; 5] {
    let (xi, yi) = (x as isize, y as isize);
    let rng = norm.lum_hi - norm.lum_lo;
    let gx = (fringe.get_clamped(xi + 1, yi) - fringe.get_clamped(xi - 1, yi)) / 2.0;
    let gy = (fringe.get_clamped(xi, yi + 1) - fringe.get_clamped(xi, yi - 1)) / 2.0;
    [
        (lum.get(x, y) - norm.lum_lo) / rng,
        (lum.get_clamped(xi - 1, yi) - norm.lum_lo) / rng,
        (lum.get_clamped(xi, yi - 1) - norm.lum_lo) / rng,
        0.5 + gx / (2.0 * norm.g_max),
        0.5 + gy / (2.0 * norm.g_max),
    ]
}

/// Builds the five clamped coordinate planes for a CAS image.
pub fn build_coords(cas: &CasImage, norm: &CoordNorm) -> LutCoords {
    let (w, h) = (cas.width(), cas.height());
    let mut planes: [GrayBuf; 5] = std::array::from_fn(|_| GrayBuf::zeros(w, h));
    for y in 0..h {
        for x in 0..w {
            let raw = raw_coords_at(&cas.lum, &cas.fringe, norm, x, y);
            for (d, plane) in planes.iter_mut().enumerate() {
                plane.set(x, y, raw[d].clamp(0.0, 1.0));
            }
        }
    }
    LutCoords { planes }
}

/// Smoothness penalty: squared second differences of the 1D table plus
/// squared first differences along every axis of the 5D table, with
/// analytic gradients. Zero exactly when the 1D table is affine and the 5D
/// table is constant along every axis.
pub fn smoothness_loss(lut1: &Lut1D, lut5: &Lut5D) -> (f64, Vec<f64>, Vec<f64>) {
    let mut loss = 0.0;
    let mut g1 = vec![0.0; lut1.size()];
    let e = &lut1.entries;
    for k in 1..lut1.size() - 1 {
        let d2 = e[k + 1] - 2.0 * e[k] + e[k - 1];
        loss += d2 * d2;
        g1[k + 1] += 2.0 * d2;
        g1[k] -= 4.0 * d2;
        g1[k - 1] += 2.0 * d2;
    }

    let mut g5 = vec![0.0; lut5.len()];
    let r = lut5.res;
    let strides = [r.pow(4), r.pow(3), r.pow(2), r, 1];
    for (axis, &stride) in strides.iter().enumerate() {
        for flat in 0..lut5.len() {
            // Position along this axis.
            let pos = flat / stride % r;
            if pos + 1 >= r {
                continue;
            }
            let d = lut5.entries[flat + stride] - lut5.entries[flat];
            loss += d * d;
            g5[flat + stride] += 2.0 * d;
            g5[flat] -= 2.0 * d;
        }
        let _ = axis;
    }
    (loss, g1, g5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cas::Mat3;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_lut5(seed: u64, res: usize) -> Lut5D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lut = Lut5D::identity(res);
        for e in &mut lut.entries {
            *e = rng.random();
        }
        lut
    }

    #[test]
    fn lut1d_identity_lookup() {
        let lut = Lut1D::identity_default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: f64 = rng.random_range(-1.0..1.0);
            assert!((lut.lookup(x) - x).abs() < 1e-6);
        }
        assert!((lut.lookup(0.37) - 0.37).abs() < 1e-6);
    }

    #[test]
    fn lut1d_exact_at_nodes() {
        let mut lut = Lut1D::identity(16, (0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for e in &mut lut.entries {
            *e = rng.random();
        }
        for k in 0..16 {
            let x = k as f64 / 15.0;
            assert!((lut.lookup(x) - lut.entries[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn lut1d_linear_midpoint() {
        let mut lut = Lut1D::identity(8, (0.0, 1.0));
        lut.entries = vec![0.9, 0.1, 0.4, 0.8, 0.2, 0.6, 0.7, 0.3];
        let x = 3.5 / 7.0;
        let expect = (lut.entries[3] + lut.entries[4]) / 2.0;
        assert!((lut.lookup(x) - expect).abs() < 1e-12);
    }

    #[test]
    fn lut5d_exact_at_nodes() {
        let lut = random_lut5(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let idx: [usize; 5] = std::array::from_fn(|_| rng.random_range(0..4));
            let coords: [f64; 5] = std::array::from_fn(|d| idx[d] as f64 / 3.0);
            let expect = lut.entries[lut.node_index(idx)];
            assert!((lut.lookup(coords) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn lut5d_identity_passes_axis0() {
        let lut = Lut5D::identity_default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let coords: [f64; 5] = std::array::from_fn(|_| rng.random());
            assert!((lut.lookup(coords) - coords[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn lut5d_matches_recursive_oracle() {
        // Axis-by-axis sequential lerp as an independent formulation.
        fn recursive(lut: &Lut5D, coords: [f64; 5]) -> f64 {
            let r = lut.res;
            let mut base = [0usize; 5];
            let mut frac = [0.0; 5];
            for d in 0..5 {
                let pos = coords[d].clamp(0.0, 1.0) * (r - 1) as f64;
                base[d] = (pos.floor() as usize).min(r - 2);
                frac[d] = pos - base[d] as f64;
            }
            let mut vals = [0.0f64; 32];
            for (c, v) in vals.iter_mut().enumerate() {
                let idx: [usize; 5] =
                    std::array::from_fn(|d| base[d] + (c >> d & 1));
                *v = lut.entries[lut.node_index(idx)];
            }
            let mut len = 32;
            for d in (0..5).rev() {
                len /= 2;
                for i in 0..len {
                    let lo = vals[i];
                    let hi = vals[i + len];
                    vals[i] = lo + (hi - lo) * frac[d];
                }
            }
            vals[0]
        }

        let lut = random_lut5(6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let coords: [f64; 5] = std::array::from_fn(|_| rng.random());
            let got = lut.lookup(coords);
            let expect = recursive(&lut, coords);
            assert!((got - expect).abs() < 1e-7, "{got} vs {expect}");
        }
    }

    #[test]
    fn lut5d_output_bounded_by_corners() {
        let lut = random_lut5(8, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let coords: [f64; 5] = std::array::from_fn(|_| rng.random());
            let (entry_grads, _) = lut.lookup_backward(coords, 1.0);
            let vals: Vec<f64> = entry_grads.iter().map(|&(i, _)| lut.entries[i]).collect();
            let out = lut.lookup(coords);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(out >= lo - 1e-12 && out <= hi + 1e-12);
        }
    }

    #[test]
    fn backward_at_node_concentrates_on_one_entry() {
        let lut = random_lut5(10, 4);
        let coords = [1.0 / 3.0, 2.0 / 3.0, 0.0, 1.0, 1.0 / 3.0];
        let (grads, _) = lut.lookup_backward(coords, 1.0);
        let nonzero: Vec<_> = grads.iter().filter(|&&(_, w)| w.abs() > 1e-12).collect();
        assert_eq!(nonzero.len(), 1);
        assert!((nonzero[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_weights_partition_unity() {
        let lut = random_lut5(11, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let coords: [f64; 5] = std::array::from_fn(|_| rng.random());
            let (grads, _) = lut.lookup_backward(coords, 1.0);
            let sum: f64 = grads.iter().map(|&(_, w)| w).sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let lut = random_lut5(13, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let eps = 1e-4;
        for _ in 0..20 {
            // Sample strictly inside a cell, away from boundaries.
            let coords: [f64; 5] = std::array::from_fn(|_| {
                let cell = rng.random_range(0..4) as f64;
                (cell + rng.random_range(0.2..0.8)) / 4.0
            });
            let (entry_grads, coord_grads) = lut.lookup_backward(coords, 1.0);

            // Entry gradients.
            let mut lut_mut = lut.clone();
            for &(idx, g) in entry_grads.iter() {
                let orig = lut_mut.entries[idx];
                lut_mut.entries[idx] = orig + eps;
                let plus = lut_mut.lookup(coords);
                lut_mut.entries[idx] = orig - eps;
                let minus = lut_mut.lookup(coords);
                lut_mut.entries[idx] = orig;
                let fd = (plus - minus) / (2.0 * eps);
                let denom = fd.abs().max(g.abs()).max(1e-6);
                assert!(((fd - g) / denom).abs() < 1e-5, "entry {idx}: {fd} vs {g}");
            }

            // Coordinate gradients.
            for k in 0..5 {
                let mut plus = coords;
                plus[k] += eps;
                let mut minus = coords;
                minus[k] -= eps;
                let fd = (lut.lookup(plus) - lut.lookup(minus)) / (2.0 * eps);
                let denom = fd.abs().max(coord_grads[k].abs()).max(1e-6);
                assert!(
                    ((fd - coord_grads[k]) / denom).abs() < 1e-5,
                    "coord {k}: {fd} vs {}",
                    coord_grads[k]
                );
            }
        }
    }

    #[test]
    fn smoothness_zero_for_constant_tables() {
        let lut1 = Lut1D {
            entries: vec![0.3; 64],
            domain: (0.0, 1.0),
        };
        let mut lut5 = Lut5D::identity(3);
        for e in &mut lut5.entries {
            *e = 0.7;
        }
        let (loss, g1, g5) = smoothness_loss(&lut1, &lut5);
        assert_eq!(loss, 0.0);
        assert!(g1.iter().all(|&v| v == 0.0));
        assert!(g5.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn smoothness_1d_term_zero_for_affine_entries() {
        let lut1 = Lut1D::identity_default();
        let mut lut5 = Lut5D::identity(3);
        for e in &mut lut5.entries {
            *e = 0.0;
        }
        let (loss, _, _) = smoothness_loss(&lut1, &lut5);
        assert!(loss.abs() < 1e-18);
    }

    #[test]
    fn smoothness_identity_5d_closed_form() {
        // Identity 5D table: only axis-0 differences (1/(res-1) each), of
        // which there are (res-1)*res^4. For res 9: 8*9^4/64 = 820.125.
        let lut1 = Lut1D {
            entries: vec![0.0; 8],
            domain: (0.0, 1.0),
        };
        let lut5 = Lut5D::identity_default();
        let (loss, _, _) = smoothness_loss(&lut1, &lut5);
        assert!((loss - 820.125).abs() < 1e-9, "loss = {loss}");
    }

    #[test]
    fn smoothness_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut lut1 = Lut1D::identity(32, (-1.0, 1.0));
        for e in &mut lut1.entries {
            *e = rng.random();
        }
        let mut lut5 = random_lut5(16, 3);
        let (_, g1, g5) = smoothness_loss(&lut1, &lut5);
        let eps = 1e-5;
        for k in (0..32).step_by(5) {
            let orig = lut1.entries[k];
            lut1.entries[k] = orig + eps;
            let (lp, _, _) = smoothness_loss(&lut1, &lut5);
            lut1.entries[k] = orig - eps;
            let (lm, _, _) = smoothness_loss(&lut1, &lut5);
            lut1.entries[k] = orig;
            let fd = (lp - lm) / (2.0 * eps);
            let denom = fd.abs().max(g1[k].abs()).max(1e-6);
            assert!(((fd - g1[k]) / denom).abs() < 1e-5);
        }
        for k in (0..lut5.len()).step_by(37) {
            let orig = lut5.entries[k];
            lut5.entries[k] = orig + eps;
            let (lp, _, _) = smoothness_loss(&lut1, &lut5);
            lut5.entries[k] = orig - eps;
            let (lm, _, _) = smoothness_loss(&lut1, &lut5);
            lut5.entries[k] = orig;
            let fd = (lp - lm) / (2.0 * eps);
            let denom = fd.abs().max(g5[k].abs()).max(1e-6);
            assert!(((fd - g5[k]) / denom).abs() < 1e-5);
        }
    }

    #[test]
    fn coords_constant_fringe_gives_half() {
        let img = crate::imgcore::ImageBuf::from_fn_rgb(6, 5, |x, y| {
            [((x + y) % 3) as f64 * 0.3, 0.5, 0.2]
        });
        let cas = crate::cas::forward_transform(&img, &Mat3::identity()).unwrap();
        // fringe plane = green plane = constant 0.5.
        let coords = build_coords(&cas, &CoordNorm::default());
        for &v in coords.planes[3].data() {
            assert_eq!(v, 0.5);
        }
        for &v in coords.planes[4].data() {
            assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn coords_left_replicates_at_column_zero() {
        let img = crate::imgcore::ImageBuf::from_fn_rgb(5, 4, |x, y| {
            [(x as f64) / 5.0, (y as f64) / 4.0, 0.1]
        });
        let cas = crate::cas::forward_transform(&img, &Mat3::identity()).unwrap();
        let coords = build_coords(&cas, &CoordNorm::default());
        for y in 0..4 {
            assert_eq!(coords.planes[1].get(0, y), coords.planes[0].get(0, y));
            assert_eq!(coords.planes[2].get(0, 0), coords.planes[0].get(0, 0));
        }
    }

    #[test]
    fn coords_ramp_gradient_constant_in_interior() {
        // Fringe = green channel rising by s per pixel along x.
        let s = 0.04;
        let img = crate::imgcore::ImageBuf::from_fn_rgb(8, 6, |x, _| {
            [0.2, s * x as f64, 0.3]
        });
        let cas = crate::cas::forward_transform(&img, &Mat3::identity()).unwrap();
        let norm = CoordNorm::default();
        let coords = build_coords(&cas, &norm);
        let expect = 0.5 + s / (2.0 * norm.g_max);
        for y in 0..6 {
            for x in 1..7 {
                assert!((coords.planes[3].get(x, y) - expect).abs() < 1e-12);
                assert_eq!(coords.planes[4].get(x, y), 0.5);
            }
        }
    }
}
