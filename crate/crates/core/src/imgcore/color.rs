//! Color-space conversions: grayscale, HSV, full-range BT.601 YCbCr, and
//! CIE L*a*b* (D65).

use super::{GrayBuf, ImageBuf, LUMA_WEIGHTS};
use crate::error::Result;

/// BT.601 luma, clamped to `[0, 1]`.
pub fn to_grayscale(img: &ImageBuf) -> Result<GrayBuf> {
    img.expect_rgb()?;
    let n = img.plane_len();
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let y = LUMA_WEIGHTS[0] * r[i] + LUMA_WEIGHTS[1] * g[i] + LUMA_WEIGHTS[2] * b[i];
        data.push(y.clamp(0.0, 1.0));
    }
    GrayBuf::from_vec(img.width(), img.height(), data)
}

/// Scalar RGB -> HSV. Hue is in `[0, 1)` for `[0°, 360°)`; achromatic pixels
/// get hue 0 and saturation 0 so downstream masks are deterministic.
pub fn rgb_to_hsv_px(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let v = r.max(g).max(b);
    let min = r.min(g).min(b);
    let c = v - min;
    let s = if v > 0.0 { c / v } else { 0.0 };
    let h = if c == 0.0 {
        0.0
    } else {
        let h6 = if v == r {
            ((g - b) / c).rem_euclid(6.0)
        } else if v == g {
            (b - r) / c + 2.0
        } else {
            (r - g) / c + 4.0
        };
        h6 / 6.0
    };
    [h, s, v]
}

/// HSV image; planes are hue, saturation, value.
pub fn rgb_to_hsv(img: &ImageBuf) -> Result<ImageBuf> {
    img.expect_rgb()?;
    let n = img.plane_len();
    let mut data = vec![0.0; 3 * n];
    for i in 0..n {
        let hsv = rgb_to_hsv_px([img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]]);
        data[i] = hsv[0];
        data[n + i] = hsv[1];
        data[2 * n + i] = hsv[2];
    }
    ImageBuf::from_planes(img.width(), img.height(), 3, data)
}

/// Full-range BT.601: Y = 0.299R + 0.587G + 0.114B, chroma offset by 0.5 so
/// every plane lies in `[0, 1]`.
pub const YCBCR_FORWARD: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [-0.168_735_891_647_855_6, -0.331_264_108_352_144_4, 0.5],
    [0.5, -0.418_687_589_158_345_2, -0.081_312_410_841_654_79],
];

/// Inverse of [`YCBCR_FORWARD`].
pub const YCBCR_INVERSE: [[f64; 3]; 3] = [
    [1.0, 0.0, 1.402],
    [1.0, -0.344_136_286_201_022_46, -0.714_136_286_201_022_5],
    [1.0, 1.772, 0.0],
];

/// Linear YCbCr transform on raw planes, without any clamping. The loss path
/// needs this on unclamped reconstructions.
pub(crate) fn ycbcr_planes(r: &[f64], g: &[f64], b: &[f64]) -> [Vec<f64>; 3] {
    let n = r.len();
    let mut y = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    for i in 0..n {
        let m = &YCBCR_FORWARD;
        y.push(m[0][0] * r[i] + m[0][1] * g[i] + m[0][2] * b[i]);
        cb.push(m[1][0] * r[i] + m[1][1] * g[i] + m[1][2] * b[i] + 0.5);
        cr.push(m[2][0] * r[i] + m[2][1] * g[i] + m[2][2] * b[i] + 0.5);
    }
    [y, cb, cr]
}

/// YCbCr image with planes Y, Cb, Cr.
pub fn rgb_to_ycbcr(img: &ImageBuf) -> Result<ImageBuf> {
    img.expect_rgb()?;
    let [y, cb, cr] = ycbcr_planes(img.plane(0), img.plane(1), img.plane(2));
    let mut data = y;
    data.extend_from_slice(&cb);
    data.extend_from_slice(&cr);
    ImageBuf::from_planes(img.width(), img.height(), 3, data)
}

/// Inverse of [`rgb_to_ycbcr`].
pub fn ycbcr_to_rgb(img: &ImageBuf) -> Result<ImageBuf> {
    img.expect_rgb()?;
    let n = img.plane_len();
    let mut data = vec![0.0; 3 * n];
    for i in 0..n {
        let y = img.plane(0)[i];
        let cb = img.plane(1)[i] - 0.5;
        let cr = img.plane(2)[i] - 0.5;
        for (c, row) in YCBCR_INVERSE.iter().enumerate() {
            data[c * n + i] = row[0] * y + row[1] * cb + row[2] * cr;
        }
    }
    ImageBuf::from_planes(img.width(), img.height(), 3, data)
}

// sRGB <-> linear companding.
fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

// D65 reference white in the XYZ scaling used below (Y_n = 1).
const D65: [f64; 3] = [0.95047, 1.0, 1.08883];

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Scalar sRGB -> CIE L*a*b* under D65. L in `[0, 100]`, a/b unbounded.
pub fn rgb_to_lab_px(rgb: [f64; 3]) -> [f64; 3] {
    let rl = srgb_to_linear(rgb[0]);
    let gl = srgb_to_linear(rgb[1]);
    let bl = srgb_to_linear(rgb[2]);
    // sRGB -> XYZ (D65).
    let x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    let y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    let z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
    let fx = lab_f(x / D65[0]);
    let fy = lab_f(y / D65[1]);
    let fz = lab_f(z / D65[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Per-pixel L*a*b* planes `[L, a, b]`. Returned as gray planes because L
/// spans `[0, 100]` and a/b are signed.
pub fn rgb_to_lab(img: &ImageBuf) -> Result<[GrayBuf; 3]> {
    img.expect_rgb()?;
    let n = img.plane_len();
    let mut l = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let lab = rgb_to_lab_px([img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]]);
        l.push(lab[0]);
        a.push(lab[1]);
        b.push(lab[2]);
    }
    Ok([
        GrayBuf::from_vec(img.width(), img.height(), l)?,
        GrayBuf::from_vec(img.width(), img.height(), a)?,
        GrayBuf::from_vec(img.width(), img.height(), b)?,
    ])
}
