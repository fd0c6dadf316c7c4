//! Rule-based defringe, the classical comparison point: flag pixels whose
//! red and blue channels sit notably above green near a strong edge, then
//! desaturate them toward their luma.
//!
//! The purple-chromaticity test plus edge proximity is exactly what makes
//! this family fragile: a legitimate purple object bordering a strong edge
//! gets desaturated too, while one far from edges is spared.

use crate::error::{Error, Result};
use crate::imgcore::{dilate, sobel_gradients, to_grayscale, GrayBuf, ImageBuf, LUMA_WEIGHTS, MAG_NOISE_FLOOR};

/// Margin by which R and B must exceed G to count as purple chromaticity.
pub const CHROMA_MARGIN: f64 = 0.08;

/// Default Chebyshev radius around edges within which purple pixels are
/// flagged.
pub const DEFAULT_NEAR_RADIUS: usize = 4;

/// Binary mask of suspected fringe pixels: purple chromaticity
/// (R > G + margin and B > G + margin) within `near_radius` (Chebyshev) of a
/// Sobel edge whose magnitude exceeds `tau_edge` times the maximum.
pub fn heuristic_detect(img: &ImageBuf, tau_edge: f64, near_radius: usize) -> Result<GrayBuf> {
    img.expect_rgb()?;
    let gray = to_grayscale(img)?;
    let (_, _, mag) = sobel_gradients(&gray);
    let max_mag = mag.data().iter().cloned().fold(0.0f64, f64::max);

    let mut near_edge = GrayBuf::zeros(img.width(), img.height());
    if max_mag > MAG_NOISE_FLOOR {
        let thresh = tau_edge * max_mag;
        for (i, &m) in mag.data().iter().enumerate() {
            if m > thresh {
                near_edge.data_mut()[i] = 1.0;
            }
        }
        near_edge = dilate(&near_edge, near_radius);
    }

    let n = img.plane_len();
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut mask = GrayBuf::zeros(img.width(), img.height());
    for i in 0..n {
        let purple = r[i] > g[i] + CHROMA_MARGIN && b[i] > g[i] + CHROMA_MARGIN;
        if purple && near_edge.data()[i] == 1.0 {
            mask.data_mut()[i] = 1.0;
        }
    }
    Ok(mask)
}

/// Moves flagged pixels toward their luma: `c' = luma + (1-strength)(c - luma)`
/// per channel. Luma is preserved exactly; unflagged pixels are untouched.
pub fn heuristic_correct(img: &ImageBuf, mask: &GrayBuf, strength: f64) -> Result<ImageBuf> {
    img.expect_rgb()?;
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::DimensionMismatch(
            img.width(),
            img.height(),
            mask.width(),
            mask.height(),
        ));
    }
    let strength = strength.clamp(0.0, 1.0);
    let n = img.plane_len();
    let mut data = img.data().to_vec();
    for i in 0..n {
        if mask.data()[i] == 0.0 {
            continue;
        }
        let px = [data[i], data[n + i], data[2 * n + i]];
        let luma = LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2];
        for c in 0..3 {
            // (1-s)*c + s*luma; exact identity at strength 0.
            data[c * n + i] = (1.0 - strength) * px[c] + strength * luma;
        }
    }
    ImageBuf::from_planes(img.width(), img.height(), 3, data)
}
