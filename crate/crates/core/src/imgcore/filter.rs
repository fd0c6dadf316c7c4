//! Convolution, Sobel gradients, separable Gaussian blur, and binary
//! dilation. All spatial operations use replicate borders so gradient
//! statistics near the frame are not polluted by artificial dark edges.

use super::GrayBuf;
use crate::error::{Error, Result};

/// Sobel magnitudes at or below this are treated as zero. Constant images
/// can leave tiny floating-point residue in the gradient planes; relative
/// thresholds must not latch onto it.
pub const MAG_NOISE_FLOOR: f64 = 1e-9;

/// Small dense convolution kernel with odd dimensions.
#[derive(Debug, Clone)]
pub struct Kernel {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if width % 2 == 0 || height % 2 == 0 {
            return Err(Error::EvenKernel(width, height));
        }
        if weights.len() != width * height {
            return Err(Error::DataLength {
                width,
                height,
                channels: 1,
                got: weights.len(),
            });
        }
        Ok(Kernel {
            width,
            height,
            weights,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Standard 3x3 Sobel kernel for the horizontal derivative
    /// ( x increases rightwards ).
    pub fn sobel_x() -> Self {
        Kernel::new(
            3,
            3,
            vec![-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0],
        )
        .unwrap()
    }

    /// Standard 3x3 Sobel kernel for the vertical derivative
    /// ( y increases downwards ).
    pub fn sobel_y() -> Self {
        Kernel::new(
            3,
            3,
            vec![-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0],
        )
        .unwrap()
    }
}

/// Dense 2D convolution with replicate border. Output is the same size as
/// the input and is not clamped (the operation stays linear).
pub fn convolve2d(img: &GrayBuf, kernel: &Kernel) -> Result<GrayBuf> {
    let (w, h) = (img.width(), img.height());
    let rx = (kernel.width / 2) as isize;
    let ry = (kernel.height / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            let mut k = 0;
            for dy in -ry..=ry {
                for dx in -rx..=rx {
                    acc += kernel.weights[k] * img.get_clamped(x + dx, y + dy);
                    k += 1;
                }
            }
            out.push(acc);
        }
    }
    GrayBuf::from_vec(w, h, out)
}

/// Sobel x/y derivatives (signed) and gradient magnitude.
pub fn sobel_gradients(img: &GrayBuf) -> (GrayBuf, GrayBuf, GrayBuf) {
    let gx = convolve2d(img, &Kernel::sobel_x()).expect("static kernel");
    let gy = convolve2d(img, &Kernel::sobel_y()).expect("static kernel");
    let mag = GrayBuf::from_vec(
        img.width(),
        img.height(),
        gx.data()
            .iter()
            .zip(gy.data())
            .map(|(&a, &b)| (a * a + b * b).sqrt())
            .collect(),
    )
    .expect("same dims");
    (gx, gy, mag)
}

/// 1D Gaussian taps with radius `ceil(3*sigma)`, normalized to sum 1.
pub(crate) fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut taps = Vec::with_capacity(2 * radius + 1);
    for i in 0..=2 * radius {
        let d = i as f64 - radius as f64;
        taps.push((-0.5 * (d / sigma).powi(2)).exp());
    }
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur, replicate border.
pub fn gaussian_blur(img: &GrayBuf, sigma: f64) -> Result<GrayBuf> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    let taps = gaussian_taps(sigma);
    let radius = (taps.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());

    // Horizontal pass.
    let mut tmp = GrayBuf::zeros(w, h);
    for y in 0..h {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * img.get_clamped(x + k as isize - radius, y as isize);
            }
            tmp.set(x as usize, y, acc);
        }
    }
    // Vertical pass.
    let mut out = GrayBuf::zeros(w, h);
    for y in 0..h as isize {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * tmp.get_clamped(x as isize, y + k as isize - radius);
            }
            out.set(x, y as usize, acc);
        }
    }
    Ok(out)
}

/// Morphological dilation of a binary mask with a square structuring element
/// of side `2*radius + 1`, computed as a separable running max.
pub fn dilate(mask: &GrayBuf, radius: usize) -> GrayBuf {
    if radius == 0 {
        let mut out = mask.clone();
        for v in out.data_mut() {
            *v = if *v > 0.0 { 1.0 } else { 0.0 };
        }
        return out;
    }
    let (w, h) = (mask.width(), mask.height());
    let r = radius as isize;

    let mut tmp = GrayBuf::zeros(w, h);
    for y in 0..h {
        for x in 0..w as isize {
            let mut m: f64 = 0.0;
            for dx in -r..=r {
                let xi = x + dx;
                if xi >= 0 && xi < w as isize {
                    m = m.max(mask.get(xi as usize, y));
                }
            }
            tmp.set(x as usize, y, m);
        }
    }
    let mut out = GrayBuf::zeros(w, h);
    for y in 0..h as isize {
        for x in 0..w {
            let mut m: f64 = 0.0;
            for dy in -r..=r {
                let yi = y + dy;
                if yi >= 0 && yi < h as isize {
                    m = m.max(tmp.get(x, yi as usize));
                }
            }
            out.set(x, y as usize, if m > 0.0 { 1.0 } else { 0.0 });
        }
    }
    out
}
