//! Planar floating-point images, color-space conversions, and the
//! convolution primitives everything else is built on.
//!
//! [`ImageBuf`] stores unit-interval RGB (or single-channel) data as
//! channel-major planes; [`GrayBuf`] is a single plane. Gray planes are also
//! used for signed data (Sobel gradients) and unbounded data (chromatic
//! aberration space channels), so only the operations documented as
//! producing unit-interval output clamp.
//!
//! All operations are pure: same input bytes, same output bytes, regardless
//! of thread count.

mod canny;
pub(crate) mod color;
mod filter;
mod png_io;

pub use canny::canny_edges;
pub use color::{
    rgb_to_hsv, rgb_to_hsv_px, rgb_to_lab, rgb_to_lab_px, rgb_to_ycbcr, to_grayscale, ycbcr_to_rgb,
};
pub use filter::{convolve2d, dilate, gaussian_blur, sobel_gradients, Kernel, MAG_NOISE_FLOOR};
pub use png_io::{read_png, write_png, write_png16};

use crate::error::{Error, Result};

/// Planar floating-point image. Channel `c` occupies
/// `data[c*w*h .. (c+1)*w*h]`, row-major within the plane.
///
/// Public constructors clamp every sample to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuf {
    /// Image filled with a constant value (clamped).
    pub fn new_filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        ImageBuf {
            width,
            height,
            channels,
            data: vec![value.clamp(0.0, 1.0); width * height * channels],
        }
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::new_filled(width, height, channels, 0.0)
    }

    /// Builds from channel-major data, clamping samples to `[0, 1]`.
    pub fn from_planes(
        width: usize,
        height: usize,
        channels: usize,
        mut data: Vec<f64>,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelMismatch {
                expected: 3,
                got: channels,
            });
        }
        if data.len() != width * height * channels {
            return Err(Error::DataLength {
                width,
                height,
                channels,
                got: data.len(),
            });
        }
        for v in &mut data {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(ImageBuf {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds a 3-channel image from a per-pixel closure returning RGB.
    pub fn from_fn_rgb(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let n = width * height;
        let mut data = vec![0.0; n * 3];
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                for c in 0..3 {
                    data[c * n + y * width + x] = px[c].clamp(0.0, 1.0);
                }
            }
        }
        ImageBuf {
            width,
            height,
            channels: 3,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Pixels per plane.
    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[c * self.plane_len() + y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        let n = self.plane_len();
        self.data[c * n + y * self.width + x] = v.clamp(0.0, 1.0);
    }

    /// RGB triple at (x, y). Requires 3 channels.
    pub fn rgb(&self, x: usize, y: usize) -> [f64; 3] {
        let n = self.plane_len();
        let i = y * self.width + x;
        [self.data[i], self.data[n + i], self.data[2 * n + i]]
    }

    pub fn same_dims(&self, other: &ImageBuf) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels == other.channels
    }

    pub(crate) fn expect_rgb(&self) -> Result<()> {
        if self.channels != 3 {
            return Err(Error::ChannelMismatch {
                expected: 3,
                got: self.channels,
            });
        }
        Ok(())
    }
}

/// Single image plane. Carries no range invariant of its own: luma and mask
/// producers emit `[0, 1]` values, Sobel gradients are signed, CAS channels
/// are unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayBuf {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayBuf {
    pub fn new_filled(width: usize, height: usize, value: f64) -> Self {
        GrayBuf {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new_filled(width, height, 0.0)
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DataLength {
                width,
                height,
                channels: 1,
                got: data.len(),
            });
        }
        Ok(GrayBuf {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayBuf {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Replicate-border access: coordinates are clamped into range.
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    pub fn same_dims(&self, other: &GrayBuf) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn clamp01(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// True if every sample is exactly 0.0 or 1.0.
    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

/// BT.601 luma weights; used for grayscale conversion and the luminance row
/// of the base chromatic transform.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];
