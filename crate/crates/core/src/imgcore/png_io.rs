//! PNG read/write. 8-bit and 16-bit sRGB; samples are normalized by 255 or
//! 65535 on load and rounded to nearest on save.

use super::ImageBuf;
use crate::error::{Error, Result};
use std::path::Path;

/// Reads a PNG (or any format the decoder recognizes) into a planar image.
/// Gray inputs become 1-channel, everything else 3-channel; alpha is
/// dropped. Both 8- and 16-bit samples are widened to 16 bits before
/// normalization, which is exact (255 * 257 == 65535).
pub fn read_png(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    let dynimg = image::open(path).map_err(|e| Error::image(path, e))?;
    let gray = matches!(
        dynimg.color(),
        image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16
    );
    if gray {
        let img = dynimg.into_luma16();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let data = img.into_raw().iter().map(|&v| v as f64 / 65535.0).collect();
        Ok(ImageBuf::from_planes(w, h, 1, data)?)
    } else {
        let img = dynimg.into_rgb16();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let n = w * h;
        let raw = img.into_raw();
        let mut data = vec![0.0; 3 * n];
        for i in 0..n {
            for c in 0..3 {
                data[c * n + i] = raw[i * 3 + c] as f64 / 65535.0;
            }
        }
        Ok(ImageBuf::from_planes(w, h, 3, data)?)
    }
}

/// Writes an 8-bit PNG (round-to-nearest quantization).
pub fn write_png(path: impl AsRef<Path>, img: &ImageBuf) -> Result<()> {
    let path = path.as_ref();
    let (w, h, n) = (img.width() as u32, img.height() as u32, img.plane_len());
    let quant = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    match img.channels() {
        1 => {
            let raw: Vec<u8> = img.plane(0).iter().map(|&v| quant(v)).collect();
            image::GrayImage::from_raw(w, h, raw)
                .expect("sized buffer")
                .save(path)
                .map_err(|e| Error::image(path, e))
        }
        _ => {
            let mut raw = Vec::with_capacity(3 * n);
            for i in 0..n {
                raw.push(quant(img.plane(0)[i]));
                raw.push(quant(img.plane(1)[i]));
                raw.push(quant(img.plane(2)[i]));
            }
            image::RgbImage::from_raw(w, h, raw)
                .expect("sized buffer")
                .save(path)
                .map_err(|e| Error::image(path, e))
        }
    }
}

/// Writes a 16-bit PNG.
pub fn write_png16(path: impl AsRef<Path>, img: &ImageBuf) -> Result<()> {
    let path = path.as_ref();
    let (w, h, n) = (img.width() as u32, img.height() as u32, img.plane_len());
    let quant = |v: f64| (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
    match img.channels() {
        1 => {
            let raw: Vec<u16> = img.plane(0).iter().map(|&v| quant(v)).collect();
            image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w, h, raw)
                .expect("sized buffer")
                .save(path)
                .map_err(|e| Error::image(path, e))
        }
        _ => {
            let mut raw = Vec::with_capacity(3 * n);
            for i in 0..n {
                raw.push(quant(img.plane(0)[i]));
                raw.push(quant(img.plane(1)[i]));
                raw.push(quant(img.plane(2)[i]));
            }
            image::ImageBuffer::<image::Rgb<u16>, _>::from_raw(w, h, raw)
                .expect("sized buffer")
                .save(path)
                .map_err(|e| Error::image(path, e))
        }
    }
}
