//! Canny edge detection.
//!
//! Fixed internals so dataset synthesis is reproducible bit-for-bit:
//! Gaussian presmooth with sigma 1.0, Sobel gradients, non-maximum
//! suppression with the gradient direction quantized to 4 bins, then
//! double-threshold hysteresis with 8-connectivity. Thresholds apply to the
//! gradient magnitude normalized by its maximum.

use super::filter::{gaussian_blur, sobel_gradients, MAG_NOISE_FLOOR};
use super::GrayBuf;
use crate::error::{Error, Result};

const PRESMOOTH_SIGMA: f64 = 1.0;

/// Binary edge mask (values exactly 0.0 or 1.0).
pub fn canny_edges(img: &GrayBuf, low: f64, high: f64) -> Result<GrayBuf> {
    if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low >= high {
        return Err(Error::InvalidThresholds(low, high));
    }
    let (w, h) = (img.width(), img.height());
    let smoothed = gaussian_blur(img, PRESMOOTH_SIGMA)?;
    let (gx, gy, mag) = sobel_gradients(&smoothed);

    let max_mag = mag.data().iter().cloned().fold(0.0f64, f64::max);
    if max_mag <= MAG_NOISE_FLOOR {
        return Ok(GrayBuf::zeros(w, h));
    }

    // Non-maximum suppression. Each direction bin fixes a neighbor pair
    // (n1 along the bin direction, n2 opposite); a pixel survives when it is
    // strictly greater than n2 and at least n1, which breaks the two-pixel
    // tie of a symmetric step edge deterministically.
    let mut thin = GrayBuf::zeros(w, h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let m = mag.get(x as usize, y as usize);
            if m <= 0.0 {
                continue;
            }
            let angle = gy
                .get(x as usize, y as usize)
                .atan2(gx.get(x as usize, y as usize))
                .to_degrees()
                .rem_euclid(180.0);
            let (d1, d2) = if !(22.5..157.5).contains(&angle) {
                ((1, 0), (-1, 0))
            } else if angle < 67.5 {
                ((1, 1), (-1, -1))
            } else if angle < 112.5 {
                ((0, 1), (0, -1))
            } else {
                ((-1, 1), (1, -1))
            };
            let at = |dx: isize, dy: isize| -> f64 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    0.0
                } else {
                    mag.get(nx as usize, ny as usize)
                }
            };
            if m >= at(d1.0, d1.1) && m > at(d2.0, d2.1) {
                thin.set(x as usize, y as usize, m / max_mag);
            }
        }
    }

    // Double-threshold hysteresis, 8-connected flood from strong pixels.
    let mut out = GrayBuf::zeros(w, h);
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if thin.get(x, y) >= high && out.get(x, y) == 0.0 {
                out.set(x, y, 1.0);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1..=1isize {
                        for dx in -1..=1isize {
                            if dx == 0 && dy == 0 {
                                continue;
                            }
                            let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                                continue;
                            }
                            let (nx, ny) = (nx as usize, ny as usize);
                            if out.get(nx, ny) == 0.0 && thin.get(nx, ny) >= low {
                                out.set(nx, ny, 1.0);
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::filter::dilate;

    #[test]
    fn rejects_bad_thresholds() {
        let img = GrayBuf::zeros(8, 8);
        assert!(canny_edges(&img, 0.5, 0.2).is_err());
        assert!(canny_edges(&img, 0.3, 0.3).is_err());
        assert!(canny_edges(&img, -0.1, 0.5).is_err());
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayBuf::new_filled(12, 12, 0.6);
        let out = canny_edges(&img, 0.1, 0.3).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn output_is_strictly_binary() {
        let img = GrayBuf::from_fn(16, 16, |x, y| {
            if (x / 4 + y / 4) % 2 == 0 {
                0.2
            } else {
                0.9
            }
        });
        let out = canny_edges(&img, 0.1, 0.3).unwrap();
        assert!(out.is_binary());
        assert!(out.data().iter().any(|&v| v == 1.0));
    }

    #[test]
    fn vertical_step_yields_one_pixel_line() {
        let img = GrayBuf::from_fn(16, 16, |x, _| if x >= 8 { 1.0 } else { 0.0 });
        let out = canny_edges(&img, 0.1, 0.3).unwrap();
        // Away from the top/bottom frame rows, each row crosses the edge in
        // exactly one pixel.
        for y in 2..14 {
            let row: f64 = (0..16).map(|x| out.get(x, y)).sum();
            assert_eq!(row, 1.0, "row {y} has width {row}");
        }
        // The line is a single column.
        let cols: Vec<usize> = (0..16).filter(|&x| out.get(x, 8) == 1.0).collect();
        assert_eq!(cols.len(), 1);
    }

    /// Plain reimplementation of the same documented steps (presmooth,
    /// Sobel, 4-bin NMS keeping any local max on ties, scan-until-fixpoint
    /// hysteresis) used as an independent oracle.
    fn reference_canny(img: &GrayBuf, low: f64, high: f64) -> GrayBuf {
        let (w, h) = (img.width(), img.height());
        let sm = gaussian_blur(img, 1.0).unwrap();
        let (gx, gy, mag) = sobel_gradients(&sm);
        let maxm = mag.data().iter().cloned().fold(0.0f64, f64::max);
        if maxm <= 0.0 {
            return GrayBuf::zeros(w, h);
        }
        let mut nms = GrayBuf::zeros(w, h);
        for y in 0..h as isize {
            for x in 0..w as isize {
                let m = mag.get(x as usize, y as usize);
                if m <= 0.0 {
                    continue;
                }
                let a = gy
                    .get(x as usize, y as usize)
                    .atan2(gx.get(x as usize, y as usize))
                    .to_degrees()
                    .rem_euclid(180.0);
                let d = if !(22.5..157.5).contains(&a) {
                    (1, 0)
                } else if a < 67.5 {
                    (1, 1)
                } else if a < 112.5 {
                    (0, 1)
                } else {
                    (-1isize, 1isize)
                };
                let at = |dx: isize, dy: isize| {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        0.0
                    } else {
                        mag.get(nx as usize, ny as usize)
                    }
                };
                // Looser tie handling: keep every local max.
                if m >= at(d.0, d.1) && m >= at(-d.0, -d.1) {
                    nms.set(x as usize, y as usize, m / maxm);
                }
            }
        }
        let mut keep = GrayBuf::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                if nms.get(x, y) >= high {
                    keep.set(x, y, 1.0);
                }
            }
        }
        // Propagate into weak pixels until nothing changes.
        loop {
            let mut changed = false;
            for y in 0..h as isize {
                for x in 0..w as isize {
                    if keep.get(x as usize, y as usize) == 1.0
                        || nms.get(x as usize, y as usize) < low
                    {
                        continue;
                    }
                    'scan: for dy in -1..=1isize {
                        for dx in -1..=1isize {
                            let (nx, ny) = (x + dx, y + dy);
                            if nx >= 0
                                && ny >= 0
                                && nx < w as isize
                                && ny < h as isize
                                && keep.get(nx as usize, ny as usize) == 1.0
                            {
                                keep.set(x as usize, y as usize, 1.0);
                                changed = true;
                                break 'scan;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        keep
    }

    #[test]
    fn square_contour_matches_reference_within_one_pixel() {
        let img = GrayBuf::from_fn(24, 24, |x, y| {
            if (6..18).contains(&x) && (6..18).contains(&y) {
                0.9
            } else {
                0.1
            }
        });
        let out = canny_edges(&img, 0.1, 0.3).unwrap();
        let reference = reference_canny(&img, 0.1, 0.3);
        assert!(out.data().iter().any(|&v| v == 1.0));

        // Every detected pixel within one pixel of a reference pixel and
        // vice versa.
        let ref_dilated = dilate(&reference, 1);
        let out_dilated = dilate(&out, 1);
        for i in 0..out.data().len() {
            assert!(
                out.data()[i] <= ref_dilated.data()[i],
                "detected pixel {i} not near reference"
            );
            assert!(
                reference.data()[i] <= out_dilated.data()[i],
                "reference pixel {i} not near detection"
            );
        }
    }
}
