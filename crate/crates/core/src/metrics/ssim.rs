//! SSIM on BT.601 luma: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
//! K2 = 0.03, dynamic range 1, averaged over all valid window positions.

use crate::error::{Error, Result};
use crate::imgcore::{to_grayscale, GrayBuf, ImageBuf};

pub const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn window_taps() -> [f64; WINDOW] {
    let mut taps = [0.0; WINDOW];
    let r = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - r;
        *t = (-0.5 * (d / SIGMA).powi(2)).exp();
        sum += *t;
    }
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Valid-mode separable weighted filter; output is (h-10) x (w-10).
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    // Horizontal.
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * src[y * w + x + k];
            }
            tmp[y * ow + x] = acc;
        }
    }
    // Vertical.
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * tmp[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

pub(crate) fn ssim_planes(a: &GrayBuf, b: &GrayBuf) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    let (w, h) = (a.width(), a.height());
    if w < WINDOW || h < WINDOW {
        return Err(Error::ImageTooSmall(w, h, WINDOW));
    }
    let taps = window_taps();
    let x = a.data();
    let y = b.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(u, v)| u * v).collect();

    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let e_xx = filter_valid(&xx, w, h, &taps);
    let e_yy = filter_valid(&yy, w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);

    let c1 = K1 * K1;
    let c2 = K2 * K2;
    let mut sum = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
            / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    Ok(sum / mu_x.len() as f64)
}

/// SSIM between the luma planes of two images.
pub fn ssim(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    ssim_planes(&to_grayscale(a)?, &to_grayscale(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, w: usize, h: usize) -> ImageBuf {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageBuf::from_fn_rgb(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    #[test]
    fn identical_images_score_one() {
        let img = random_image(1, 16, 14);
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
    }

    #[test]
    fn negative_for_inverted_structured_content() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = ImageBuf::from_fn_rgb(16, 16, |_, _| {
            let v = if rng.random_bool(0.5) { 0.1 } else { 0.9 };
            [v, v, v]
        });
        let neg = ImageBuf::from_planes(
            16,
            16,
            3,
            img.data().iter().map(|v| 1.0 - v).collect(),
        )
        .unwrap();
        assert!(ssim(&img, &neg).unwrap() < 0.0);
    }

    #[test]
    fn rejects_small_images() {
        let img = random_image(3, 10, 16);
        assert!(matches!(
            ssim(&img, &img),
            Err(Error::ImageTooSmall(10, 16, WINDOW))
        ));
    }

    #[test]
    fn matches_per_window_oracle() {
        let a = random_image(4, 15, 13);
        let b = random_image(5, 15, 13);
        let got = ssim(&a, &b).unwrap();

        // Direct per-window double loop.
        let taps = window_taps();
        let ga = to_grayscale(&a).unwrap();
        let gb = to_grayscale(&b).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for wy in 0..13 - 10 {
            for wx in 0..15 - 10 {
                let (mut mx, mut my) = (0.0, 0.0);
                let (mut exx, mut eyy, mut exy) = (0.0, 0.0, 0.0);
                for ky in 0..WINDOW {
                    for kx in 0..WINDOW {
                        let wgt = taps[ky] * taps[kx];
                        let xv = ga.get(wx + kx, wy + ky);
                        let yv = gb.get(wx + kx, wy + ky);
                        mx += wgt * xv;
                        my += wgt * yv;
                        exx += wgt * xv * xv;
                        eyy += wgt * yv * yv;
                        exy += wgt * xv * yv;
                    }
                }
                let var_x = exx - mx * mx;
                let var_y = eyy - my * my;
                let cov = exy - mx * my;
                sum += ((2.0 * mx * my + 1e-4) * (2.0 * cov + 9e-4))
                    / ((mx * mx + my * my + 1e-4) * (var_x + var_y + 9e-4));
                count += 1;
            }
        }
        let expect = sum / count as f64;
        assert!((got - expect).abs() < 1e-5, "{got} vs {expect}");
    }
}
