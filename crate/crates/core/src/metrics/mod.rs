//! Quality evaluation: PSNR, SSIM, mean CIEDE2000, and the Edge Chromatic
//! Aberration Score (ECAS).
//!
//! ECAS is the fringe-specific metric: the fraction of ground-truth edge
//! pixels that remain saturated purple or green in the corrected image.
//! PSNR can look excellent while a thin purple halo survives along every
//! edge; ECAS is sensitive to exactly that residue. Scores are only
//! comparable under the same [`EcasConfig`], so reports embed it.

mod ciede2000;
mod ssim;

pub use ciede2000::ciede2000;
pub use ssim::ssim;

use crate::error::{Error, Result};
use crate::imgcore::{rgb_to_hsv_px, rgb_to_lab_px, sobel_gradients, to_grayscale, ImageBuf, MAG_NOISE_FLOOR};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Thresholds and hue bands for ECAS.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EcasConfig {
    /// Edge mask threshold as a fraction of the maximum Sobel magnitude.
    pub tau_edge: f64,
    /// Minimum saturation for a pixel to count as aberrated.
    pub tau_sat: f64,
    /// Purple hue band in degrees.
    pub purple_hue: (f64, f64),
    /// Green hue band in degrees.
    pub green_hue: (f64, f64),
}

impl Default for EcasConfig {
    fn default() -> Self {
        EcasConfig {
            tau_edge: 0.15,
            tau_sat: 0.25,
            purple_hue: (250.0, 330.0),
            green_hue: (80.0, 160.0),
        }
    }
}

impl EcasConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_thresh = |t: f64| t > 0.0 && t < 1.0;
        if !ok_thresh(self.tau_edge) || !ok_thresh(self.tau_sat) {
            return Err(Error::InvalidParameter(format!(
                "ECAS thresholds ({}, {}) must lie in (0, 1)",
                self.tau_edge, self.tau_sat
            )));
        }
        let ok_band = |b: (f64, f64)| (0.0..360.0).contains(&b.0) && b.0 < b.1 && b.1 < 360.0;
        if !ok_band(self.purple_hue) || !ok_band(self.green_hue) {
            return Err(Error::InvalidParameter(
                "ECAS hue bands must be ordered and within [0, 360)".into(),
            ));
        }
        if self.purple_hue.0 < self.green_hue.1 && self.green_hue.0 < self.purple_hue.1 {
            return Err(Error::InvalidParameter(
                "ECAS purple and green hue bands must not overlap".into(),
            ));
        }
        Ok(())
    }
}

/// Metric values for one corrected/ground-truth pair. `psnr` is
/// `f64::INFINITY` for identical images and serializes to JSON null.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    #[serde(serialize_with = "ser_maybe_inf", deserialize_with = "de_maybe_inf")]
    pub psnr: f64,
    pub ssim: f64,
    pub delta_e: f64,
    pub ecas: f64,
}

fn ser_maybe_inf<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

fn de_maybe_inf<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let opt: Option<f64> = serde::Deserialize::deserialize(d)?;
    Ok(opt.unwrap_or(f64::INFINITY))
}

fn check_dims(a: &ImageBuf, b: &ImageBuf) -> Result<()> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB over all samples, peak 1.0. Identical
/// images return the infinity sentinel.
pub fn psnr(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    check_dims(a, b)?;
    let mse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.data().len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

/// Mean CIEDE2000 over all pixels.
pub fn delta_e_2000(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    check_dims(a, b)?;
    a.expect_rgb()?;
    let n = a.plane_len();
    let mut sum = 0.0;
    for i in 0..n {
        let lab_a = rgb_to_lab_px([a.plane(0)[i], a.plane(1)[i], a.plane(2)[i]]);
        let lab_b = rgb_to_lab_px([b.plane(0)[i], b.plane(1)[i], b.plane(2)[i]]);
        sum += ciede2000(lab_a, lab_b);
    }
    Ok(sum / n as f64)
}

/// Edge Chromatic Aberration Score: edge mask from the ground truth (Sobel
/// magnitude above `tau_edge` times its maximum), aberration mask from the
/// corrected image (hue in the purple or green band and saturation above
/// `tau_sat`); the score is their overlap divided by the edge count. An
/// edge-free ground truth scores 0 by convention.
pub fn ecas(corrected: &ImageBuf, gt: &ImageBuf, cfg: &EcasConfig) -> Result<f64> {
    check_dims(corrected, gt)?;
    corrected.expect_rgb()?;
    cfg.validate()?;

    let gray = to_grayscale(gt)?;
    let (_, _, mag) = sobel_gradients(&gray);
    let max_mag = mag.data().iter().cloned().fold(0.0f64, f64::max);
    if max_mag <= MAG_NOISE_FLOOR {
        return Ok(0.0);
    }
    let thresh = cfg.tau_edge * max_mag;

    let n = corrected.plane_len();
    let mut edges = 0usize;
    let mut overlap = 0usize;
    for i in 0..n {
        if mag.data()[i] <= thresh {
            continue;
        }
        edges += 1;
        let hsv = rgb_to_hsv_px([
            corrected.plane(0)[i],
            corrected.plane(1)[i],
            corrected.plane(2)[i],
        ]);
        let hue = hsv[0] * 360.0;
        let in_band = (cfg.purple_hue.0..=cfg.purple_hue.1).contains(&hue)
            || (cfg.green_hue.0..=cfg.green_hue.1).contains(&hue);
        if in_band && hsv[1] > cfg.tau_sat {
            overlap += 1;
        }
    }
    if edges == 0 {
        Ok(0.0)
    } else {
        Ok(overlap as f64 / edges as f64)
    }
}

/// All four metrics for one pair.
pub fn evaluate_pair(corrected: &ImageBuf, gt: &ImageBuf, cfg: &EcasConfig) -> Result<MetricsReport> {
    Ok(MetricsReport {
        psnr: psnr(corrected, gt)?,
        ssim: ssim(corrected, gt)?,
        delta_e: delta_e_2000(corrected, gt)?,
        ecas: ecas(corrected, gt, cfg)?,
    })
}

/// Result of evaluating two directories paired by file name.
#[derive(Debug, Clone, Serialize)]
pub struct DirEvaluation {
    pub per_image: Vec<(String, MetricsReport)>,
    pub aggregate: MetricsReport,
    pub unpaired_corrected: Vec<String>,
    pub unpaired_gt: Vec<String>,
    pub config: EcasConfig,
}

/// Evaluates every same-named PNG pair in two directories. Unpaired files
/// are reported, not fatal; an empty intersection is an error. The
/// aggregate is the unweighted mean.
pub fn evaluate_dir(corrected_dir: &Path, gt_dir: &Path, cfg: &EcasConfig) -> Result<DirEvaluation> {
    let names = |dir: &Path| -> Result<Vec<String>> {
        let mut v = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_file() {
                if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                    if name.to_ascii_lowercase().ends_with(".png") {
                        v.push(name.to_string());
                    }
                }
            }
        }
        v.sort();
        Ok(v)
    };
    let corrected_names = names(corrected_dir)?;
    let gt_names = names(gt_dir)?;

    let paired: Vec<String> = corrected_names
        .iter()
        .filter(|n| gt_names.binary_search(n).is_ok())
        .cloned()
        .collect();
    if paired.is_empty() {
        return Err(Error::EmptyPairSet);
    }

    let per_image: Vec<(String, MetricsReport)> = paired
        .par_iter()
        .map(|name| {
            let corrected = crate::imgcore::read_png(corrected_dir.join(name))?;
            let gt = crate::imgcore::read_png(gt_dir.join(name))?;
            Ok((name.clone(), evaluate_pair(&corrected, &gt, cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = per_image.len() as f64;
    let aggregate = MetricsReport {
        psnr: per_image.iter().map(|(_, r)| r.psnr).sum::<f64>() / n,
        ssim: per_image.iter().map(|(_, r)| r.ssim).sum::<f64>() / n,
        delta_e: per_image.iter().map(|(_, r)| r.delta_e).sum::<f64>() / n,
        ecas: per_image.iter().map(|(_, r)| r.ecas).sum::<f64>() / n,
    };
    Ok(DirEvaluation {
        unpaired_corrected: corrected_names
            .iter()
            .filter(|n| gt_names.binary_search(n).is_err())
            .cloned()
            .collect(),
        unpaired_gt: gt_names
            .iter()
            .filter(|n| corrected_names.binary_search(n).is_err())
            .cloned()
            .collect(),
        per_image,
        aggregate,
        config: cfg.clone(),
    })
}
