//! Paired dataset synthesis: inject purple fringes into clean images.
//!
//! For each image, intensity, width, and sparsity are drawn from configured
//! ranges; Canny edges of the grayscale image are sparsely sampled, dilated
//! to the drawn width, Gaussian-blurred into a soft mask, and blended with a
//! purple color. Edge-free images pass through unchanged. Every drawn value
//! and per-image seed lands in a JSON-lines manifest so a dataset can be
//! regenerated bit-for-bit.

use crate::error::{Error, Result};
use crate::imgcore::{
    canny_edges, dilate, gaussian_blur, read_png, to_grayscale, write_png, GrayBuf, ImageBuf,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Randomization ranges and fixed settings for fringe synthesis.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SynthParams {
    /// Blend intensity range, within (0, 1].
    pub alpha_range: (f64, f64),
    /// Fringe width range in pixels, >= 1.
    pub width_range: (u32, u32),
    /// Edge-sampling ratio range, within (0, 1].
    pub sparse_range: (f64, f64),
    pub canny_low: f64,
    pub canny_high: f64,
    /// Mask blur sigma; `None` derives sigma = w/3 from the drawn width.
    pub blur_sigma: Option<f64>,
    /// Fringe color in RGB.
    pub purple: [f64; 3],
    /// Master seed; per-image seeds are derived from it.
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            alpha_range: (0.3, 0.8),
            width_range: (3, 9),
            sparse_range: (0.2, 0.6),
            canny_low: 0.1,
            canny_high: 0.3,
            blur_sigma: None,
            purple: [0.6, 0.0, 0.8],
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let (a0, a1) = self.alpha_range;
        if !(0.0 < a0 && a0 <= a1 && a1 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha range ({a0}, {a1}) must satisfy 0 < min <= max <= 1"
            )));
        }
        let (w0, w1) = self.width_range;
        if w0 < 1 || w0 > w1 {
            return Err(Error::InvalidParameter(format!(
                "width range ({w0}, {w1}) must satisfy 1 <= min <= max"
            )));
        }
        let (s0, s1) = self.sparse_range;
        if !(0.0 < s0 && s0 <= s1 && s1 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sparse range ({s0}, {s1}) must satisfy 0 < min <= max <= 1"
            )));
        }
        if !(0.0 <= self.canny_low && self.canny_low < self.canny_high && self.canny_high <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds ({}, {}) must satisfy 0 <= low < high <= 1",
                self.canny_low, self.canny_high
            )));
        }
        if let Some(s) = self.blur_sigma {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter(format!("blur sigma {s} must be > 0")));
            }
        }
        Ok(())
    }
}

/// One manifest row: drawn parameters and output locations for a source
/// image.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SynthRecord {
    pub source: String,
    pub split: String,
    pub alpha: f64,
    pub width: u32,
    pub sparsity: f64,
    pub seed: u64,
    pub clean_path: String,
    pub fringed_path: String,
}

/// Manifest line: a synthesis record, or a warning for a skipped file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ManifestLine {
    Record(SynthRecord),
    Warning { warning: String, source: String },
}

/// Soft-mask purple blend: `(1 - a*m) * clean + a*m * purple`, clipped.
pub fn apply_fringe_blend(
    clean: &ImageBuf,
    mask: &GrayBuf,
    alpha: f64,
    purple: [f64; 3],
) -> ImageBuf {
    let n = clean.plane_len();
    let mut data = vec![0.0; 3 * n];
    for c in 0..3 {
        let plane = clean.plane(c);
        for i in 0..n {
            let am = alpha * mask.data()[i];
            data[c * n + i] = ((1.0 - am) * plane[i] + am * purple[c]).clamp(0.0, 1.0);
        }
    }
    ImageBuf::from_planes(clean.width(), clean.height(), 3, data).expect("same dims")
}

/// Draws parameters and synthesizes one fringed image. Returns the clean
/// image unchanged when no Canny edges are found.
pub fn synthesize_fringe(
    clean: &ImageBuf,
    params: &SynthParams,
    rng: &mut ChaCha8Rng,
) -> Result<(ImageBuf, SynthRecord)> {
    clean.expect_rgb()?;
    params.validate()?;

    let alpha = draw_uniform(rng, params.alpha_range);
    let width = rng.random_range(params.width_range.0..=params.width_range.1);
    let sparsity = draw_uniform(rng, params.sparse_range);

    let record = SynthRecord {
        source: String::new(),
        split: String::new(),
        alpha,
        width,
        sparsity,
        seed: 0,
        clean_path: String::new(),
        fringed_path: String::new(),
    };

    let gray = to_grayscale(clean)?;
    let edges = canny_edges(&gray, params.canny_low, params.canny_high)?;
    let mut edge_points: Vec<usize> = edges
        .data()
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| (v == 1.0).then_some(i))
        .collect();

    if edge_points.is_empty() {
        return Ok((clean.clone(), record));
    }

    // Partial Fisher-Yates: the first n_pick elements become the sample.
    let n_pick = (sparsity * edge_points.len() as f64).floor() as usize;
    let n_pick = n_pick.min(edge_points.len());
    for i in 0..n_pick {
        let j = rng.random_range(i..edge_points.len());
        edge_points.swap(i, j);
    }

    let mut sparse = GrayBuf::zeros(clean.width(), clean.height());
    for &i in &edge_points[..n_pick] {
        sparse.data_mut()[i] = 1.0;
    }

    let dilated = dilate(&sparse, (width / 2) as usize);
    let sigma = params.blur_sigma.unwrap_or(width as f64 / 3.0).max(1e-6);
    let blurred = gaussian_blur(&dilated, sigma)?;

    Ok((apply_fringe_blend(clean, &blurred, alpha, params.purple), record))
}

fn draw_uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.random_range(range.0..=range.1)
    }
}

/// FNV-1a 64-bit over a string; platform-stable per-image seed material.
pub fn stable_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

fn list_images(src_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries =
        std::fs::read_dir(src_dir).map_err(|e| Error::io(src_dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(src_dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        if let Some(ext) = path.extension().and_then(|e| e.to_str()) {
            if IMAGE_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) {
                out.push(path);
            }
        }
    }
    Ok(out)
}

/// Synthesizes a paired dataset under `out_dir/{train,val,test}/{clean,fringed}`
/// and writes `manifest.jsonl`. Split assignment and per-image seeds depend
/// only on each file's name hash and the master seed, never on directory
/// listing order, so regeneration is stable even when files are added.
pub fn build_dataset(
    src_dir: &Path,
    out_dir: &Path,
    params: &SynthParams,
    split: [f64; 3],
) -> Result<Vec<ManifestLine>> {
    params.validate()?;
    if (split.iter().sum::<f64>() - 1.0).abs() > 1e-9 || split.iter().any(|&f| f < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "split fractions {split:?} must be nonnegative and sum to 1"
        )));
    }

    let mut sources = list_images(src_dir)?;
    if sources.is_empty() {
        return Err(Error::EmptySource(src_dir.to_path_buf()));
    }
    // Canonical order: by name hash, then name. Decorrelates split
    // assignment from lexicographic order while staying deterministic.
    sources.sort_by_key(|p| {
        let name = p.file_name().unwrap_or_default().to_string_lossy().to_string();
        (stable_hash(&name), name)
    });

    let n = sources.len();
    let n_train = (split[0] * n as f64).floor() as usize;
    let n_val = (split[1] * n as f64).floor() as usize;
    let split_of = |i: usize| -> &'static str {
        if i < n_train {
            "train"
        } else if i < n_train + n_val {
            "val"
        } else {
            "test"
        }
    };

    for split_name in ["train", "val", "test"] {
        for kind in ["clean", "fringed"] {
            let dir = out_dir.join(split_name).join(kind);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
    }

    // Per-split output counters, assigned in canonical order before the
    // parallel phase.
    let mut counters = std::collections::HashMap::new();
    let jobs: Vec<(usize, PathBuf, &'static str, usize)> = sources
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = split_of(i);
            let c = counters.entry(s).or_insert(0usize);
            let idx = *c;
            *c += 1;
            (i, p.clone(), s, idx)
        })
        .collect();

    let lines: Vec<ManifestLine> = jobs
        .par_iter()
        .map(|(_, path, split_name, idx)| {
            let name = path
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .to_string();
            let clean = match read_png(path) {
                Ok(img) if img.channels() == 3 => img,
                Ok(_) => {
                    return Ok(ManifestLine::Warning {
                        warning: "not an RGB image, skipped".into(),
                        source: name,
                    })
                }
                Err(e) => {
                    return Ok(ManifestLine::Warning {
                        warning: format!("undecodable, skipped: {e}"),
                        source: name,
                    })
                }
            };
            let seed = params.seed ^ stable_hash(&name);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (fringed, mut record) = synthesize_fringe(&clean, params, &mut rng)?;

            let file = format!("{idx:04}.png");
            let clean_rel = format!("{split_name}/clean/{file}");
            let fringed_rel = format!("{split_name}/fringed/{file}");
            write_png(out_dir.join(&clean_rel), &clean)?;
            write_png(out_dir.join(&fringed_rel), &fringed)?;

            record.source = name;
            record.split = (*split_name).to_string();
            record.seed = seed;
            record.clean_path = clean_rel;
            record.fringed_path = fringed_rel;
            Ok(ManifestLine::Record(record))
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest_path = out_dir.join("manifest.jsonl");
    let mut text = String::new();
    for line in &lines {
        text.push_str(&serde_json::to_string(line)?);
        text.push('\n');
    }
    std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(lines)
}
