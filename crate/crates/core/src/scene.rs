//! Procedural demo scenes: smooth gradients with sharp-edged shapes in
//! muted colors. Used by the benchmark harness and tests as edge-rich
//! source material when no real photographs are at hand.

use crate::imgcore::ImageBuf;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Deterministic scene with a low-frequency background and a handful of
/// rectangles and discs. Colors stay low-saturation so the scene itself
/// carries no purple or green chroma near its edges.
pub fn demo_scene(seed: u64, width: usize, height: usize) -> ImageBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let base: f64 = rng.random_range(0.25..0.65);
    let tilt_x: f64 = rng.random_range(-0.25..0.25);
    let tilt_y: f64 = rng.random_range(-0.25..0.25);

    #[derive(Clone, Copy)]
    enum Shape {
        Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
        Disc { cx: f64, cy: f64, r: f64 },
    }

    let n_shapes = rng.random_range(4..=7);
    let mut shapes = Vec::with_capacity(n_shapes);
    for _ in 0..n_shapes {
        let value: f64 = rng.random_range(0.08..0.92);
        // Channel offsets scale with the value so saturation (chroma over
        // value) stays below ~0.16 even for dark shapes.
        let t = 0.08 * value;
        let tint: [f64; 3] = [
            rng.random_range(-t..t),
            rng.random_range(-t..t),
            rng.random_range(-t..t),
        ];
        let shape = if rng.random_bool(0.5) {
            let x0 = rng.random_range(0.0..0.8);
            let y0 = rng.random_range(0.0..0.8);
            Shape::Rect {
                x0,
                y0,
                x1: x0 + rng.random_range(0.1..0.45),
                y1: y0 + rng.random_range(0.1..0.45),
            }
        } else {
            Shape::Disc {
                cx: rng.random_range(0.1..0.9),
                cy: rng.random_range(0.1..0.9),
                r: rng.random_range(0.06..0.22),
            }
        };
        shapes.push((shape, value, tint));
    }

    ImageBuf::from_fn_rgb(width, height, |x, y| {
        let u = x as f64 / width.max(1) as f64;
        let v = y as f64 / height.max(1) as f64;
        let mut px = [base + tilt_x * u + tilt_y * v; 3];
        for &(shape, value, tint) in &shapes {
            let inside = match shape {
                Shape::Rect { x0, y0, x1, y1 } => u >= x0 && u < x1 && v >= y0 && v < y1,
                Shape::Disc { cx, cy, r } => {
                    (u - cx) * (u - cx) + (v - cy) * (v - cy) < r * r
                }
            };
            if inside {
                for c in 0..3 {
                    px[c] = value + tint[c];
                }
            }
        }
        px
    })
}

/// Uniform random noise image; benchmark input.
pub fn noise_image(seed: u64, width: usize, height: usize) -> ImageBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = width * height * 3;
    let data: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    ImageBuf::from_planes(width, height, 3, data).expect("sized")
}
