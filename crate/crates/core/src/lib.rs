//! Purple-fringing correction toolkit.
//!
//! Purple fringing shows up as magenta halos along high-contrast edges,
//! caused by the red and blue channels defocusing relative to green. This
//! crate removes it with a small learned model:
//!
//! 1. an image-adaptive 3x3 transform ([`cas`]) maps RGB into a chromatic
//!    aberration space with a luminance, a fringe, and an orthogonal channel;
//! 2. a direction-aware 5D lookup table corrects the luminance channel using
//!    L-shaped spatial context and the fringe channel's gradients, while a
//!    1D lookup table suppresses residual fringe intensity ([`lut`]);
//! 3. the corrected channels are mapped back to RGB through the analytic
//!    inverse of the transform ([`pipeline`]).
//!
//! Everything trains end-to-end with hand-written analytic gradients — no
//! autodiff framework, no pretrained networks. Supporting modules cover
//! paired dataset synthesis ([`pfsynth`]), quality metrics including an
//! edge-chromatic-aberration score ([`metrics`]), a rule-based comparison
//! method ([`baseline`]), and a binary model file format ([`model_file`]).
//!
//! All pixel math is `f64`; images are planar (channel-major) so per-plane
//! passes stream contiguously.

pub mod baseline;
pub mod cas;
pub mod error;
pub mod imgcore;
pub mod lut;
pub mod metrics;
pub mod model_file;
pub mod pfsynth;
pub mod pipeline;
pub mod scene;

pub use error::{Error, Result};
pub use imgcore::{GrayBuf, ImageBuf};
