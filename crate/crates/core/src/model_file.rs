//! Binary model serialization.
//!
//! Layout: 8-byte magic `DCALUT1\0`, little-endian `u16` version, `u64`
//! payload length, `u32` CRC32 of the payload, then the payload as tagged
//! sections (`u32` id, `u64` byte length, bytes). Sections hold the matrix
//! predictor, both lookup tables with their resolutions and domains, the
//! coordinate normalization constants, and an informational loss-weight
//! record. All reals are 64-bit so `load(save(m)) == m` bitwise.

use crate::cas::{CasPredictor, Mat3, FEATURE_COUNT, HIDDEN_WIDTH};
use crate::error::{Error, Result};
use crate::lut::{CoordNorm, Lut1D, Lut5D};
use crate::pipeline::{LossWeights, Model};
use std::path::Path;

pub const MAGIC: [u8; 8] = *b"DCALUT1\0";
pub const VERSION: u16 = 1;

const SEC_PREDICTOR: u32 = 1;
const SEC_LUT5D: u32 = 2;
const SEC_LUT1D: u32 = 3;
const SEC_COORD_NORM: u32 = 4;
const SEC_LOSS_WEIGHTS: u32 = 5;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }

    fn section(&mut self, id: u32, body: Writer) {
        self.u32(id);
        self.u64(body.buf.len() as u64);
        self.buf.extend_from_slice(&body.buf);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::ModelFormat(format!(
                "truncated: wanted {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

/// Serializes a model to bytes.
pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut payload = Writer::new();

    let mut sec = Writer::new();
    sec.f64s(&model.predictor.feat_mean);
    sec.f64s(&model.predictor.feat_std);
    sec.f64s(&model.predictor.w1);
    sec.f64s(&model.predictor.b1);
    sec.f64s(&model.predictor.w2);
    sec.f64s(&model.predictor.b2);
    for row in model.predictor.base.0 {
        sec.f64s(&row);
    }
    payload.section(SEC_PREDICTOR, sec);

    let mut sec = Writer::new();
    sec.u32(5);
    for _ in 0..5 {
        sec.u32(model.lut5.res as u32);
    }
    for (lo, hi) in model.lut5.domains {
        sec.f64(lo);
        sec.f64(hi);
    }
    sec.f64s(&model.lut5.entries);
    payload.section(SEC_LUT5D, sec);

    let mut sec = Writer::new();
    sec.u32(model.lut1.size() as u32);
    sec.f64(model.lut1.domain.0);
    sec.f64(model.lut1.domain.1);
    sec.f64s(&model.lut1.entries);
    payload.section(SEC_LUT1D, sec);

    let mut sec = Writer::new();
    sec.f64(model.norm.lum_lo);
    sec.f64(model.norm.lum_hi);
    sec.f64(model.norm.g_max);
    payload.section(SEC_COORD_NORM, sec);

    let mut sec = Writer::new();
    let w = &model.weights;
    sec.f64s(&[w.l1, w.p, w.chroma, w.smooth, w.align]);
    payload.section(SEC_LOSS_WEIGHTS, sec);

    let mut out = Vec::with_capacity(payload.buf.len() + 22);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.buf.len() as u64).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload.buf).to_le_bytes());
    out.extend_from_slice(&payload.buf);
    out
}

/// Parses a model from bytes, verifying magic, version, and checksum.
pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader::new(bytes);
    let magic = r.take(8)?;
    if magic != MAGIC {
        return Err(Error::ModelFormat("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if version > VERSION {
        return Err(Error::UnsupportedVersion(version, VERSION));
    }
    if version == 0 {
        return Err(Error::ModelFormat("version 0 is not valid".into()));
    }
    let payload_len = r.u64()? as usize;
    let crc = r.u32()?;
    let payload = r.take(payload_len)?;
    if !r.done() {
        return Err(Error::ModelFormat("trailing bytes after payload".into()));
    }
    if crc32fast::hash(payload) != crc {
        return Err(Error::ModelFormat("checksum mismatch".into()));
    }

    let mut predictor: Option<CasPredictor> = None;
    let mut lut5: Option<Lut5D> = None;
    let mut lut1: Option<Lut1D> = None;
    let mut norm: Option<CoordNorm> = None;
    let mut weights: Option<LossWeights> = None;

    let mut r = Reader::new(payload);
    while !r.done() {
        let id = r.u32()?;
        let len = r.u64()? as usize;
        let body = r.take(len)?;
        let mut s = Reader::new(body);
        match id {
            SEC_PREDICTOR => {
                let feat_mean: [f64; FEATURE_COUNT] =
                    s.f64s(FEATURE_COUNT)?.try_into().unwrap();
                let feat_std: [f64; FEATURE_COUNT] =
                    s.f64s(FEATURE_COUNT)?.try_into().unwrap();
                let w1 = s.f64s(HIDDEN_WIDTH * FEATURE_COUNT)?;
                let b1 = s.f64s(HIDDEN_WIDTH)?;
                let w2 = s.f64s(9 * HIDDEN_WIDTH)?;
                let b2 = s.f64s(9)?;
                let mut base = [[0.0; 3]; 3];
                for row in &mut base {
                    for v in row.iter_mut() {
                        *v = s.f64()?;
                    }
                }
                predictor = Some(CasPredictor {
                    feat_mean,
                    feat_std,
                    w1,
                    b1,
                    w2,
                    b2,
                    base: Mat3(base),
                });
            }
            SEC_LUT5D => {
                let ndims = s.u32()?;
                if ndims != 5 {
                    return Err(Error::ModelFormat(format!(
                        "expected 5 table dimensions, got {ndims}"
                    )));
                }
                let mut res = [0u32; 5];
                for v in &mut res {
                    *v = s.u32()?;
                }
                if res.iter().any(|&v| v != res[0]) || res[0] < 2 {
                    return Err(Error::ModelFormat(format!(
                        "unsupported per-axis resolutions {res:?}"
                    )));
                }
                let mut domains = [(0.0, 0.0); 5];
                for d in &mut domains {
                    d.0 = s.f64()?;
                    d.1 = s.f64()?;
                }
                let n = (res[0] as usize).pow(5);
                let entries = s.f64s(n)?;
                lut5 = Some(Lut5D {
                    res: res[0] as usize,
                    entries,
                    domains,
                });
            }
            SEC_LUT1D => {
                let size = s.u32()? as usize;
                if size < 2 {
                    return Err(Error::ModelFormat(format!("1D table size {size} < 2")));
                }
                let lo = s.f64()?;
                let hi = s.f64()?;
                let entries = s.f64s(size)?;
                lut1 = Some(Lut1D {
                    entries,
                    domain: (lo, hi),
                });
            }
            SEC_COORD_NORM => {
                norm = Some(CoordNorm {
                    lum_lo: s.f64()?,
                    lum_hi: s.f64()?,
                    g_max: s.f64()?,
                });
            }
            SEC_LOSS_WEIGHTS => {
                weights = Some(LossWeights {
                    l1: s.f64()?,
                    p: s.f64()?,
                    chroma: s.f64()?,
                    smooth: s.f64()?,
                    align: s.f64()?,
                });
            }
            other => {
                return Err(Error::ModelFormat(format!("unknown section id {other}")));
            }
        }
        if !s.done() {
            return Err(Error::ModelFormat(format!(
                "section {id} has {} unread bytes",
                body.len() - s.pos
            )));
        }
    }

    Ok(Model {
        predictor: predictor.ok_or_else(|| Error::ModelFormat("missing predictor".into()))?,
        lut5: lut5.ok_or_else(|| Error::ModelFormat("missing 5D table".into()))?,
        lut1: lut1.ok_or_else(|| Error::ModelFormat("missing 1D table".into()))?,
        norm: norm.ok_or_else(|| Error::ModelFormat("missing coordinate norm".into()))?,
        weights: weights.ok_or_else(|| Error::ModelFormat("missing loss weights".into()))?,
    })
}

pub fn save(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
