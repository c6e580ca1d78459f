//! Binary encoding files.
//!
//! Layout, all little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4 | magic `HDFE` |
//! | 2 | format version (u16) |
//! | 4 | N (u32) |
//! | 2 | m (u16) |
//! | 8 | alpha (f64) |
//! | 8 | beta (f64) |
//! | 8 | config seed (u64) |
//! | 1 | refinement tag (0 none, 1 one-shot, 2 iterative) |
//! | 16 N | vector as (re f64, im f64) pairs |
//! | 1 | weights flag (0 absent, 1 present) |
//! | 8 + 8 n | weight count (u64) then the weights (f64), when present |
//!
//! The config is rebuilt from the header, so a file is self-contained.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::codec::{FunctionEncoding, Refinement};
use crate::error::{HdfeError, Result};
use crate::fpe::EncodingConfig;
use crate::hv::HyperVector;

pub const MAGIC: &[u8; 4] = b"HDFE";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 4 + 2 + 8 + 8 + 8 + 1;

/// Header fields of an encoding file.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub version: u16,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub refinement: Refinement,
}

impl Header {
    pub fn config(&self) -> Result<EncodingConfig> {
        EncodingConfig::new(self.n, self.m, self.alpha, self.beta, self.seed)
    }
}

pub fn write_encoding<W: Write>(
    out: &mut W,
    cfg: &EncodingConfig,
    enc: &FunctionEncoding,
) -> Result<()> {
    enc.check_config(cfg)?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * cfg.dim() + 9);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(cfg.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(cfg.input_dim() as u16).to_le_bytes());
    buf.extend_from_slice(&cfg.alpha().to_le_bytes());
    buf.extend_from_slice(&cfg.beta().to_le_bytes());
    buf.extend_from_slice(&cfg.seed().to_le_bytes());
    buf.push(enc.refinement.tag());
    for v in enc.vector.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    match &enc.weights {
        None => buf.push(0),
        Some(w) => {
            buf.push(1);
            buf.extend_from_slice(&(w.len() as u64).to_le_bytes());
            for x in w {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out.write_all(&buf)
        .map_err(|e| HdfeError::io("<stream>", e))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize, what: &str) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < k {
            return Err(HdfeError::Format {
                offset: self.pos,
                reason: format!("truncated while reading {what}"),
            });
        }
        let s = &self.data[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn bad(offset: usize, reason: impl Into<String>) -> HdfeError {
    HdfeError::Format {
        offset,
        reason: reason.into(),
    }
}

pub fn read_header(data: &[u8]) -> Result<Header> {
    let mut c = Cursor { data, pos: 0 };
    parse_header(&mut c)
}

fn parse_header(c: &mut Cursor<'_>) -> Result<Header> {
    let magic = c.take(4, "magic")?;
    if magic != MAGIC {
        return Err(bad(0, "bad magic, not an HDFE encoding"));
    }
    let at = c.pos;
    let version = c.u16("format version")?;
    if version != FORMAT_VERSION {
        return Err(bad(at, format!("unsupported format version {version}")));
    }
    let at = c.pos;
    let n = c.u32("N")? as usize;
    if n == 0 {
        return Err(bad(at, "N is zero"));
    }
    let at = c.pos;
    let m = c.u16("m")? as usize;
    if m == 0 {
        return Err(bad(at, "m is zero"));
    }
    let at = c.pos;
    let alpha = c.f64("alpha")?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(bad(at, format!("alpha {alpha} is not positive")));
    }
    let at = c.pos;
    let beta = c.f64("beta")?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(bad(at, format!("beta {beta} is not positive")));
    }
    let seed = c.u64("seed")?;
    let at = c.pos;
    let tag = c.u8("refinement tag")?;
    let refinement =
        Refinement::from_tag(tag).ok_or_else(|| bad(at, format!("unknown refinement tag {tag}")))?;
    Ok(Header {
        version,
        n,
        m,
        alpha,
        beta,
        seed,
        refinement,
    })
}

/// Parses an encoding file and rebuilds its config.
pub fn read_encoding_bytes(data: &[u8]) -> Result<(EncodingConfig, FunctionEncoding)> {
    let mut c = Cursor { data, pos: 0 };
    let header = parse_header(&mut c)?;
    let mut values = Vec::with_capacity(header.n);
    for k in 0..header.n {
        let at = c.pos;
        let re = c.f64("vector")?;
        let im = c.f64("vector")?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad(at, format!("non-finite element {k}")));
        }
        values.push(Complex64::new(re, im));
    }
    let at = c.pos;
    let weights = match c.u8("weights flag")? {
        0 => None,
        1 => {
            let at = c.pos;
            let count = c.u64("weight count")?;
            let remaining = (data.len() - c.pos) / 8;
            if count as usize > remaining {
                return Err(bad(at, format!("weight count {count} exceeds the file")));
            }
            let mut w = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let at = c.pos;
                let x = c.f64("weights")?;
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(bad(at, format!("invalid weight {x}")));
                }
                w.push(x);
            }
            Some(w)
        }
        f => return Err(bad(at, format!("unknown weights flag {f}"))),
    };
    if c.pos != data.len() {
        return Err(bad(c.pos, "trailing bytes after encoding"));
    }
    let cfg = header.config()?;
    let enc = FunctionEncoding {
        vector: HyperVector::from_values(values),
        config_fingerprint: cfg.fingerprint(),
        refinement: header.refinement,
        weights,
    };
    Ok((cfg, enc))
}

pub fn read_encoding<R: Read>(input: &mut R) -> Result<(EncodingConfig, FunctionEncoding)> {
    let mut data = Vec::new();
    input
        .read_to_end(&mut data)
        .map_err(|e| HdfeError::io("<stream>", e))?;
    read_encoding_bytes(&data)
}

pub fn save(path: &Path, cfg: &EncodingConfig, enc: &FunctionEncoding) -> Result<()> {
    let mut buf = Vec::new();
    write_encoding(&mut buf, cfg, enc)?;
    std::fs::write(path, buf).map_err(|e| HdfeError::io(path, e))
}

pub fn load(path: &Path) -> Result<(EncodingConfig, FunctionEncoding)> {
    let data = std::fs::read(path).map_err(|e| HdfeError::io(path, e))?;
    read_encoding_bytes(&data)
}
