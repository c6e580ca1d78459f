//! Access to the per-sample encodings `z_i` without forcing them all into
//! memory.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::codec::samples::SampleSet;
use crate::fpe::EncodingConfig;
use crate::hv::{norm_sqr, re_inner, HyperVector};

/// Above this many bytes the bank recomputes rows on demand instead of
/// caching them. Both paths do the same arithmetic and agree bit for bit.
pub const CACHE_LIMIT_BYTES: usize = 1 << 30;

/// A fixed, indexable family of equal-length complex vectors.
pub trait EncodingSource: Sync {
    fn count(&self) -> usize;
    fn dim(&self) -> usize;
    fn with_row<R>(&self, i: usize, f: impl FnOnce(&[Complex64]) -> R) -> R;

    fn row_norm_sqr(&self, i: usize) -> f64 {
        self.with_row(i, norm_sqr)
    }
}

/// Borrowed rows, e.g. encodings supplied directly by a caller.
pub struct DenseRows<'a>(pub &'a [HyperVector]);

impl EncodingSource for DenseRows<'_> {
    fn count(&self) -> usize {
        self.0.len()
    }

    fn dim(&self) -> usize {
        self.0.first().map_or(0, |v| v.len())
    }

    fn with_row<R>(&self, i: usize, f: impl FnOnce(&[Complex64]) -> R) -> R {
        f(self.0[i].values())
    }
}

/// Sample encodings `E_X(x_i) (x) E_Y(y_i)` (or `E_X(x_i)` for implicit sets)
/// for one config and sample set.
pub struct SampleBank<'a> {
    cfg: &'a EncodingConfig,
    samples: &'a SampleSet,
    cache: Option<Vec<Complex64>>,
}

impl<'a> SampleBank<'a> {
    /// Caches the rows when they fit under [`CACHE_LIMIT_BYTES`].
    pub fn new(cfg: &'a EncodingConfig, samples: &'a SampleSet) -> Self {
        let bytes = samples
            .len()
            .saturating_mul(cfg.dim())
            .saturating_mul(std::mem::size_of::<Complex64>());
        if bytes <= CACHE_LIMIT_BYTES {
            SampleBank::cached(cfg, samples)
        } else {
            SampleBank::streaming(cfg, samples)
        }
    }

    pub fn cached(cfg: &'a EncodingConfig, samples: &'a SampleSet) -> Self {
        let n = cfg.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); samples.len() * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            cfg.sample_into(samples.input(i), samples.output(i), row);
        });
        SampleBank {
            cfg,
            samples,
            cache: Some(data),
        }
    }

    pub fn streaming(cfg: &'a EncodingConfig, samples: &'a SampleSet) -> Self {
        SampleBank {
            cfg,
            samples,
            cache: None,
        }
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }
}

impl EncodingSource for SampleBank<'_> {
    fn count(&self) -> usize {
        self.samples.len()
    }

    fn dim(&self) -> usize {
        self.cfg.dim()
    }

    fn with_row<R>(&self, i: usize, f: impl FnOnce(&[Complex64]) -> R) -> R {
        let n = self.cfg.dim();
        match &self.cache {
            Some(data) => f(&data[i * n..(i + 1) * n]),
            None => {
                let mut row = vec![Complex64::new(0.0, 0.0); n];
                self.cfg
                    .sample_into(self.samples.input(i), self.samples.output(i), &mut row);
                f(&row)
            }
        }
    }

    fn row_norm_sqr(&self, _i: usize) -> f64 {
        // Phase rows: every element has modulus one.
        self.cfg.dim() as f64
    }
}

/// `sum_i w_i z_i`, accumulated in index order.
pub fn weighted_sum<S: EncodingSource>(src: &S, weights: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.dim()];
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        src.with_row(i, |row| {
            for (o, z) in out.iter_mut().zip(row) {
                *o += z * w;
            }
        });
    }
    out
}

/// `Re<v, z_i>` for every row.
pub fn re_inner_all<S: EncodingSource>(src: &S, v: &[Complex64]) -> Vec<f64> {
    (0..src.count())
        .into_par_iter()
        .map(|i| src.with_row(i, |row| re_inner(v, row)))
        .collect()
}

/// Row `j` of the real Gram matrix, `Re<z_j, z_i>` for every `i`.
pub fn gram_row<S: EncodingSource>(src: &S, j: usize) -> Vec<f64> {
    let zj = src.with_row(j, |row| row.to_vec());
    re_inner_all(src, &zj)
}
