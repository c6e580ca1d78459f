//! Reading values back out of an encoding.
//!
//! For a query `x0` the unbound vector `z = F / E_X(x0)` is compared with
//! `E_Y(y)` under the quad convention:
//!
//! ```text
//! J(y) = |sum_k z_k exp(-i b_k y)|^2 / N^2,    b_k = beta * Psi_k
//! ```
//!
//! with `z` rescaled so that `mean |z_k|^2 = 1`. The decoded value is the
//! argmax of `J` over `[0, 1]`.

use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::FunctionEncoding;
use crate::error::{HdfeError, Result};
use crate::fpe::EncodingConfig;
use crate::hv::{cis, norm_sqr, similarity, Convention, HyperVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeMode {
    Gradient,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOptions {
    pub mode: DecodeMode,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Entries per subsampled gradient estimate. Capped at N.
    pub subsample_size: usize,
    pub restarts: usize,
    /// Candidates in the argmax grid (grid mode) or the restart grid
    /// (gradient mode).
    pub grid_resolution: usize,
    pub seed: u64,
    /// Convergence threshold on the change of the subsampled objective.
    pub tolerance: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            mode: DecodeMode::Gradient,
            learning_rate: 0.05,
            max_iters: 500,
            subsample_size: 500,
            restarts: 8,
            grid_resolution: 64,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

impl DecodeOptions {
    pub fn grid(resolution: usize) -> Self {
        DecodeOptions {
            mode: DecodeMode::Grid,
            grid_resolution: resolution,
            ..DecodeOptions::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid_resolution < 2 {
            return Err(HdfeError::Resolution {
                got: self.grid_resolution,
                min: 2,
            });
        }
        if self.subsample_size < 2 {
            return Err(HdfeError::param("subsample_size", "must be at least 2"));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(HdfeError::param("restarts/max_iters", "must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(HdfeError::param("learning_rate", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub y: f64,
    /// Full objective `J(y)`.
    pub objective: f64,
    pub converged: bool,
}

/// `J(y)` and its derivatives for one query point.
#[derive(Debug, Clone)]
pub struct DecodeObjective {
    z: Vec<Complex64>,
    b: Vec<f64>,
}

/// Decay constant of the learning-rate schedule `lr / (1 + t / LR_DECAY)`.
const LR_DECAY: f64 = 25.0;

/// Steps taken before the convergence test may stop an ascent.
const BURN_IN: usize = 100;

const POLISH_STEPS: usize = 50;
const POLISH_STEP_TOL: f64 = 1e-9;

impl DecodeObjective {
    pub fn new(cfg: &EncodingConfig, enc: &FunctionEncoding, x0: &[f64]) -> Result<Self> {
        enc.check_config(cfg)?;
        cfg.check_input(x0)?;
        let ex = cfg.encode_input(x0)?;
        let mut z: Vec<Complex64> = enc
            .vector
            .values()
            .iter()
            .zip(ex.values())
            .map(|(f, e)| f * e.conj())
            .collect();
        let scale = (z.len() as f64 / norm_sqr(&z)).sqrt();
        if !scale.is_finite() {
            return Err(HdfeError::Normalization);
        }
        for v in &mut z {
            *v *= scale;
        }
        let b = cfg.psi().iter().map(|p| p * cfg.beta()).collect();
        Ok(DecodeObjective { z, b })
    }

    /// Builds the objective from an already-unbound vector.
    pub fn from_unbound(z: &HyperVector, cfg: &EncodingConfig) -> Result<Self> {
        if z.len() != cfg.dim() {
            return Err(HdfeError::Dimension {
                expected: cfg.dim(),
                got: z.len(),
            });
        }
        let scale = (z.len() as f64 / z.norm().powi(2)).sqrt();
        if !scale.is_finite() {
            return Err(HdfeError::Normalization);
        }
        Ok(DecodeObjective {
            z: z.values().iter().map(|v| v * scale).collect(),
            b: cfg.psi().iter().map(|p| p * cfg.beta()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    fn sums(&self, y: f64, idx: Option<&[usize]>) -> (Complex64, Complex64, usize) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        let mut term = |k: usize| {
            let t = self.z[k] * cis(-self.b[k] * y);
            s += t;
            // d/dy of t is -i b_k t.
            ds += Complex64::new(self.b[k] * t.im, -self.b[k] * t.re);
        };
        match idx {
            Some(idx) => {
                for &k in idx {
                    term(k);
                }
                (s, ds, idx.len())
            }
            None => {
                for k in 0..self.z.len() {
                    term(k);
                }
                (s, ds, self.z.len())
            }
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        let (s, _, n) = self.sums(y, None);
        s.norm_sqr() / (n * n) as f64
    }

    /// `J(y)` and `dJ/dy`, exact, in O(N).
    pub fn value_and_gradient(&self, y: f64) -> (f64, f64) {
        let (s, ds, n) = self.sums(y, None);
        let nn = (n * n) as f64;
        (s.norm_sqr() / nn, 2.0 * (s.conj() * ds).re / nn)
    }

    pub fn gradient(&self, y: f64) -> f64 {
        self.value_and_gradient(y).1
    }

    /// The same gradient written as the O(N^2) pairwise sum
    /// `N^-2 sum_{p,q} a_p a_q (b_p - b_q) sin[(theta_p - theta_q) - (b_p - b_q) y]`.
    pub fn gradient_pairwise(&self, y: f64) -> f64 {
        let n = self.z.len();
        let polar: Vec<(f64, f64)> = self.z.iter().map(|v| v.to_polar()).collect();
        let mut total = 0.0;
        for p in 0..n {
            let (ap, tp) = polar[p];
            let mut row = 0.0;
            for q in 0..n {
                let (aq, tq) = polar[q];
                let db = self.b[p] - self.b[q];
                row += aq * db * ((tp - tq) - db * y).sin();
            }
            total += ap * row;
        }
        total / (n * n) as f64
    }

    /// Objective restricted to the entries in `idx`, with an unbiased
    /// estimate of the full gradient built from the same entries.
    pub fn subset_value_and_gradient(&self, y: f64, idx: &[usize]) -> (f64, f64) {
        let n = self.z.len() as f64;
        let (s, ds, k) = self.sums(y, Some(idx));
        let kf = k as f64;
        let value = s.norm_sqr() / (kf * kf);
        if k < 2 {
            return (value, 0.0);
        }
        // Diagonal terms of the pair sum vanish, so the off-diagonal sum is
        // 2 Re(conj(S) S'). Rescale from |S|(|S|-1) pairs to N(N-1) pairs.
        let pair_sum = 2.0 * (s.conj() * ds).re;
        let grad = pair_sum * (n - 1.0) / (n * kf * (kf - 1.0));
        (value, grad)
    }

    pub fn subset_value(&self, y: f64, idx: &[usize]) -> f64 {
        let (s, _, k) = self.sums(y, Some(idx));
        s.norm_sqr() / (k * k) as f64
    }

    /// `J` at `resolution` evenly spaced points of `[0, 1]`, via the phase
    /// recurrence `exp(-i b y_{r+1}) = exp(-i b y_r) exp(-i b dy)`.
    pub fn grid(&self, resolution: usize) -> Vec<f64> {
        let n = self.z.len();
        let dy = 1.0 / (resolution - 1) as f64;
        let step: Vec<Complex64> = self.b.iter().map(|b| cis(-b * dy)).collect();
        let mut cur = self.z.clone();
        let nn = (n * n) as f64;
        let mut out = Vec::with_capacity(resolution);
        for r in 0..resolution {
            let s: Complex64 = cur.iter().sum();
            out.push(s.norm_sqr() / nn);
            if r + 1 < resolution {
                for (c, st) in cur.iter_mut().zip(&step) {
                    *c *= st;
                }
            }
        }
        out
    }
}

fn grid_y(r: usize, resolution: usize) -> f64 {
    r as f64 / (resolution - 1) as f64
}

/// Index of the largest value, first one on ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn ascend(
    obj: &DecodeObjective,
    y0: f64,
    opts: &DecodeOptions,
    sub: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, bool) {
    let n = obj.dim();
    let full = sub >= n;
    let all: Vec<usize> = if full { (0..n).collect() } else { Vec::new() };
    let mut y = y0;
    let mut path = Vec::with_capacity(opts.max_iters);
    // Subsampled steps jitter around the optimum; the mean of the second
    // half of the path is a far better estimate than the last point.
    let settle = |path: &[f64]| {
        let tail = &path[path.len() / 2..];
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    for t in 0..opts.max_iters {
        let idx = if full {
            all.clone()
        } else {
            index::sample(rng, n, sub).into_vec()
        };
        let (v, g) = obj.subset_value_and_gradient(y, &idx);
        if !(v > 0.0) {
            return (y, false);
        }
        // Steps on ln J: its curvature at a peak is about beta^2 E[Psi^2]
        // whatever the peak height, so one learning rate fits all encodings.
        let lr = opts.learning_rate / (1.0 + t as f64 / LR_DECAY);
        let next = (y + lr * g / v).clamp(0.0, 1.0);
        let v_next = obj.subset_value(next, &idx);
        y = next;
        path.push(y);
        if t >= BURN_IN && (v_next.ln() - v.ln()).abs() < opts.tolerance {
            return (settle(&path), true);
        }
    }
    (settle(&path), false)
}

pub fn decode_detailed(
    cfg: &EncodingConfig,
    enc: &FunctionEncoding,
    x0: &[f64],
    opts: &DecodeOptions,
) -> Result<DecodeOutcome> {
    opts.validate()?;
    let obj = DecodeObjective::new(cfg, enc, x0)?;
    Ok(decode_objective(&obj, opts))
}

pub(crate) fn decode_objective(obj: &DecodeObjective, opts: &DecodeOptions) -> DecodeOutcome {
    let res = opts.grid_resolution;
    let values = obj.grid(res);
    if opts.mode == DecodeMode::Grid {
        let r = argmax(&values);
        return DecodeOutcome {
            y: grid_y(r, res),
            objective: values[r],
            converged: true,
        };
    }

    let mut order: Vec<usize> = (0..res).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let sub = opts.subsample_size.min(obj.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let r0 = order[0];
    let mut best = DecodeOutcome {
        y: grid_y(r0, res),
        objective: values[r0],
        converged: false,
    };
    for &r in order.iter().take(opts.restarts) {
        let (y, converged) = ascend(obj, grid_y(r, res), opts, sub, &mut rng);
        let objective = obj.value(y);
        let better = objective > best.objective
            || (objective == best.objective && y < best.y);
        if better {
            best = DecodeOutcome {
                y,
                objective,
                converged,
            };
        }
    }
    polish(obj, best, opts)
}

/// Full-gradient steps on `ln J` from the winning candidate. Subsampled
/// steps cannot resolve very flat peaks; these settle to the exact optimum.
fn polish(obj: &DecodeObjective, start: DecodeOutcome, opts: &DecodeOptions) -> DecodeOutcome {
    let mut best = start;
    for _ in 0..POLISH_STEPS {
        let (v, g) = obj.value_and_gradient(best.y);
        if !(v > 0.0) {
            return best;
        }
        let y = (best.y + opts.learning_rate * g / v).clamp(0.0, 1.0);
        let objective = obj.value(y);
        if !(objective > best.objective) {
            // Nothing left to gain at this resolution.
            best.converged = true;
            return best;
        }
        let step = (y - best.y).abs();
        best.y = y;
        best.objective = objective;
        if step < POLISH_STEP_TOL {
            best.converged = true;
            return best;
        }
    }
    best
}

/// Decoded value at `x0`. Non-converged ascents still return their best
/// point; use [`decode_detailed`] to see the flag.
pub fn decode_at(
    cfg: &EncodingConfig,
    enc: &FunctionEncoding,
    x0: &[f64],
    opts: &DecodeOptions,
) -> Result<f64> {
    decode_detailed(cfg, enc, x0, opts).map(|o| o.y)
}

/// Decodes every row of `query_points` (row-major, width m).
pub fn reconstruct(
    cfg: &EncodingConfig,
    enc: &FunctionEncoding,
    query_points: &[f64],
    opts: &DecodeOptions,
) -> Result<Vec<f64>> {
    enc.check_config(cfg)?;
    opts.validate()?;
    let m = cfg.input_dim();
    if query_points.len() % m != 0 {
        return Err(HdfeError::Dimension {
            expected: m,
            got: query_points.len() % m,
        });
    }
    query_points
        .par_chunks(m)
        .map(|x| decode_at(cfg, enc, x, opts))
        .collect()
}

/// Real-cosine similarity between the encoding and `normalize(E_X(xq))`.
pub fn query_implicit(cfg: &EncodingConfig, enc: &FunctionEncoding, xq: &[f64]) -> Result<f64> {
    enc.check_config(cfg)?;
    let e = cfg.encode_input(xq)?;
    Ok(similarity(&enc.vector, &e, Convention::RealCosine)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode_explicit, encode_implicit, Refinement, SampleSet};
    use rand::Rng;

    fn enc_of(cfg: &EncodingConfig, xs: &[f64], ys: &[f64]) -> FunctionEncoding {
        encode_explicit(cfg, &SampleSet::scalar(xs, ys).unwrap(), Refinement::None).unwrap()
    }

    #[test]
    fn single_sample_round_trip() {
        let cfg = EncodingConfig::new(2048, 1, 10.0, 2.5, 8).unwrap();
        for (x, y) in [(0.2, 0.37), (0.9, 0.05), (0.5, 0.99)] {
            let e = enc_of(&cfg, &[x], &[y]);
            let g = decode_at(&cfg, &e, &[x], &DecodeOptions::default()).unwrap();
            assert!((g - y).abs() <= 0.01, "gradient {g} vs {y}");
            let d = decode_at(&cfg, &e, &[x], &DecodeOptions::grid(1001)).unwrap();
            assert!((d - y).abs() <= 0.01, "grid {d} vs {y}");
        }
    }

    #[test]
    fn gradient_matches_pairwise_and_finite_differences() {
        let cfg = EncodingConfig::new(256, 1, 10.0, 2.5, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 + 0.25 * (6.0 * x).sin()).collect();
        let e = enc_of(&cfg, &xs, &ys);
        let obj = DecodeObjective::new(&cfg, &e, &[0.4]).unwrap();
        for i in 0..20 {
            let y = i as f64 / 19.0;
            let g = obj.gradient(y);
            let gp = obj.gradient_pairwise(y);
            assert!((g - gp).abs() <= 1e-9 * (1.0 + g.abs()), "{g} vs {gp}");
            let h = 1e-5;
            let fd = (obj.value(y + h) - obj.value(y - h)) / (2.0 * h);
            assert!((g - fd).abs() <= 1e-5 * g.abs().max(1e-3), "{g} vs {fd}");
        }
    }

    #[test]
    fn subset_of_everything_is_exact() {
        let cfg = EncodingConfig::new(64, 1, 10.0, 2.5, 8).unwrap();
        let e = enc_of(&cfg, &[0.1, 0.6], &[0.3, 0.8]);
        let obj = DecodeObjective::new(&cfg, &e, &[0.1]).unwrap();
        let all: Vec<usize> = (0..64).collect();
        let (v, g) = obj.subset_value_and_gradient(0.4, &all);
        let (fv, fg) = obj.value_and_gradient(0.4);
        assert!((v - fv).abs() < 1e-12);
        assert!((g - fg).abs() < 1e-12);
    }

    #[test]
    fn grid_recurrence_matches_direct() {
        let cfg = EncodingConfig::new(512, 1, 10.0, 2.5, 8).unwrap();
        let e = enc_of(&cfg, &[0.1, 0.6], &[0.3, 0.8]);
        let obj = DecodeObjective::new(&cfg, &e, &[0.6]).unwrap();
        let g = obj.grid(101);
        for (r, v) in g.iter().enumerate() {
            assert!((v - obj.value(r as f64 / 100.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn argmax_ties_pick_smallest() {
        assert_eq!(argmax(&[0.1, 0.5, 0.5, 0.2]), 1);
    }

    #[test]
    fn mismatched_config() {
        let cfg = EncodingConfig::new(64, 1, 10.0, 2.5, 8).unwrap();
        let other = EncodingConfig::new(64, 1, 10.0, 2.5, 9).unwrap();
        let e = enc_of(&cfg, &[0.1], &[0.3]);
        assert!(matches!(
            decode_at(&other, &e, &[0.1], &DecodeOptions::default()),
            Err(HdfeError::ConfigMismatch { .. })
        ));
        assert!(matches!(
            query_implicit(&other, &e, &[0.1]),
            Err(HdfeError::ConfigMismatch { .. })
        ));
        assert!(decode_at(&cfg, &e, &[0.1], &DecodeOptions::grid(1)).is_err());
    }

    #[test]
    fn implicit_single_point() {
        let cfg = EncodingConfig::new(256, 2, 10.0, 2.5, 8).unwrap();
        let e = encode_implicit(&cfg, &SampleSet::implicit(2, vec![0.3, 0.4]).unwrap(), Refinement::None).unwrap();
        assert!((query_implicit(&cfg, &e, &[0.3, 0.4]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = EncodingConfig::new(1024, 1, 10.0, 2.5, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..200).map(|_| rng.random()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 + 0.25 * (6.0 * x).sin()).collect();
        let e = enc_of(&cfg, &xs, &ys);
        let q: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let a = reconstruct(&cfg, &e, &q, &DecodeOptions::default()).unwrap();
        let b = reconstruct(&cfg, &e, &q, &DecodeOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
