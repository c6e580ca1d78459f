//! Sample re-weighting.
//!
//! Iterative refinement drives the superposition toward the center of the
//! smallest ball enclosing all sample encodings. For rows of equal norm that
//! center is the minimum-norm point of their convex hull, and its direction
//! maximizes `min_i cos(F, z_i)`. Each step picks `j = argmin_i cos(F, z_i)`
//! (lowest index on ties) and moves toward `z_j`. The default step length is
//! the exact line search on `|F|^2`; [`StepRule::Unit`] adds `z_j` with unit
//! weight instead.

use serde::{Deserialize, Serialize};

use crate::codec::bank::{gram_row, re_inner_all, weighted_sum, DenseRows, EncodingSource};
use crate::codec::Refinement;
use crate::error::{HdfeError, Result};
use crate::hv::{norm_sqr, HyperVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    LineSearch,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub max_steps: usize,
    /// Floor applied to similarities before inverting them (one-shot).
    pub epsilon: f64,
    /// Minimum increase of the monitored minimum that counts as progress.
    pub tolerance: f64,
    /// Consecutive non-improving candidates tolerated before stopping.
    /// `1` stops at the first candidate that fails to improve.
    pub patience: usize,
    pub step: StepRule,
    /// Run exactly `max_steps` steps regardless of progress. Used for timing.
    pub force_steps: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_steps: 200,
            epsilon: 1e-3,
            tolerance: 1e-6,
            patience: 1,
            step: StepRule::LineSearch,
            force_steps: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Not an iterative run.
    NotIterative,
    /// Every row already has similarity one with the superposition.
    AlreadyOptimal,
    /// The line search returned a zero step.
    Stationary,
    NoImprovement,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineTrace {
    /// Monitored `min_i cos(F, z_i)` at initialization followed by its value
    /// after each accepted step.
    pub accepted_min: Vec<f64>,
    pub steps: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct Refined {
    pub weights: Vec<f64>,
    pub vector: HyperVector,
    pub trace: RefineTrace,
}

/// Re-weights explicitly supplied encodings and returns the weights with the
/// normalized superposition.
pub fn refine_weights(
    sample_encodings: &[HyperVector],
    mode: Refinement,
    max_steps: usize,
    epsilon: f64,
) -> Result<(Vec<f64>, HyperVector)> {
    if sample_encodings.is_empty() {
        return Err(HdfeError::EmptySamples);
    }
    let dim = sample_encodings[0].len();
    for v in sample_encodings {
        if v.len() != dim {
            return Err(HdfeError::Dimension {
                expected: dim,
                got: v.len(),
            });
        }
    }
    let opts = RefineOptions {
        max_steps,
        epsilon,
        ..RefineOptions::default()
    };
    let r = refine_source(&DenseRows(sample_encodings), mode, &opts)?;
    Ok((r.weights, r.vector))
}

pub fn refine_source<S: EncodingSource>(
    src: &S,
    mode: Refinement,
    opts: &RefineOptions,
) -> Result<Refined> {
    let n = src.count();
    if n == 0 {
        return Err(HdfeError::EmptySamples);
    }
    if !(opts.epsilon > 0.0) {
        return Err(HdfeError::param("epsilon", "must be positive"));
    }
    let trace0 = RefineTrace {
        accepted_min: Vec::new(),
        steps: 0,
        stop: StopReason::NotIterative,
    };
    match mode {
        Refinement::None => {
            let weights = vec![1.0; n];
            let vector = finish(src, &weights)?;
            Ok(Refined {
                weights,
                vector,
                trace: trace0,
            })
        }
        Refinement::OneShot => {
            let weights = one_shot_weights(src, opts.epsilon)?;
            let vector = finish(src, &weights)?;
            Ok(Refined {
                weights,
                vector,
                trace: trace0,
            })
        }
        Refinement::Iterative => iterative(src, opts),
    }
}

fn finish<S: EncodingSource>(src: &S, weights: &[f64]) -> Result<HyperVector> {
    let f = weighted_sum(src, weights);
    let norm = norm_sqr(&f).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(HdfeError::Normalization);
    }
    Ok(HyperVector::from_values(f.into_iter().map(|v| v / norm).collect()))
}

fn row_norms<S: EncodingSource>(src: &S) -> Vec<f64> {
    (0..src.count()).map(|i| src.row_norm_sqr(i).sqrt()).collect()
}

/// Inverse-similarity weights: `w_i = 1 / max(eps, cos(F0, z_i))`, scaled to
/// sum to one, where `F0` is the unweighted superposition.
fn one_shot_weights<S: EncodingSource>(src: &S, epsilon: f64) -> Result<Vec<f64>> {
    let n = src.count();
    let f0 = weighted_sum(src, &vec![1.0; n]);
    let fnorm = norm_sqr(&f0).sqrt();
    if fnorm == 0.0 {
        return Err(HdfeError::Normalization);
    }
    let norms = row_norms(src);
    let g = re_inner_all(src, &f0);
    let mut w: Vec<f64> = g
        .iter()
        .zip(&norms)
        .map(|(gi, zi)| 1.0 / (gi / (fnorm * zi)).max(epsilon))
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

fn monitored_min(g: &[f64], norms: &[f64], fsq: f64) -> (usize, f64) {
    let fnorm = fsq.max(0.0).sqrt();
    let mut best = (0, f64::INFINITY);
    for (i, (gi, zi)) in g.iter().zip(norms).enumerate() {
        let s = gi / (fnorm * zi);
        if s < best.1 {
            best = (i, s);
        }
    }
    best
}

fn iterative<S: EncodingSource>(src: &S, opts: &RefineOptions) -> Result<Refined> {
    let n = src.count();
    let norms = row_norms(src);
    let mut w = vec![1.0; n];
    let total: f64 = n as f64;
    let f0 = weighted_sum(src, &w);
    let mut fsq = norm_sqr(&f0);
    if fsq == 0.0 {
        return Err(HdfeError::Normalization);
    }
    // g[i] = Re<F, z_i>, kept current with one Gram row per step.
    let mut g = re_inner_all(src, &f0);
    drop(f0);

    let (_, start_min) = monitored_min(&g, &norms, fsq);
    let mut best_min = start_min;
    let mut best_w = w.clone();
    let mut accepted = vec![start_min];
    let mut fails = 0;
    let mut steps = 0;
    let mut stop = StopReason::MaxSteps;

    if start_min >= 1.0 - 1e-12 && !opts.force_steps {
        stop = StopReason::AlreadyOptimal;
    } else {
        let mut sum_w = total;
        while steps < opts.max_steps {
            let (j, _) = monitored_min(&g, &norms, fsq);
            let row = gram_row(src, j);
            let gj = g[j];
            let zjj = row[j];
            steps += 1;
            match opts.step {
                StepRule::LineSearch => {
                    // F' = (1 - t) F + t W z_j, W = sum of weights.
                    let denom = fsq - 2.0 * sum_w * gj + sum_w * sum_w * zjj;
                    let t = if denom > 0.0 {
                        ((fsq - sum_w * gj) / denom).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    if t == 0.0 && !opts.force_steps {
                        stop = StopReason::Stationary;
                        break;
                    }
                    let keep = 1.0 - t;
                    fsq = keep * keep * fsq
                        + 2.0 * t * keep * sum_w * gj
                        + t * t * sum_w * sum_w * zjj;
                    for (gi, rji) in g.iter_mut().zip(&row) {
                        *gi = keep * *gi + t * sum_w * rji;
                    }
                    for wi in w.iter_mut() {
                        *wi *= keep;
                    }
                    w[j] += t * sum_w;
                }
                StepRule::Unit => {
                    fsq += 2.0 * gj + zjj;
                    for (gi, rji) in g.iter_mut().zip(&row) {
                        *gi += rji;
                    }
                    w[j] += 1.0;
                    sum_w += 1.0;
                }
            }
            let (_, m) = monitored_min(&g, &norms, fsq);
            if m >= best_min + opts.tolerance {
                best_min = m;
                best_w.copy_from_slice(&w);
                accepted.push(m);
                fails = 0;
            } else {
                fails += 1;
                if !opts.force_steps && fails >= opts.patience.max(1) {
                    stop = StopReason::NoImprovement;
                    break;
                }
            }
        }
    }

    let vector = finish(src, &best_w)?;
    Ok(Refined {
        weights: best_w,
        vector,
        trace: RefineTrace {
            accepted_min: accepted,
            steps,
            stop,
        },
    })
}
