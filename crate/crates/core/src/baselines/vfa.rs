//! Vector function architecture baseline.
//!
//! The function is assumed to be a kernel mixture `f(x) = sum_k c_k K(x, x_k)`
//! with `K(x, x') = exp(-gamma |x - x'|^2)`. It is stored as
//! `F = sum_k c_k E_X(x_k)` and evaluated as `Re<F, E_X(x0)> / N`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::codec::SampleSet;
use crate::error::{HdfeError, Result};
use crate::fpe::EncodingConfig;
use crate::hv::{re_inner, HyperVector};

#[derive(Debug, Clone, PartialEq)]
pub struct VfaEncoding {
    pub vector: HyperVector,
    pub gamma: f64,
    pub config_fingerprint: u64,
    pub coefficients: Vec<f64>,
    /// Set when every coefficient is zero.
    pub degenerate: bool,
}

impl VfaEncoding {
    /// Element-wise sum of two encodings over the same config.
    pub fn add(&self, other: &VfaEncoding) -> Result<VfaEncoding> {
        if self.config_fingerprint != other.config_fingerprint {
            return Err(HdfeError::ConfigMismatch {
                encoding: other.config_fingerprint,
                config: self.config_fingerprint,
            });
        }
        let vector = self.vector.add(&other.vector)?;
        let coefficients: Vec<f64> = self
            .coefficients
            .iter()
            .chain(&other.coefficients)
            .copied()
            .collect();
        Ok(VfaEncoding {
            degenerate: vector.values().iter().all(|v| v.norm_sqr() == 0.0),
            vector,
            gamma: self.gamma,
            config_fingerprint: self.config_fingerprint,
            coefficients,
        })
    }
}

/// Kernel width whose RBF matches the input encoder's real inner product,
/// `exp(-(alpha/m)^2 d^2 / 2)`.
pub fn matched_gamma(cfg: &EncodingConfig) -> f64 {
    let a = cfg.alpha() / cfg.input_dim() as f64;
    a * a / 2.0
}

/// The default regularizer, `1e-6 * n`.
pub fn default_ridge_lambda(n: usize) -> f64 {
    1e-6 * n as f64
}

fn kernel(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Solves `(K + lambda I) c = y` at the sample points and encodes the result.
pub fn vfa_fit(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    gamma: f64,
    ridge_lambda: f64,
) -> Result<VfaEncoding> {
    let ys = samples
        .outputs()
        .ok_or(HdfeError::WrongCodec("VFA needs explicit samples"))?;
    if samples.is_empty() {
        return Err(HdfeError::EmptySamples);
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(HdfeError::param("gamma", "must be positive"));
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(HdfeError::param("ridge_lambda", "must be nonnegative"));
    }
    let n = samples.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        kernel(gamma, samples.input(i), samples.input(j)) + if i == j { ridge_lambda } else { 0.0 }
    });
    let rhs = DVector::from_column_slice(ys);
    let c = match k.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => k
            .lu()
            .solve(&rhs)
            .ok_or_else(|| HdfeError::Solver("singular kernel system".into()))?,
    };
    if c.iter().any(|v| !v.is_finite()) {
        return Err(HdfeError::Solver("non-finite kernel coefficients".into()));
    }
    vfa_from_coefficients(cfg, samples, c.as_slice(), gamma)
}

/// Encodes known mixture coefficients `c_k` at the centers in `centers`.
pub fn vfa_from_coefficients(
    cfg: &EncodingConfig,
    centers: &SampleSet,
    coefficients: &[f64],
    gamma: f64,
) -> Result<VfaEncoding> {
    if centers.len() != coefficients.len() {
        return Err(HdfeError::Dimension {
            expected: centers.len(),
            got: coefficients.len(),
        });
    }
    if centers.input_dim() != cfg.input_dim() {
        return Err(HdfeError::Dimension {
            expected: cfg.input_dim(),
            got: centers.input_dim(),
        });
    }
    let dim = cfg.dim();
    let mut f = vec![Complex64::new(0.0, 0.0); dim];
    let mut row = vec![Complex64::new(0.0, 0.0); dim];
    for (i, &c) in coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        cfg.sample_into(centers.input(i), None, &mut row);
        for (o, z) in f.iter_mut().zip(&row) {
            *o += z * c;
        }
    }
    let degenerate = coefficients.iter().all(|c| *c == 0.0);
    Ok(VfaEncoding {
        vector: HyperVector::from_values(f),
        gamma,
        config_fingerprint: cfg.fingerprint(),
        coefficients: coefficients.to_vec(),
        degenerate,
    })
}

pub fn vfa_eval(cfg: &EncodingConfig, enc: &VfaEncoding, x0: &[f64]) -> Result<f64> {
    if enc.config_fingerprint != cfg.fingerprint() {
        return Err(HdfeError::ConfigMismatch {
            encoding: enc.config_fingerprint,
            config: cfg.fingerprint(),
        });
    }
    let e = cfg.encode_input(x0)?;
    Ok(re_inner(enc.vector.values(), e.values()) / cfg.dim() as f64)
}

/// Direct kernel-mixture evaluation, no hypervectors involved.
pub fn kernel_mixture(centers: &SampleSet, coefficients: &[f64], gamma: f64, x: &[f64]) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| c * kernel(gamma, centers.input(i), x))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_outputs_are_degenerate() {
        let cfg = EncodingConfig::new(64, 1, 10.0, 2.5, 1).unwrap();
        let s = SampleSet::scalar(&[0.1, 0.5, 0.9], &[0.0, 0.0, 0.0]).unwrap();
        let e = vfa_fit(&cfg, &s, matched_gamma(&cfg), 1e-6).unwrap();
        assert!(e.degenerate);
        assert!(e.coefficients.iter().all(|c| *c == 0.0));
        assert_eq!(vfa_eval(&cfg, &e, &[0.5]).unwrap(), 0.0);
    }

    #[test]
    fn single_coefficient_self_similarity() {
        let cfg = EncodingConfig::new(8192, 1, 10.0, 2.5, 1).unwrap();
        let tol = 4.0 / (cfg.dim() as f64).sqrt();
        let c = SampleSet::implicit(1, vec![0.4]).unwrap();
        let e = vfa_from_coefficients(&cfg, &c, &[1.0], matched_gamma(&cfg)).unwrap();
        assert!((vfa_eval(&cfg, &e, &[0.4]).unwrap() - 1.0).abs() <= tol);
        // Far outside the kernel width 1/sqrt(50).
        assert!(vfa_eval(&cfg, &e, &[3.0]).unwrap().abs() <= tol);
    }

    #[test]
    fn evaluation_is_linear() {
        let cfg = EncodingConfig::new(256, 1, 10.0, 2.5, 1).unwrap();
        let c1 = SampleSet::implicit(1, vec![0.2, 0.6]).unwrap();
        let c2 = SampleSet::implicit(1, vec![0.3]).unwrap();
        let a = vfa_from_coefficients(&cfg, &c1, &[0.5, -1.0], 50.0).unwrap();
        let b = vfa_from_coefficients(&cfg, &c2, &[2.0], 50.0).unwrap();
        let sum = a.add(&b).unwrap();
        for x in [0.0, 0.25, 0.7] {
            let lhs = vfa_eval(&cfg, &sum, &[x]).unwrap();
            let rhs = vfa_eval(&cfg, &a, &[x]).unwrap() + vfa_eval(&cfg, &b, &[x]).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_matches_encoder_inner_product() {
        let cfg = EncodingConfig::new(8192, 1, 10.0, 2.5, 2).unwrap();
        let g = matched_gamma(&cfg);
        let e0 = cfg.encode_input(&[0.3]).unwrap();
        for d in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let e1 = cfg.encode_input(&[0.3 + d]).unwrap();
            let ip = re_inner(e0.values(), e1.values()) / cfg.dim() as f64;
            assert!((ip - (-g * d * d).exp()).abs() <= 4.0 / 8192f64.sqrt(), "d={d}");
        }
    }

    #[test]
    fn fit_interpolates_at_samples() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let s = SampleSet::scalar(&xs, &ys).unwrap();
        let cfg = EncodingConfig::new(64, 1, 10.0, 2.5, 1).unwrap();
        let e = vfa_fit(&cfg, &s, 50.0, 1e-9).unwrap();
        for i in 0..xs.len() {
            let f = kernel_mixture(&s, &e.coefficients, 50.0, &[xs[i]]);
            assert!((f - ys[i]).abs() < 1e-6);
        }
    }
}
