//! Fractional power encoders.
//!
//! `E_X(x) = exp(i * (alpha / m) * Phi x)` and `E_Y(y) = exp(i * beta * Psi * y)`
//! with `Phi` (N x m) and `Psi` (N) drawn i.i.d. standard normal from a
//! seeded ChaCha20 generator.
//!
//! Sampling order: `Phi` comes from stream 0 of a generator seeded with
//! `seed`, filled row-major (`Phi[0][0], Phi[0][1], .., Phi[1][0], ..`).
//! `Psi` comes from stream 1 of the same seed, so it does not depend on `m`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HdfeError, Result};
use crate::hv::{cis, HyperVector};

pub const CONFIG_FORMAT_VERSION: u16 = 1;

pub const DEFAULT_BETA: f64 = 2.5;

#[derive(Debug, Clone)]
pub struct EncodingConfig {
    n: usize,
    m: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    phi: Vec<f64>,
    psi: Vec<f64>,
    fingerprint: u64,
}

impl PartialEq for EncodingConfig {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && self.n == other.n
            && self.m == other.m
            && self.alpha.to_bits() == other.alpha.to_bits()
            && self.beta.to_bits() == other.beta.to_bits()
            && self.seed == other.seed
    }
}

impl EncodingConfig {
    pub fn new(n: usize, m: usize, alpha: f64, beta: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(HdfeError::param("N", "must be at least 1"));
        }
        if m == 0 {
            return Err(HdfeError::param("m", "must be at least 1"));
        }
        if m > u16::MAX as usize {
            return Err(HdfeError::param("m", "must fit in 16 bits"));
        }
        if n > u32::MAX as usize {
            return Err(HdfeError::param("N", "must fit in 32 bits"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(HdfeError::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(HdfeError::param("beta", format!("must be positive, got {beta}")));
        }

        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let phi: Vec<f64> = (0..n * m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let psi: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();

        let fingerprint = fingerprint_of(n, m, alpha, beta, seed);
        Ok(EncodingConfig {
            n,
            m,
            alpha,
            beta,
            seed,
            phi,
            psi,
            fingerprint,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major N x m.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Same matrices, different `alpha`/`beta`. Cheaper than `new` and keeps
    /// `Phi`/`Psi` bit-identical.
    pub fn with_scales(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(HdfeError::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(HdfeError::param("beta", format!("must be positive, got {beta}")));
        }
        let mut out = self.clone();
        out.alpha = alpha;
        out.beta = beta;
        out.fingerprint = fingerprint_of(self.n, self.m, alpha, beta, self.seed);
        Ok(out)
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m {
            return Err(HdfeError::Dimension {
                expected: self.m,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(HdfeError::NonFinite("input coordinate"));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn input_phase(&self, k: usize, x: &[f64]) -> f64 {
        let row = &self.phi[k * self.m..(k + 1) * self.m];
        let mut s = 0.0;
        for (p, v) in row.iter().zip(x) {
            s += p * v;
        }
        s * (self.alpha / self.m as f64)
    }

    /// Writes `E_X(x) (x) E_Y(y)` (or `E_X(x)` when `y` is `None`) into `out`
    /// without allocating. Inputs must already be validated.
    pub(crate) fn sample_into(&self, x: &[f64], y: Option<f64>, out: &mut [Complex64]) {
        let by = y.map(|y| self.beta * y);
        for (k, o) in out.iter_mut().enumerate() {
            let mut phase = self.input_phase(k, x);
            if let Some(by) = by {
                phase += by * self.psi[k];
            }
            *o = cis(phase);
        }
    }

    pub fn encode_input(&self, x: &[f64]) -> Result<HyperVector> {
        self.check_input(x)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.sample_into(x, None, &mut out);
        Ok(HyperVector::from_values(out))
    }

    pub fn encode_output(&self, y: f64) -> Result<HyperVector> {
        if !y.is_finite() {
            return Err(HdfeError::NonFinite("output value"));
        }
        Ok(HyperVector::from_values(
            self.psi.iter().map(|p| cis(self.beta * p * y)).collect(),
        ))
    }

    pub fn to_doc(&self) -> ConfigDoc {
        ConfigDoc {
            n: self.n,
            m: self.m,
            alpha: self.alpha,
            beta: self.beta,
            seed: SeedRepr::from(self.seed),
            format_version: CONFIG_FORMAT_VERSION,
        }
    }

    pub fn from_doc(doc: &ConfigDoc) -> Result<Self> {
        if doc.format_version != CONFIG_FORMAT_VERSION {
            return Err(HdfeError::Config(format!(
                "unsupported format-version {}",
                doc.format_version
            )));
        }
        EncodingConfig::new(doc.n, doc.m, doc.alpha, doc.beta, doc.seed.value()?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_doc()).map_err(|e| HdfeError::Serialize(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ConfigDoc = toml::from_str(text).map_err(|e| HdfeError::Config(e.to_string()))?;
        EncodingConfig::from_doc(&doc)
    }
}

fn fingerprint_of(n: usize, m: usize, alpha: f64, beta: f64, seed: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"hdfe-config");
    h.update(CONFIG_FORMAT_VERSION.to_le_bytes());
    h.update((n as u64).to_le_bytes());
    h.update((m as u64).to_le_bytes());
    h.update(alpha.to_bits().to_le_bytes());
    h.update(beta.to_bits().to_le_bytes());
    h.update(seed.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Text form of a config. `Phi`/`Psi` are regenerated from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: SeedRepr,
    #[serde(rename = "format-version")]
    pub format_version: u16,
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written
/// as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedRepr {
    Int(i64),
    Text(String),
}

impl From<u64> for SeedRepr {
    fn from(s: u64) -> Self {
        match i64::try_from(s) {
            Ok(v) => SeedRepr::Int(v),
            Err(_) => SeedRepr::Text(s.to_string()),
        }
    }
}

impl SeedRepr {
    pub fn value(&self) -> Result<u64> {
        match self {
            SeedRepr::Int(v) => {
                u64::try_from(*v).map_err(|_| HdfeError::Config(format!("negative seed {v}")))
            }
            SeedRepr::Text(s) => s
                .parse()
                .map_err(|_| HdfeError::Config(format!("bad seed `{s}`"))),
        }
    }
}

pub fn make_config(n: usize, m: usize, alpha: f64, beta: f64, seed: u64) -> Result<EncodingConfig> {
    EncodingConfig::new(n, m, alpha, beta, seed)
}

pub fn encode_input(cfg: &EncodingConfig, x: &[f64]) -> Result<HyperVector> {
    cfg.encode_input(x)
}

pub fn encode_output(cfg: &EncodingConfig, y: f64) -> Result<HyperVector> {
    cfg.encode_output(y)
}

/// Large-N limit of the quad similarity between encodings `dist` apart,
/// for a per-unit phase scale `gamma` (`alpha / m` for inputs, `beta` for
/// outputs): `exp(-gamma^2 dist^2)`.
pub fn expected_kernel(gamma: f64, dist: f64) -> f64 {
    (-(gamma * gamma) * dist * dist).exp()
}

/// Large-N limit of the real-cosine similarity: `exp(-gamma^2 dist^2 / 2)`.
pub fn expected_real_kernel(gamma: f64, dist: f64) -> f64 {
    (-(gamma * gamma) * dist * dist / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::{bind, similarity, unbind, Convention};
    use proptest::prelude::*;

    fn quad(a: &HyperVector, b: &HyperVector) -> f64 {
        similarity(a, b, Convention::Quad).unwrap().value
    }

    #[test]
    fn frozen_draws() {
        // Pinned so an accidental change of generator or sampling order is
        // caught.
        let cfg = EncodingConfig::new(4, 2, 10.0, 2.5, 42).unwrap();
        let again = EncodingConfig::new(4, 2, 10.0, 2.5, 42).unwrap();
        assert_eq!(cfg.phi(), again.phi());
        assert_eq!(cfg.psi(), again.psi());
        let wide = EncodingConfig::new(4, 3, 10.0, 2.5, 42).unwrap();
        assert_eq!(cfg.psi(), wide.psi());
        // Row-major: the first two draws of stream 0 form row 0.
        assert_eq!(&wide.phi()[..2], &cfg.phi()[..2]);
        let other = EncodingConfig::new(4, 2, 10.0, 2.5, 43).unwrap();
        assert_ne!(cfg.phi(), other.phi());
        assert_eq!(cfg.fingerprint(), again.fingerprint());
        assert_ne!(cfg.fingerprint(), other.fingerprint());
    }

    #[test]
    fn parameter_errors() {
        assert!(EncodingConfig::new(0, 1, 1.0, 1.0, 0).is_err());
        assert!(EncodingConfig::new(1, 0, 1.0, 1.0, 0).is_err());
        assert!(EncodingConfig::new(1, 1, 0.0, 1.0, 0).is_err());
        assert!(EncodingConfig::new(1, 1, 1.0, -1.0, 0).is_err());
        assert!(EncodingConfig::new(1, 1, f64::NAN, 1.0, 0).is_err());
        let cfg = EncodingConfig::new(8, 2, 1.0, 1.0, 0).unwrap();
        assert!(matches!(
            cfg.encode_input(&[0.1]),
            Err(HdfeError::Dimension { expected: 2, got: 1 })
        ));
        assert!(cfg.encode_output(f64::INFINITY).is_err());
    }

    #[test]
    fn phi_moments() {
        let cfg = EncodingConfig::new(8192, 3, 10.0, 2.5, 7).unwrap();
        let k = cfg.phi().len() as f64;
        let mean = cfg.phi().iter().sum::<f64>() / k;
        let var = cfg.phi().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        assert!(mean.abs() <= 4.0 / k.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() <= 0.1, "var {var}");
    }

    #[test]
    fn zero_input_and_output() {
        let cfg = EncodingConfig::new(64, 2, 10.0, 2.5, 1).unwrap();
        assert_eq!(cfg.encode_input(&[0.0, 0.0]).unwrap(), HyperVector::ones(64));
        assert_eq!(cfg.encode_output(0.0).unwrap(), HyperVector::ones(64));
        let e = cfg.encode_input(&[0.3, 0.9]).unwrap();
        assert!(e.is_phase_vector(1e-12));
        assert!((quad(&e, &e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn receptive_field_and_beta() {
        let cfg = EncodingConfig::new(8192, 1, 10.0, 2.5, 11).unwrap();
        let e0 = cfg.encode_input(&[0.0]).unwrap();
        let far = cfg.encode_input(&[0.25]).unwrap();
        assert!(quad(&e0, &far) <= 0.05);
        let near = cfg.encode_input(&[0.1]).unwrap();
        assert!((quad(&e0, &near) - (-1.0f64).exp()).abs() <= 0.05);
        let rc = similarity(&e0, &near, Convention::RealCosine).unwrap().value;
        assert!((rc - 0.607).abs() <= 0.05);

        let y0 = cfg.encode_output(0.0).unwrap();
        let y1 = cfg.encode_output(1.0).unwrap();
        assert!(quad(&y0, &y1) <= 0.05);
    }

    #[test]
    fn output_kernel_is_monotone() {
        let cfg = EncodingConfig::new(8192, 1, 10.0, 2.5, 5).unwrap();
        let base = cfg.encode_output(0.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let d = i as f64 / 99.0;
            let s = quad(&base, &cfg.encode_output(d).unwrap());
            assert!(s <= prev + 0.02, "d={d} s={s} prev={prev}");
            prev = prev.min(s);
        }
    }

    #[test]
    fn expected_kernel_values() {
        assert_eq!(expected_kernel(10.0, 0.0), 1.0);
        assert!((expected_kernel(10.0, 0.1) - 0.367_879_441_171_442_3).abs() < 1e-12);
        assert!((expected_kernel(2.5, 1.0) - 0.001_930_454_136_227_709).abs() < 1e-15);
        assert!((expected_real_kernel(10.0, 0.1) - 0.606_530_659_712_633_4).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = EncodingConfig::new(128, 2, 12.5, 2.5, u64::MAX).unwrap();
        let text = cfg.to_toml().unwrap();
        assert!(text.contains("N = 128"));
        assert!(text.contains("format-version = 1"));
        let back = EncodingConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.phi(), cfg.phi());
        let bad = text.replace("format-version = 1", "format-version = 9");
        assert!(EncodingConfig::from_toml(&bad).is_err());
    }

    proptest! {
        #[test]
        fn shift_structure(x in proptest::collection::vec(-2.0f64..2.0, 2), xp in proptest::collection::vec(-2.0f64..2.0, 2), seed in 0u64..1000) {
            let cfg = EncodingConfig::new(64, 2, 10.0, 2.5, seed).unwrap();
            let a = cfg.encode_input(&x).unwrap();
            let b = cfg.encode_input(&xp).unwrap();
            let d: Vec<f64> = x.iter().zip(&xp).map(|(u, v)| u - v).collect();
            let lhs = unbind(&a, &b).unwrap();
            let rhs = cfg.encode_input(&d).unwrap();
            for (p, q) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((p - q).norm() < 1e-10);
            }
        }

        #[test]
        fn sample_into_is_bind(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let cfg = EncodingConfig::new(32, 1, 10.0, 2.5, 3).unwrap();
            let mut out = vec![Complex64::new(0.0, 0.0); 32];
            cfg.sample_into(&[x], Some(y), &mut out);
            let want = bind(&cfg.encode_input(&[x]).unwrap(), &cfg.encode_output(y).unwrap()).unwrap();
            for (p, q) in out.iter().zip(want.values()) {
                prop_assert!((p - q).norm() < 1e-12);
            }
        }
    }
}
