//! Complex phase-vector algebra.
//!
//! All reductions run sequentially in index order so that a given input
//! always produces the same bits.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HdfeError, Result};

/// An N-dimensional complex vector. Elements are stored as interleaved
/// `(re, im)` doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperVector {
    values: Vec<Complex64>,
}

/// Which similarity formula to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `Re<a, b> / (|a| |b|)`, in [-1, 1].
    RealCosine,
    /// `|<a, b>|^2 / (|a|^2 |b|^2)`, in [0, 1].
    Quad,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub value: f64,
    pub convention: Convention,
}

impl HyperVector {
    pub fn from_values(values: Vec<Complex64>) -> Self {
        HyperVector { values }
    }

    /// The all-ones vector, the identity for `bind`.
    pub fn ones(n: usize) -> Self {
        HyperVector {
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        HyperVector {
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Builds `exp(i * phase[k])` for every k.
    pub fn from_phases(phases: &[f64]) -> Self {
        HyperVector {
            values: phases.iter().map(|&p| cis(p)).collect(),
        }
    }

    /// A phase vector with phases drawn uniformly from [0, 2pi).
    pub fn random_phase<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        HyperVector {
            values: (0..n)
                .map(|_| cis(rng.random::<f64>() * std::f64::consts::TAU))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.values).sqrt()
    }

    /// True when every element has modulus 1 within `tol`.
    pub fn is_phase_vector(&self, tol: f64) -> bool {
        self.values.iter().all(|v| (v.norm() - 1.0).abs() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Multiplies every element by a real scalar.
    pub fn scale(&self, s: f64) -> HyperVector {
        HyperVector {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Element-wise sum.
    pub fn add(&self, other: &HyperVector) -> Result<HyperVector> {
        check_len(self.len(), other.len())?;
        Ok(HyperVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Interleaved `[re0, im0, re1, im1, ...]`.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| [v.re, v.im]).collect()
    }

    pub fn from_interleaved(data: &[f64]) -> Result<Self> {
        if data.len() % 2 != 0 {
            return Err(HdfeError::param(
                "values",
                "interleaved data must have even length",
            ));
        }
        Ok(HyperVector {
            values: data
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        })
    }
}

#[inline]
pub(crate) fn cis(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(HdfeError::Dimension { expected, got });
    }
    Ok(())
}

/// `sum_k a[k] * conj(b[k])`.
#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.im * y.re - x.re * y.im;
    }
    Complex64::new(re, im)
}

/// Real part of `inner(a, b)`; the hot loop of refinement.
#[inline]
pub(crate) fn re_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    // Four accumulators keep the loop vectorizable while staying
    // deterministic.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        for l in 0..4 {
            let (x, y) = (a[i + l], b[i + l]);
            acc[l] += x.re * y.re + x.im * y.im;
        }
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i].re * b[i].re + a[i].im * b[i].im;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum()
}

/// Element-wise product `a[k] * b[k]`.
pub fn bind(a: &HyperVector, b: &HyperVector) -> Result<HyperVector> {
    check_len(a.len(), b.len())?;
    Ok(HyperVector {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect(),
    })
}

/// Element-wise quotient `a[k] / b[k]`.
pub fn unbind(a: &HyperVector, b: &HyperVector) -> Result<HyperVector> {
    check_len(a.len(), b.len())?;
    if let Some(index) = b.values.iter().position(|v| v.norm_sqr() == 0.0) {
        return Err(HdfeError::Division { index });
    }
    Ok(HyperVector {
        values: a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| {
                // Unit-modulus divisors are the common case; multiplying by
                // the conjugate keeps the round trip exact to rounding.
                let d = y.norm_sqr();
                if d == 1.0 {
                    x * y.conj()
                } else {
                    x / y
                }
            })
            .collect(),
    })
}

pub fn similarity(a: &HyperVector, b: &HyperVector, convention: Convention) -> Result<Similarity> {
    check_len(a.len(), b.len())?;
    let na = norm_sqr(&a.values);
    let nb = norm_sqr(&b.values);
    if na == 0.0 || nb == 0.0 {
        return Err(HdfeError::UndefinedSimilarity);
    }
    let ip = inner(&a.values, &b.values);
    let value = match convention {
        Convention::RealCosine => (ip.re / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0),
        Convention::Quad => (ip.norm_sqr() / (na * nb)).clamp(0.0, 1.0),
    };
    Ok(Similarity { value, convention })
}

/// Weighted element-wise sum, not normalized.
pub fn superpose(weights: &[f64], vectors: &[HyperVector]) -> Result<HyperVector> {
    if vectors.is_empty() {
        return Err(HdfeError::EmptySuperposition("no vectors"));
    }
    check_len(vectors.len(), weights.len())?;
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(HdfeError::param("weights", "must be finite and nonnegative"));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(HdfeError::EmptySuperposition("all weights are zero"));
    }
    let n = vectors[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (w, v) in weights.iter().zip(vectors) {
        check_len(n, v.len())?;
        if *w == 0.0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(&v.values) {
            *o += x * *w;
        }
    }
    Ok(HyperVector { values: out })
}

pub fn normalize(a: &HyperVector) -> Result<HyperVector> {
    let n = a.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(HdfeError::Normalization);
    }
    Ok(a.scale(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn phase_vec(phases: &[f64]) -> HyperVector {
        HyperVector::from_phases(phases)
    }

    #[test]
    fn similarity_hand_computed() {
        // <a, b> = 1 + i, |a|^2 = |b|^2 = 2.
        let a = HyperVector::from_values(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let b = HyperVector::from_values(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let rc = similarity(&a, &b, Convention::RealCosine).unwrap();
        let q = similarity(&a, &b, Convention::Quad).unwrap();
        assert!((rc.value - 0.5).abs() < 1e-15);
        assert!((q.value - 0.5).abs() < 1e-15);

        // Orthogonal pair.
        let d = HyperVector::from_values(vec![c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(similarity(&a, &d, Convention::Quad).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = HyperVector::random_phase(64, &mut rng);
        let one = HyperVector::ones(64);
        assert_eq!(bind(&a, &one).unwrap(), a);
        assert_eq!(unbind(&a, &one).unwrap(), a);
        assert_eq!(superpose(&[1.0], &[a.clone()]).unwrap(), a);
        let two = superpose(&[1.0, 1.0], &[a.clone(), a.clone()]).unwrap();
        assert_eq!(two, a.scale(2.0));
    }

    #[test]
    fn errors() {
        let a = HyperVector::ones(3);
        let b = HyperVector::ones(4);
        assert!(matches!(bind(&a, &b), Err(HdfeError::Dimension { .. })));
        let z = HyperVector::zeros(3);
        assert!(matches!(unbind(&a, &z), Err(HdfeError::Division { index: 0 })));
        assert!(matches!(
            similarity(&a, &z, Convention::RealCosine),
            Err(HdfeError::UndefinedSimilarity)
        ));
        assert!(matches!(normalize(&z), Err(HdfeError::Normalization)));
        assert!(matches!(
            superpose(&[], &[]),
            Err(HdfeError::EmptySuperposition(_))
        ));
        assert!(matches!(
            superpose(&[0.0], &[a.clone()]),
            Err(HdfeError::EmptySuperposition(_))
        ));
    }

    #[test]
    fn re_inner_matches_inner() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 3, 4, 7, 64, 65] {
            let a = HyperVector::random_phase(n, &mut rng);
            let b = HyperVector::random_phase(n, &mut rng);
            let r = re_inner(a.values(), b.values());
            assert!((r - inner(a.values(), b.values()).re).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn bind_unbind_round_trip(seed in any::<u64>(), n in 1usize..256) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = HyperVector::random_phase(n, &mut rng);
            let b = HyperVector::random_phase(n, &mut rng);
            let back = unbind(&bind(&a, &b).unwrap(), &a).unwrap();
            for (x, y) in back.values().iter().zip(b.values()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
            prop_assert_eq!(bind(&a, &b).unwrap(), bind(&b, &a).unwrap());
            prop_assert!(bind(&a, &b).unwrap().is_phase_vector(1e-9));
        }

        #[test]
        fn unbind_associates(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = HyperVector::random_phase(32, &mut rng);
            let b = HyperVector::random_phase(32, &mut rng);
            let cc = HyperVector::random_phase(32, &mut rng);
            let lhs = unbind(&bind(&a, &b).unwrap(), &cc).unwrap();
            let rhs = bind(&unbind(&a, &cc).unwrap(), &b).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn binding_preserves_quad_similarity(seed in any::<u64>(), n in 2usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = HyperVector::random_phase(n, &mut rng);
            let b = HyperVector::random_phase(n, &mut rng);
            let cc = HyperVector::random_phase(n, &mut rng);
            let lhs = similarity(&bind(&a, &b).unwrap(), &bind(&a, &cc).unwrap(), Convention::Quad).unwrap();
            let rhs = similarity(&b, &cc, Convention::Quad).unwrap();
            prop_assert!((lhs.value - rhs.value).abs() < 1e-9);
        }

        #[test]
        fn bind_distributes_over_addition(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = HyperVector::random_phase(16, &mut rng);
            let b = HyperVector::random_phase(16, &mut rng);
            let cc = HyperVector::random_phase(16, &mut rng);
            let lhs = bind(&a, &b.add(&cc).unwrap()).unwrap();
            let rhs = bind(&a, &b).unwrap().add(&bind(&a, &cc).unwrap()).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn normalize_properties(phases in proptest::collection::vec(-10.0f64..10.0, 1..64), s in 0.01f64..100.0, w in 0.01f64..100.0) {
            let a = phase_vec(&phases).scale(s);
            let na = normalize(&a).unwrap();
            prop_assert!((na.norm() - 1.0).abs() < 1e-12);
            let n2 = normalize(&a.scale(2.0)).unwrap();
            for (x, y) in na.values().iter().zip(n2.values()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
            prop_assert!((similarity(&na, &a, Convention::RealCosine).unwrap().value - 1.0).abs() < 1e-9);
            let sw = normalize(&superpose(&[w], &[a.clone()]).unwrap()).unwrap();
            for (x, y) in na.values().iter().zip(sw.values()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn similarity_ranges(seed in any::<u64>(), n in 1usize..64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = HyperVector::random_phase(n, &mut rng);
            let b = HyperVector::random_phase(n, &mut rng).scale(3.0);
            let rc = similarity(&a, &b, Convention::RealCosine).unwrap().value;
            let q = similarity(&a, &b, Convention::Quad).unwrap().value;
            prop_assert!((-1.0..=1.0).contains(&rc));
            prop_assert!((0.0..=1.0).contains(&q));
            let an = normalize(&a).unwrap();
            prop_assert!((similarity(&an, &an, Convention::RealCosine).unwrap().value - 1.0).abs() < 1e-9);
            prop_assert!((similarity(&an, &an, Convention::Quad).unwrap().value - 1.0).abs() < 1e-9);
        }
    }
}
