//! Seeded synthetic datasets.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with the spec's seed, in
//! a fixed order, so a spec always produces the same bytes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::codec::SampleSet;
use crate::error::{HdfeError, Result};

/// Smallest grid accepted by [`complexity_of`].
pub const MIN_COMPLEXITY_GRID: usize = 1000;
/// Grid used when a generator reports complexity.
pub const COMPLEXITY_GRID: usize = 20001;

/// Sampling density on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Skew {
    Uniform,
    /// `x = u^2`, mass piled near 0.
    Left,
    /// `x = 1 - u^2`, mass piled near 1.
    Right,
}

impl Skew {
    pub fn transform(self, u: f64) -> f64 {
        match self {
            Skew::Uniform => u,
            Skew::Left => u * u,
            Skew::Right => 1.0 - u * u,
        }
    }

    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.transform(rng.random::<f64>())).collect()
    }
}

impl fmt::Display for Skew {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Skew::Uniform => "uniform",
            Skew::Left => "left",
            Skew::Right => "right",
        })
    }
}

impl FromStr for Skew {
    type Err = HdfeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Skew::Uniform),
            "left" => Ok(Skew::Left),
            "right" => Ok(Skew::Right),
            other => Err(HdfeError::Spec(format!(
                "skew direction must be uniform, left or right, got `{other}`"
            ))),
        }
    }
}

/// `f(x) = 1/2 + 1/8 sum_k a_k sin(2 pi k x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineMixture {
    pub coefficients: Vec<f64>,
}

impl SineMixture {
    pub fn new(coefficients: Vec<f64>) -> Self {
        SineMixture { coefficients }
    }

    /// `a_k ~ Uniform(0, 1)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, terms: usize) -> Self {
        SineMixture {
            coefficients: (0..terms).map(|_| rng.random::<f64>()).collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, a)| a * (TAU * (k + 1) as f64 * x).sin())
            .sum();
        0.5 + s / 8.0
    }

    pub fn complexity(&self) -> f64 {
        let grid: Vec<f64> = (0..COMPLEXITY_GRID)
            .map(|i| self.eval(i as f64 / (COMPLEXITY_GRID - 1) as f64))
            .collect();
        complexity_of(&grid).expect("grid above the minimum")
    }

    pub fn samples<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        skew: Skew,
        noise: f64,
    ) -> Result<SampleSet> {
        let xs = skew.draw(rng, n);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let e: f64 = if noise > 0.0 {
                    noise * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                self.eval(x) + e
            })
            .collect();
        Ok(SampleSet::scalar(&xs, &ys)?
            .with_meta("distribution", skew)
            .with_meta("noise", noise))
    }
}

/// `f(x) = sum_k alpha_k exp(-gamma |x - x_k|^2)` in `d` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMixture {
    pub d: usize,
    /// Row-major `components x d`.
    pub centers: Vec<f64>,
    pub alphas: Vec<f64>,
    pub gamma: f64,
}

impl KernelMixture {
    /// Centers are standard normal in a `rank`-dimensional subspace spanned
    /// by a random orthonormal `d x rank` basis. With `rank >= d` they are
    /// drawn i.i.d. N(0, 1) per coordinate.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        d: usize,
        components: usize,
        rank: usize,
        gamma: f64,
    ) -> Self {
        let centers = if rank >= d {
            (0..components * d)
                .map(|_| StandardNormal.sample(rng))
                .collect()
        } else {
            let u: Vec<f64> = (0..components * rank)
                .map(|_| StandardNormal.sample(rng))
                .collect();
            embed_rows(rng, &u, rank, d)
        };
        let alphas = (0..components).map(|_| rng.random::<f64>()).collect();
        KernelMixture {
            d,
            centers,
            alphas,
            gamma,
        }
    }

    /// The same mixture carried into `d >= self.d` dimensions by a random
    /// orthonormal `d x self.d` basis. Distances between points of the
    /// subspace, and hence every output, are preserved.
    pub fn embed<R: Rng + ?Sized>(&self, rng: &mut R, d: usize) -> Result<Self> {
        if d < self.d {
            return Err(HdfeError::param("d", "cannot embed into fewer dimensions"));
        }
        Ok(KernelMixture {
            d,
            centers: embed_rows(rng, &self.centers, self.d, d),
            alphas: self.alphas.clone(),
            gamma: self.gamma,
        })
    }

    pub fn components(&self) -> usize {
        self.alphas.len()
    }

    pub fn center(&self, k: usize) -> &[f64] {
        &self.centers[k * self.d..(k + 1) * self.d]
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (0..self.components())
            .map(|k| {
                let d2: f64 = self
                    .center(k)
                    .iter()
                    .zip(x)
                    .map(|(c, v)| (c - v) * (c - v))
                    .sum();
                self.alphas[k] * (-self.gamma * d2).exp()
            })
            .sum()
    }

    /// Points `x_k + noise` with isotropic noise of total standard deviation
    /// `sigma` (per coordinate `sigma / sqrt(d)`). Component `i mod K` when
    /// `balanced`, uniformly random otherwise.
    pub fn samples<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        sigma: f64,
        balanced: bool,
    ) -> Result<SampleSet> {
        let s = sigma / (self.d as f64).sqrt();
        let mut xs = Vec::with_capacity(n * self.d);
        for i in 0..n {
            let k = if balanced {
                i % self.components()
            } else {
                rng.random_range(0..self.components())
            };
            for c in self.center(k) {
                let e: f64 = StandardNormal.sample(rng);
                xs.push(c + s * e);
            }
        }
        let ys: Vec<f64> = xs.chunks(self.d).map(|x| self.eval(x)).collect();
        Ok(SampleSet::explicit(self.d, xs, ys)?.with_meta("noise", sigma))
    }
}

/// Maps row-major `k x r` rows through a random orthonormal `d x r` basis.
fn embed_rows<R: Rng + ?Sized>(rng: &mut R, rows: &[f64], r: usize, d: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..d * r).map(|_| StandardNormal.sample(rng)).collect();
    let q = DMatrix::from_row_slice(d, r, &g).qr().q();
    let k = rows.len() / r;
    let mut c = vec![0.0; k * d];
    for m in 0..k {
        for i in 0..d {
            c[m * d + i] = (0..r).map(|j| q[(i, j)] * rows[m * r + j]).sum();
        }
    }
    c
}

/// Points on the unit circle at uniform angles with isotropic Gaussian noise.
pub fn circle_points<R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: f64) -> Result<SampleSet> {
    let mut xs = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = rng.random::<f64>() * TAU;
        let (s, c) = t.sin_cos();
        let (ex, ey): (f64, f64) = if sigma > 0.0 {
            (StandardNormal.sample(rng), StandardNormal.sample(rng))
        } else {
            (0.0, 0.0)
        };
        xs.push(c + sigma * ex);
        xs.push(s + sigma * ey);
    }
    Ok(SampleSet::implicit(2, xs)?.with_meta("noise", sigma))
}

/// Total variation of `f` sampled on an even grid over [0, 1]; the exact
/// integral of `|f'|` for the piecewise-linear interpolant.
pub fn complexity_of(values: &[f64]) -> Result<f64> {
    if values.len() < MIN_COMPLEXITY_GRID {
        return Err(HdfeError::Resolution {
            got: values.len(),
            min: MIN_COMPLEXITY_GRID,
        });
    }
    Ok(values.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Which family to draw and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetKind {
    SineMixture {
        n: usize,
        terms: usize,
        noise: f64,
    },
    SkewedUniform {
        n: usize,
        direction: Skew,
        terms: usize,
        noise: f64,
    },
    KernelMixture {
        n: usize,
        d: usize,
        components: usize,
        gamma: f64,
        /// Total standard deviation of the offset from the chosen center.
        noise: f64,
        rank: usize,
    },
    Circle {
        n: usize,
        noise: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub kind: DatasetKind,
    pub seed: u64,
}

const SINE_KEYS: &[&str] = &["n", "terms", "noise"];
const SKEW_KEYS: &[&str] = &["n", "direction", "terms", "noise"];
const KERNEL_KEYS: &[&str] = &["n", "d", "components", "gamma", "noise", "rank"];
const CIRCLE_KEYS: &[&str] = &["n", "noise"];

impl DatasetSpec {
    /// Builds a spec from string parameters. `n` is always required; other
    /// parameters fall back to the defaults used by the studies.
    pub fn from_params(kind: &str, params: &BTreeMap<String, String>, seed: u64) -> Result<Self> {
        let allowed = match kind {
            "sine-mixture" => SINE_KEYS,
            "skewed-uniform" => SKEW_KEYS,
            "kernel-mixture" => KERNEL_KEYS,
            "circle" => CIRCLE_KEYS,
            other => return Err(HdfeError::Spec(format!("unknown dataset kind `{other}`"))),
        };
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(HdfeError::Spec(format!(
                    "unknown parameter `{key}` for kind {kind} (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        let n: usize = required(params, "n")?;
        let kind = match kind {
            "sine-mixture" => DatasetKind::SineMixture {
                n,
                terms: optional(params, "terms", 4)?,
                noise: optional(params, "noise", 0.0)?,
            },
            "skewed-uniform" => DatasetKind::SkewedUniform {
                n,
                direction: required(params, "direction")?,
                terms: optional(params, "terms", 4)?,
                noise: optional(params, "noise", 0.0)?,
            },
            "kernel-mixture" => {
                let d = optional(params, "d", 2)?;
                DatasetKind::KernelMixture {
                    n,
                    d,
                    components: optional(params, "components", 10)?,
                    gamma: optional(params, "gamma", 20.0)?,
                    noise: optional(params, "noise", 0.05)?,
                    rank: optional(params, "rank", d)?,
                }
            }
            _ => DatasetKind::Circle {
                n,
                noise: optional(params, "noise", 0.0)?,
            },
        };
        let spec = DatasetSpec { kind, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DatasetKind::SineMixture { .. } => "sine-mixture",
            DatasetKind::SkewedUniform { .. } => "skewed-uniform",
            DatasetKind::KernelMixture { .. } => "kernel-mixture",
            DatasetKind::Circle { .. } => "circle",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HdfeError::Spec(m.to_string()));
        match &self.kind {
            DatasetKind::SineMixture { n, terms, noise }
            | DatasetKind::SkewedUniform { n, terms, noise, .. } => {
                if *n == 0 {
                    return bad("n must be positive");
                }
                if *terms == 0 {
                    return bad("terms must be positive");
                }
                if !(*noise >= 0.0) {
                    return bad("noise must be nonnegative");
                }
            }
            DatasetKind::KernelMixture {
                n,
                d,
                components,
                gamma,
                noise,
                rank,
            } => {
                if *n == 0 || *d == 0 || *components == 0 || *rank == 0 {
                    return bad("n, d, components and rank must be positive");
                }
                if !(*gamma > 0.0) {
                    return bad("gamma must be positive");
                }
                if !(*noise >= 0.0) {
                    return bad("noise must be nonnegative");
                }
            }
            DatasetKind::Circle { n, noise } => {
                if *n == 0 {
                    return bad("n must be positive");
                }
                if !(*noise >= 0.0) {
                    return bad("noise must be nonnegative");
                }
            }
        }
        Ok(())
    }
}

fn required<T: FromStr>(params: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let v = params
        .get(key)
        .ok_or_else(|| HdfeError::Spec(format!("missing required parameter `{key}`")))?;
    v.parse()
        .map_err(|_| HdfeError::Spec(format!("cannot parse `{key}` = `{v}`")))
}

fn optional<T: FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| HdfeError::Spec(format!("cannot parse `{key}` = `{v}`"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub samples: SampleSet,
    /// `a_k` for sine mixtures, `alpha_k` for kernel mixtures.
    pub ground_truth: Option<Vec<f64>>,
    /// Kernel-mixture centers, row-major.
    pub centers: Option<Vec<f64>>,
    /// `integral |f'|` over [0, 1] for scalar explicit families.
    pub complexity: Option<f64>,
}

pub fn generate(spec: &DatasetSpec) -> Result<GeneratedDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.kind {
        DatasetKind::SineMixture { n, terms, noise } => {
            sine_dataset(&mut rng, *n, *terms, Skew::Uniform, *noise)
        }
        DatasetKind::SkewedUniform {
            n,
            direction,
            terms,
            noise,
        } => sine_dataset(&mut rng, *n, *terms, *direction, *noise),
        DatasetKind::KernelMixture {
            n,
            d,
            components,
            gamma,
            noise,
            rank,
        } => {
            let f = KernelMixture::random(&mut rng, *d, *components, *rank, *gamma);
            let samples = f.samples(&mut rng, *n, *noise, false)?;
            Ok(GeneratedDataset {
                samples,
                ground_truth: Some(f.alphas.clone()),
                centers: Some(f.centers.clone()),
                complexity: None,
            })
        }
        DatasetKind::Circle { n, noise } => Ok(GeneratedDataset {
            samples: circle_points(&mut rng, *n, *noise)?,
            ground_truth: None,
            centers: None,
            complexity: None,
        }),
    }
}

fn sine_dataset(
    rng: &mut ChaCha8Rng,
    n: usize,
    terms: usize,
    skew: Skew,
    noise: f64,
) -> Result<GeneratedDataset> {
    let f = SineMixture::random(rng, terms);
    let samples = f.samples(rng, n, skew, noise)?;
    Ok(GeneratedDataset {
        samples,
        complexity: Some(f.complexity()),
        ground_truth: Some(f.coefficients),
        centers: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_samples_csv;
    use proptest::prelude::*;

    fn params(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn complexity_closed_forms() {
        let f = SineMixture::new(vec![1.0, 0.0, 0.0, 0.0]);
        // (2 pi / 8) * integral |cos 2 pi x| = (pi / 4)(2 / pi).
        assert!((f.complexity() - 0.5).abs() <= 0.005);
        let c = vec![0.3; 2000];
        assert_eq!(complexity_of(&c).unwrap(), 0.0);
        assert!(matches!(complexity_of(&c[..999]), Err(HdfeError::Resolution { .. })));
    }

    #[test]
    fn complexity_against_fine_quadrature() {
        let f = SineMixture::new(vec![1.0; 4]);
        let fine: Vec<f64> = (0..1_000_001).map(|i| f.eval(i as f64 / 1e6)).collect();
        let oracle = complexity_of(&fine).unwrap();
        assert!((f.complexity() - oracle).abs() <= 0.005 * oracle);
        // Doubling the grid changes the estimate by under 1%.
        let g1: Vec<f64> = (0..2001).map(|i| f.eval(i as f64 / 2000.0)).collect();
        let g2: Vec<f64> = (0..4001).map(|i| f.eval(i as f64 / 4000.0)).collect();
        let (c1, c2) = (complexity_of(&g1).unwrap(), complexity_of(&g2).unwrap());
        assert!((c1 - c2).abs() <= 0.01 * c2);
    }

    #[test]
    fn circle_is_exact_without_noise() {
        let spec = DatasetSpec::from_params("circle", &params(&[("n", "500")]), 3).unwrap();
        let d = generate(&spec).unwrap();
        for i in 0..d.samples.len() {
            let p = d.samples.input(i);
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn skew_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs = Skew::Left.draw(&mut rng, 5000);
        let m = xs.iter().sum::<f64>() / 5000.0;
        assert!((m - 1.0 / 3.0).abs() <= 0.02, "{m}");
        let xs = Skew::Right.draw(&mut rng, 5000);
        let m = xs.iter().sum::<f64>() / 5000.0;
        assert!((m - 2.0 / 3.0).abs() <= 0.02, "{m}");
    }

    #[test]
    fn spec_errors() {
        assert!(DatasetSpec::from_params("spiral", &params(&[("n", "5")]), 0).is_err());
        assert!(DatasetSpec::from_params("circle", &params(&[]), 0).is_err());
        assert!(DatasetSpec::from_params("circle", &params(&[("n", "5"), ("terms", "2")]), 0).is_err());
        assert!(DatasetSpec::from_params("skewed-uniform", &params(&[("n", "5")]), 0).is_err());
        assert!(DatasetSpec::from_params("sine-mixture", &params(&[("n", "x")]), 0).is_err());
        assert!(DatasetSpec::from_params("sine-mixture", &params(&[("n", "0")]), 0).is_err());
    }

    #[test]
    fn low_rank_centers_span_the_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = KernelMixture::random(&mut rng, 8, 12, 2, 20.0);
        let c = DMatrix::from_row_slice(12, 8, &f.centers);
        let sv = c.singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!(s[1] > 1e-6 && s[2] < 1e-9, "{s:?}");
    }

    #[test]
    fn embedding_preserves_center_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = KernelMixture::random(&mut rng, 2, 6, 2, 20.0);
        let g = f.embed(&mut rng, 16).unwrap();
        assert_eq!(g.d, 16);
        assert_eq!(g.alphas, f.alphas);
        for a in 0..6 {
            for b in 0..6 {
                let d2 = |m: &KernelMixture| -> f64 {
                    m.center(a).iter().zip(m.center(b)).map(|(x, y)| (x - y) * (x - y)).sum()
                };
                assert!((d2(&f) - d2(&g)).abs() < 1e-12);
            }
            assert!((f.eval(f.center(a)) - g.eval(g.center(a))).abs() < 1e-12);
        }
        assert!(g.embed(&mut rng, 3).is_err());
    }

    #[test]
    fn deterministic_bytes() {
        for (kind, p) in [
            ("sine-mixture", params(&[("n", "50"), ("noise", "0.01")])),
            ("skewed-uniform", params(&[("n", "50"), ("direction", "left")])),
            ("kernel-mixture", params(&[("n", "30"), ("d", "4"), ("rank", "2")])),
            ("circle", params(&[("n", "40"), ("noise", "0.05")])),
        ] {
            let spec = DatasetSpec::from_params(kind, &p, 77).unwrap();
            let mut a = Vec::new();
            let mut b = Vec::new();
            write_samples_csv(&mut a, &generate(&spec).unwrap().samples).unwrap();
            write_samples_csv(&mut b, &generate(&spec).unwrap().samples).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    proptest! {
        #[test]
        fn sine_outputs_in_open_unit_interval(a in proptest::collection::vec(0.0f64..=1.0, 4), x in 0.0f64..=1.0) {
            let y = SineMixture::new(a).eval(x);
            prop_assert!(y > 0.0 && y < 1.0);
        }

        #[test]
        fn generated_sine_outputs_in_range(seed in any::<u64>()) {
            let spec = DatasetSpec { kind: DatasetKind::SineMixture { n: 100, terms: 4, noise: 0.0 }, seed };
            let d = generate(&spec).unwrap();
            prop_assert!(d.samples.outputs().unwrap().iter().all(|y| *y > 0.0 && *y < 1.0));
            prop_assert!(d.complexity.unwrap() >= 0.0);
        }
    }
}
