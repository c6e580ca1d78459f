//! Kernel mixtures on a low-rank subspace of a higher-dimensional input
//! space, swept over the ambient dimension and the component count.

use serde::Deserialize;

use crate::codec::{encode_explicit, reconstruct, DecodeOptions, Refinement};
use crate::datagen::KernelMixture;
use crate::error::Result;
use crate::experiments::stats::mae;
use crate::experiments::{parse_params, rng_for, RunData, SeedReport, Series, StudyOutput};
use crate::fpe::EncodingConfig;
use crate::io::rescale_to_unit;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Params {
    dim: usize,
    /// Phase scale per input coordinate, `alpha / m`.
    alpha_per_unit: f64,
    beta: f64,
    gamma: f64,
    noise: f64,
    rank: usize,
    train: usize,
    test: usize,
    ambient_dims: Vec<usize>,
    fixed_components: usize,
    component_counts: Vec<usize>,
    fixed_ambient_dim: usize,
    max_variation: f64,
}

/// Test MAE in the original output units.
fn mixture_mae(p: &Params, seed: u64, d: usize, components: usize) -> Result<f64> {
    // The latent mixture depends on the component count only, so every
    // ambient dimension sees the same function up to rotation.
    let mut rng = rng_for(seed, 10 + components as u64);
    let latent = KernelMixture::random(&mut rng, p.rank, components, p.rank, p.gamma);
    let mut rng = rng_for(seed, 1_000_000 + 1000 * d as u64 + components as u64);
    let f = latent.embed(&mut rng, d)?;
    let train = f.samples(&mut rng, p.train, p.noise, true)?;
    let test = f.samples(&mut rng, p.test, p.noise, false)?;
    let (unit, scale) = rescale_to_unit(&train)?;
    let cfg = EncodingConfig::new(p.dim, d, p.alpha_per_unit * d as f64, p.beta, seed)?;
    let enc = encode_explicit(&cfg, &unit, Refinement::None)?;
    let decoded = reconstruct(&cfg, &enc, test.inputs(), &DecodeOptions::default())?;
    let pred: Vec<f64> = decoded.iter().map(|&v| scale.inverse(v)).collect();
    Ok(mae(test.outputs().expect("explicit"), &pred))
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let mut out = StudyOutput::default();
    let mut keys = Vec::new();
    for &seed in seeds {
        let mut data = RunData::default();
        for &d in &p.ambient_dims {
            let key = format!("mae-d{d}-n{}", p.fixed_components);
            data.metric(&key, mixture_mae(&p, seed, d, p.fixed_components)?);
        }
        for &n in &p.component_counts {
            let key = format!("mae-d{}-n{n}", p.fixed_ambient_dim);
            let v = match data.metrics.get(&key) {
                Some(&v) => v,
                None => mixture_mae(&p, seed, p.fixed_ambient_dim, n)?,
            };
            data.metric(&key, v);
        }
        if keys.is_empty() {
            keys = data.metrics.keys().cloned().collect();
        }
        out.per_seed.push(SeedReport { seed, data });
    }
    let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
    out.mean_of(&refs);

    let by_d: Vec<f64> = p
        .ambient_dims
        .iter()
        .map(|d| out.aggregate.get(&format!("mean-mae-d{d}-n{}", p.fixed_components)))
        .collect();
    let by_n: Vec<f64> = p
        .component_counts
        .iter()
        .map(|n| out.aggregate.get(&format!("mean-mae-d{}-n{n}", p.fixed_ambient_dim)))
        .collect();
    let avg = by_d.iter().sum::<f64>() / by_d.len() as f64;
    let spread = by_d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - by_d.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = spread / avg;
    out.aggregate.metric("variation-across-d", variation);
    let xd: Vec<f64> = p.ambient_dims.iter().map(|&d| d as f64).collect();
    let xn: Vec<f64> = p.component_counts.iter().map(|&n| n as f64).collect();
    out.aggregate.series("mae-vs-d", Series::line("d", "MAE", xd, by_d));
    out.aggregate.series("mae-vs-components", Series::line("components", "MAE", xn, by_n.clone()));
    out.verdict("flat-in-d", variation <= p.max_variation);
    out.verdict(
        "increasing-in-components",
        by_n.len() >= 2 && by_n.windows(2).all(|w| w[1] > w[0]),
    );
    Ok(out)
}
