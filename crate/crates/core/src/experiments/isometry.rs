//! Distance between random function pairs against the similarity of their
//! encodings.

use serde::Deserialize;

use crate::codec::{encode_explicit, Refinement};
use crate::datagen::{SineMixture, Skew};
use crate::error::Result;
use crate::experiments::stats::linear_fit;
use crate::experiments::{cosine, parse_params, rng_for, RunData, SeedReport, Series, StudyOutput};
use crate::fpe::EncodingConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Params {
    dim: usize,
    alpha: f64,
    beta: f64,
    terms: usize,
    samples: usize,
    noise: f64,
    pairs: usize,
    refinement: String,
    grid: usize,
    min_r2: f64,
}

/// Mean of `(f - g)^2` over a uniform grid on [0, 1].
fn squared_distance(f: &SineMixture, g: &SineMixture, grid: usize) -> f64 {
    (0..grid)
        .map(|i| {
            let x = i as f64 / (grid - 1) as f64;
            let d = f.eval(x) - g.eval(x);
            d * d
        })
        .sum::<f64>()
        / grid as f64
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let mode: Refinement = p.refinement.parse()?;
    let mut out = StudyOutput::default();
    let mut all_d2 = Vec::new();
    let mut all_sim = Vec::new();
    for &seed in seeds {
        let mut rng = rng_for(seed, 8);
        let cfg = EncodingConfig::new(p.dim, 1, p.alpha, p.beta, seed)?;
        let mut d2 = Vec::with_capacity(p.pairs);
        let mut sim = Vec::with_capacity(p.pairs);
        for _ in 0..p.pairs {
            let f = SineMixture::random(&mut rng, p.terms);
            let g = SineMixture::random(&mut rng, p.terms);
            let sf = f.samples(&mut rng, p.samples, Skew::Uniform, p.noise)?;
            let sg = g.samples(&mut rng, p.samples, Skew::Uniform, p.noise)?;
            let ef = encode_explicit(&cfg, &sf, mode)?;
            let eg = encode_explicit(&cfg, &sg, mode)?;
            d2.push(squared_distance(&f, &g, p.grid));
            sim.push(cosine(&ef, &eg)?);
        }
        let mut data = RunData::default();
        data.metric("r2-squared-distance", linear_fit(&d2, &sim).r_squared);
        let d: Vec<f64> = d2.iter().map(|v| v.sqrt()).collect();
        data.metric("r2-distance", linear_fit(&d, &sim).r_squared);
        data.series("similarity-vs-squared-distance", Series::scatter("squared L2", "similarity", d2.clone(), sim.clone()));
        all_d2.extend(d2);
        all_sim.extend(sim);
        out.per_seed.push(SeedReport { seed, data });
    }
    let fit = linear_fit(&all_d2, &all_sim);
    let d: Vec<f64> = all_d2.iter().map(|v| v.sqrt()).collect();
    let fit_d = linear_fit(&d, &all_sim);
    out.aggregate.metric("pairs", all_d2.len() as f64);
    out.aggregate.metric("r2-squared-distance", fit.r_squared);
    out.aggregate.metric("slope", fit.slope);
    out.aggregate.metric("intercept", fit.intercept);
    out.aggregate.metric("r2-distance", fit_d.r_squared);
    out.aggregate.series(
        "similarity-vs-squared-distance",
        Series::scatter("squared L2", "similarity", all_d2, all_sim.clone()),
    );
    out.aggregate
        .series("similarity-vs-distance", Series::scatter("L2", "similarity", d, all_sim));
    out.verdict("linear-fit", fit.r_squared >= p.min_r2);
    Ok(out)
}
