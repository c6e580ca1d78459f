//! Reconstruction error against function complexity at a fixed dimension.

use rand::Rng;
use serde::Deserialize;

use crate::codec::{encode_explicit, reconstruct, DecodeOptions, Refinement};
use crate::datagen::{SineMixture, Skew};
use crate::error::Result;
use crate::experiments::stats::{mae, spearman};
use crate::experiments::{parse_params, rng_for, RunData, SeedReport, Series, StudyOutput};
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
    functions: usize,
    queries: usize,
    min_spearman: f64,
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let mut out = StudyOutput::default();
    let mut all_c = Vec::new();
    let mut all_e = Vec::new();
    for &seed in seeds {
        let mut rng = rng_for(seed, 9);
        let cfg = EncodingConfig::new(p.dim, 1, p.alpha, p.beta, seed)?;
        let mut cs = Vec::new();
        let mut es = Vec::new();
        for _ in 0..p.functions {
            let f = SineMixture::random(&mut rng, p.terms);
            let s = f.samples(&mut rng, p.samples, Skew::Uniform, p.noise)?;
            let enc = encode_explicit(&cfg, &s, Refinement::None)?;
            let xs: Vec<f64> = (0..p.queries).map(|_| rng.random::<f64>()).collect();
            let decoded = reconstruct(&cfg, &enc, &xs, &DecodeOptions::default())?;
            let truth: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
            cs.push(f.complexity());
            es.push(mae(&truth, &decoded));
        }
        let mut data = RunData::default();
        data.metric("spearman", spearman(&cs, &es));
        data.series("mae-vs-complexity", Series::scatter("complexity", "MAE", cs.clone(), es.clone()));
        all_c.extend(cs);
        all_e.extend(es);
        out.per_seed.push(SeedReport { seed, data });
    }
    let rho = spearman(&all_c, &all_e);
    out.mean_of(&["spearman"]);
    out.aggregate.metric("spearman", rho);
    out.aggregate.metric("functions", all_c.len() as f64);
    out.aggregate
        .series("mae-vs-complexity", Series::scatter("complexity", "MAE", all_c, all_e));
    out.verdict("spearman", rho >= p.min_spearman);
    Ok(out)
}
