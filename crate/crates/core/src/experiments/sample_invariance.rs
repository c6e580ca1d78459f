//! One function sampled under three densities at two sizes. Unrefined
//! encodings disagree; iteratively refined ones should not.

use serde::Deserialize;

use crate::codec::{encode_explicit_modes, RefineOptions, Refinement};
use crate::datagen::{SineMixture, Skew};
use crate::error::Result;
use crate::experiments::{cosine, parse_params, rng_for, SeedReport, Series, StudyOutput, Table};
use crate::experiments::RunData;
use crate::fpe::EncodingConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Params {
    dim: usize,
    alpha: f64,
    beta: f64,
    terms: usize,
    sizes: Vec<usize>,
    noise: f64,
    max_steps: usize,
    patience: usize,
    min_after: f64,
    max_before: f64,
}

const SKEWS: [Skew; 3] = [Skew::Uniform, Skew::Left, Skew::Right];

fn off_diagonal(m: &[Vec<f64>]) -> Vec<f64> {
    let mut v = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i < j {
                v.push(x);
            }
        }
    }
    v
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let opts = RefineOptions {
        max_steps: p.max_steps,
        patience: p.patience,
        ..RefineOptions::default()
    };
    let mut labels = Vec::new();
    for size in &p.sizes {
        for skew in SKEWS {
            labels.push(format!("{skew}-{size}"));
        }
    }
    let k = labels.len();

    let mut out = StudyOutput::default();
    let mut sum_before = vec![vec![0.0; k]; k];
    let mut sum_after = vec![vec![0.0; k]; k];
    for &seed in seeds {
        let mut rng = rng_for(seed, 1);
        let f = SineMixture::random(&mut rng, p.terms);
        let cfg = EncodingConfig::new(p.dim, 1, p.alpha, p.beta, seed)?;

        let mut raw = Vec::new();
        let mut refined = Vec::new();
        let mut steps = Vec::new();
        for &size in &p.sizes {
            for skew in SKEWS {
                let s = f.samples(&mut rng, size, skew, p.noise)?;
                let mut e =
                    encode_explicit_modes(&cfg, &s, &[Refinement::None, Refinement::Iterative], &opts)?;
                let it = e.pop().expect("two modes");
                steps.push(it.trace.steps as f64);
                refined.push(it.encoding);
                raw.push(e.pop().expect("two modes").encoding);
            }
        }

        let mut before = vec![vec![1.0; k]; k];
        let mut after = vec![vec![1.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    before[i][j] = cosine(&raw[i], &raw[j])?;
                    after[i][j] = cosine(&refined[i], &refined[j])?;
                }
                sum_before[i][j] += before[i][j];
                sum_after[i][j] += after[i][j];
            }
        }
        let ob = off_diagonal(&before);
        let oa = off_diagonal(&after);

        let mut data = RunData::default();
        data.metric("min-offdiag-before", min(&ob));
        data.metric("min-offdiag-after", min(&oa));
        data.metric("mean-offdiag-before", ob.iter().sum::<f64>() / ob.len() as f64);
        data.metric("mean-offdiag-after", oa.iter().sum::<f64>() / oa.len() as f64);
        data.metric("mean-refinement-steps", steps.iter().sum::<f64>() / steps.len() as f64);
        data.table("similarity-before", Table::square(&labels, before));
        data.table("similarity-after", Table::square(&labels, after));
        let idx: Vec<f64> = (0..ob.len()).map(|i| i as f64).collect();
        data.series("offdiag-before", Series::scatter("pair", "similarity", idx.clone(), ob));
        data.series("offdiag-after", Series::scatter("pair", "similarity", idx, oa));
        out.per_seed.push(SeedReport { seed, data });
    }

    let n = seeds.len() as f64;
    let mean = |m: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        m.into_iter().map(|r| r.into_iter().map(|v| v / n).collect()).collect()
    };
    out.aggregate.table("similarity-before", Table::square(&labels, mean(sum_before)));
    out.aggregate.table("similarity-after", Table::square(&labels, mean(sum_after)));
    out.mean_of(&[
        "min-offdiag-before",
        "min-offdiag-after",
        "mean-offdiag-before",
        "mean-offdiag-after",
        "mean-refinement-steps",
    ]);
    let worst_after = min(&out.collect("min-offdiag-after"));
    let worst_before = max(&out.collect("min-offdiag-before"));
    out.aggregate.metric("worst-min-offdiag-after", worst_after);
    out.aggregate.metric("worst-min-offdiag-before", worst_before);
    out.verdict("offdiag-after", worst_after >= p.min_after);
    out.verdict("offdiag-before", worst_before < p.max_before);
    Ok(out)
}
