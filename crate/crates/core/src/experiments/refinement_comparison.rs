//! Left- against right-skewed samples of one function under no refinement,
//! one-shot and iterative refinement, plus a timing of the two refiners.

use std::time::Instant;

use serde::Deserialize;

use crate::codec::bank::SampleBank;
use crate::codec::refine::refine_source;
use crate::codec::{encode_explicit_modes, RefineOptions, Refinement};
use crate::datagen::{SineMixture, Skew};
use crate::error::Result;
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
    max_steps: usize,
    patience: usize,
    timing_steps: usize,
    timing_seeds: usize,
    min_one_shot: f64,
    min_improvement: f64,
    max_time_ratio: f64,
}

const MODES: [Refinement; 3] = [Refinement::None, Refinement::OneShot, Refinement::Iterative];

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let opts = RefineOptions {
        max_steps: p.max_steps,
        patience: p.patience,
        ..RefineOptions::default()
    };
    let mut out = StudyOutput::default();
    let mut one_shot_secs = Vec::new();
    let mut iterative_secs = Vec::new();

    for (si, &seed) in seeds.iter().enumerate() {
        let mut rng = rng_for(seed, 2);
        let f = SineMixture::random(&mut rng, p.terms);
        let cfg = EncodingConfig::new(p.dim, 1, p.alpha, p.beta, seed)?;
        let left = f.samples(&mut rng, p.samples, Skew::Left, p.noise)?;
        let right = f.samples(&mut rng, p.samples, Skew::Right, p.noise)?;
        let a = encode_explicit_modes(&cfg, &left, &MODES, &opts)?;
        let b = encode_explicit_modes(&cfg, &right, &MODES, &opts)?;

        let mut data = RunData::default();
        for (k, mode) in MODES.iter().enumerate() {
            data.metric(&format!("similarity-{mode}"), cosine(&a[k].encoding, &b[k].encoding)?);
        }
        out.per_seed.push(SeedReport { seed, data });

        if si < p.timing_seeds {
            let bank = SampleBank::new(&cfg, &left);
            let t = Instant::now();
            refine_source(&bank, Refinement::OneShot, &opts)?;
            one_shot_secs.push(t.elapsed().as_secs_f64());
            let forced = RefineOptions {
                max_steps: p.timing_steps,
                force_steps: true,
                ..opts.clone()
            };
            let t = Instant::now();
            refine_source(&bank, Refinement::Iterative, &forced)?;
            iterative_secs.push(t.elapsed().as_secs_f64());
        }
    }

    out.mean_of(&["similarity-none", "similarity-oneshot", "similarity-iterative"]);
    let x: Vec<f64> = seeds.iter().map(|&s| s as f64).collect();
    for mode in MODES {
        let key = format!("similarity-{mode}");
        let y = out.collect(&key);
        out.aggregate.series(&key, Series::scatter("seed", "similarity", x.clone(), y));
    }
    let none = out.aggregate.get("mean-similarity-none");
    let one = out.aggregate.get("mean-similarity-oneshot");
    out.aggregate.metric("mean-improvement", one - none);
    out.verdict("one-shot-similarity", one >= p.min_one_shot);
    out.verdict("one-shot-improvement", one - none >= p.min_improvement);

    let secs = |v: &[f64]| v.iter().sum::<f64>();
    let ratio = if iterative_secs.is_empty() {
        f64::NAN
    } else {
        secs(&one_shot_secs) / secs(&iterative_secs)
    };
    out.timings.insert("one-shot-seconds".into(), secs(&one_shot_secs));
    out.timings.insert("iterative-seconds".into(), secs(&iterative_secs));
    out.timings.insert("time-ratio".into(), ratio);
    out.verdict("one-shot-time-ratio", ratio <= p.max_time_ratio);
    Ok(out)
}
