//! Implicit encodings of a clean and a noisy unit circle at two receptive
//! fields, plus a query map of the noisy shape.

use rand::Rng;
use serde::Deserialize;

use crate::codec::{encode_implicit, encode_implicit_with, query_implicit, RefineOptions, Refinement};
use crate::datagen::circle_points;
use crate::error::Result;
use crate::experiments::{cosine, parse_params, rng_for, RunData, SeedReport, StudyOutput, Table};
use crate::fpe::EncodingConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Params {
    dim: usize,
    alphas: Vec<f64>,
    beta: f64,
    samples: usize,
    noise: f64,
    probes: usize,
    probe_gap: f64,
    extent: f64,
    map_resolution: usize,
    patience: usize,
    min_contrast: f64,
    min_resample: f64,
}

fn off_circle<R: Rng>(rng: &mut R, extent: f64, gap: f64) -> [f64; 2] {
    loop {
        let p = [
            rng.random_range(-extent..extent),
            rng.random_range(-extent..extent),
        ];
        if ((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() >= gap {
            return p;
        }
    }
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let mut out = StudyOutput::default();
    let a_small = p.alphas.first().copied().unwrap_or(f64::NAN);
    let a_large = p.alphas.last().copied().unwrap_or(f64::NAN);
    let mut ordered = 0usize;
    for &seed in seeds {
        let mut rng = rng_for(seed, 20);
        let clean = circle_points(&mut rng, p.samples, 0.0)?;
        let noisy = circle_points(&mut rng, p.samples, p.noise)?;
        let mut data = RunData::default();
        for &alpha in &p.alphas {
            let cfg = EncodingConfig::new(p.dim, 2, alpha, p.beta, seed)?;
            let a = encode_implicit(&cfg, &clean, Refinement::None)?;
            let b = encode_implicit(&cfg, &noisy, Refinement::None)?;
            data.metric(&format!("similarity-alpha-{alpha}"), cosine(&a, &b)?);
        }
        if data.get(&format!("similarity-alpha-{a_small}")) > data.get(&format!("similarity-alpha-{a_large}")) {
            ordered += 1;
        }

        // Query contrast and resampling stability at the small receptive field.
        let cfg = EncodingConfig::new(p.dim, 2, a_small, p.beta, seed)?;
        let enc = encode_implicit(&cfg, &clean, Refinement::None)?;
        let mut on = 0.0;
        let mut off = 0.0;
        for _ in 0..p.probes {
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            on += query_implicit(&cfg, &enc, &[t.cos(), t.sin()])?;
            off += query_implicit(&cfg, &enc, &off_circle(&mut rng, p.extent, p.probe_gap))?;
        }
        let on = on / p.probes as f64;
        let off = off / p.probes as f64;
        data.metric("query-on-circle", on);
        data.metric("query-off-circle", off);
        data.metric("query-contrast", on / off.abs().max(1e-12));

        let opts = RefineOptions {
            patience: p.patience,
            ..RefineOptions::default()
        };
        let half = p.samples / 2;
        let first: Vec<usize> = (0..half).collect();
        let second: Vec<usize> = (half..p.samples).collect();
        let ea = encode_implicit_with(&cfg, &noisy.select(&first)?, Refinement::Iterative, &opts)?;
        let eb = encode_implicit_with(&cfg, &noisy.select(&second)?, Refinement::Iterative, &opts)?;
        data.metric("resample-similarity", cosine(&ea.encoding, &eb.encoding)?);

        let noisy_enc = encode_implicit(&cfg, &noisy, Refinement::None)?;
        let r = p.map_resolution;
        let mut map = Table {
            columns: (0..r).map(|j| format!("{:.3}", grid(j, r, p.extent))).collect(),
            rows: Vec::with_capacity(r),
        };
        for i in 0..r {
            let y = grid(r - 1 - i, r, p.extent);
            let row = (0..r)
                .map(|j| query_implicit(&cfg, &noisy_enc, &[grid(j, r, p.extent), y]))
                .collect::<Result<Vec<f64>>>()?;
            map.push(row);
        }
        data.table("query-map", map);
        out.per_seed.push(SeedReport { seed, data });
    }

    let small = format!("similarity-alpha-{a_small}");
    let large = format!("similarity-alpha-{a_large}");
    out.mean_of(&[&small, &large, "query-contrast", "resample-similarity"]);
    out.aggregate.metric("seeds-ordered", ordered as f64);
    let min_of = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let contrast = min_of(out.collect("query-contrast"));
    let resample = min_of(out.collect("resample-similarity"));
    out.aggregate.metric("min-query-contrast", contrast);
    out.aggregate.metric("min-resample-similarity", resample);
    out.verdict("small-alpha-more-robust", ordered == seeds.len());
    out.verdict("query-contrast", contrast >= p.min_contrast);
    out.verdict("resample-similarity", resample >= p.min_resample);
    Ok(out)
}

fn grid(i: usize, r: usize, extent: f64) -> f64 {
    -extent + 2.0 * extent * i as f64 / (r - 1) as f64
}
