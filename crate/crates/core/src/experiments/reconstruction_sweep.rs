//! Reconstruction error of sine mixtures, swept over dimension and
//! receptive field.

use rand::Rng;
use serde::Deserialize;

use crate::codec::{encode_explicit, reconstruct, DecodeOptions, Refinement};
use crate::datagen::{SineMixture, Skew};
use crate::error::{HdfeError, Result};
use crate::experiments::stats::mae;
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
    queries: usize,
    max_complexity: f64,
    max_draws: usize,
    sweep_dims: Vec<usize>,
    sweep_alpha: f64,
    sweep_samples: usize,
    receptive_alphas: Vec<f64>,
    receptive_terms: usize,
    max_mae: f64,
}

struct Fit {
    mae: f64,
    xs: Vec<f64>,
    decoded: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn fit<R: Rng>(
    rng: &mut R,
    f: &SineMixture,
    dim: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    samples: usize,
    noise: f64,
    queries: usize,
) -> Result<Fit> {
    let cfg = EncodingConfig::new(dim, 1, alpha, beta, seed)?;
    let s = f.samples(rng, samples, Skew::Uniform, noise)?;
    let enc = encode_explicit(&cfg, &s, Refinement::None)?;
    let mut xs: Vec<f64> = (0..queries).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    let decoded = reconstruct(&cfg, &enc, &xs, &DecodeOptions::default())?;
    let truth: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    Ok(Fit {
        mae: mae(&truth, &decoded),
        xs,
        decoded,
    })
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let mut out = StudyOutput::default();
    for &seed in seeds {
        let mut data = RunData::default();

        // Functions of bounded complexity at the reference setting.
        let mut rng = rng_for(seed, 3);
        let mut draws = 0;
        let f = loop {
            let f = SineMixture::random(&mut rng, p.terms);
            draws += 1;
            if f.complexity() <= p.max_complexity {
                break f;
            }
            if draws >= p.max_draws {
                return Err(HdfeError::Solver(format!(
                    "no function with complexity <= {} in {draws} draws",
                    p.max_complexity
                )));
            }
        };
        let r = fit(&mut rng, &f, p.dim, p.alpha, p.beta, seed, p.samples, p.noise, p.queries)?;
        data.metric("complexity", f.complexity());
        data.metric("mae", r.mae);
        let truth: Vec<f64> = r.xs.iter().map(|&x| f.eval(x)).collect();
        data.series("truth", Series::line("x", "f(x)", r.xs.clone(), truth));
        data.series("reconstruction", Series::line("x", "decoded", r.xs, r.decoded));

        // Dimension sweep on an unconstrained function.
        let mut rng = rng_for(seed, 4);
        let g = SineMixture::random(&mut rng, p.terms);
        for &dim in &p.sweep_dims {
            let mut qrng = rng_for(seed, 5);
            let r = fit(
                &mut qrng, &g, dim, p.sweep_alpha, p.beta, seed, p.sweep_samples, p.noise, p.queries,
            )?;
            data.metric(&format!("mae-dim-{dim}"), r.mae);
            data.series(&format!("dim-{dim}"), Series::line("x", "decoded", r.xs, r.decoded));
        }

        // Receptive field on a function with higher harmonics.
        let mut rng = rng_for(seed, 6);
        let h = SineMixture::random(&mut rng, p.receptive_terms);
        for &alpha in &p.receptive_alphas {
            let mut qrng = rng_for(seed, 7);
            let r = fit(&mut qrng, &h, p.dim, alpha, p.beta, seed, p.samples, p.noise, p.queries)?;
            data.metric(&format!("mae-alpha-{alpha}"), r.mae);
            data.series(&format!("alpha-{alpha}"), Series::line("x", "decoded", r.xs, r.decoded));
        }
        out.per_seed.push(SeedReport { seed, data });
    }

    let mut keys = vec!["mae".to_string(), "complexity".to_string()];
    keys.extend(p.sweep_dims.iter().map(|d| format!("mae-dim-{d}")));
    keys.extend(p.receptive_alphas.iter().map(|a| format!("mae-alpha-{a}")));
    let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
    out.mean_of(&refs);

    let sweep: Vec<f64> = p
        .sweep_dims
        .iter()
        .map(|d| out.aggregate.get(&format!("mean-mae-dim-{d}")))
        .collect();
    let dims: Vec<f64> = p.sweep_dims.iter().map(|&d| d as f64).collect();
    out.aggregate
        .series("mae-vs-dim", Series::line("N", "mean MAE", dims, sweep.clone()));
    out.verdict("mae-at-low-complexity", out.aggregate.get("mean-mae") <= p.max_mae);
    out.verdict(
        "dimension-sweep",
        !sweep.is_empty() && sweep.windows(2).all(|w| w[1] <= w[0]),
    );
    Ok(out)
}
