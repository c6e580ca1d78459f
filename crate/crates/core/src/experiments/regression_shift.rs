//! Ridge regression from encodings back to the generating coefficients, with
//! and without a shift between training and test sampling densities.

use serde::Deserialize;

use crate::baselines::ridge_regress;
use crate::codec::{encode_explicit_modes, RefineOptions, Refinement};
use crate::datagen::{SineMixture, Skew};
use crate::error::Result;
use crate::experiments::stats::r_squared_columns;
use crate::experiments::{parse_params, rng_for, RunData, SeedReport, StudyOutput};
use crate::fpe::EncodingConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Params {
    dim: usize,
    alpha: f64,
    beta: f64,
    terms: usize,
    noise: f64,
    train_functions: usize,
    test_functions: usize,
    train_samples: usize,
    test_samples: usize,
    lambda: f64,
    min_r2: f64,
    min_shift_r2: f64,
    min_gain: f64,
}

#[derive(Default)]
struct Design {
    uniform: Vec<f64>,
    skew_none: Vec<f64>,
    skew_one_shot: Vec<f64>,
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let opts = RefineOptions::default();
    let both = [Refinement::None, Refinement::OneShot];
    let mut out = StudyOutput::default();
    for &seed in seeds {
        let mut rng = rng_for(seed, 30);
        let cfg = EncodingConfig::new(p.dim, 1, p.alpha, p.beta, seed)?;
        let total = p.train_functions + p.test_functions;
        let mut targets = Vec::with_capacity(total * p.terms);
        let mut train = Design::default();
        let mut test = Design::default();
        for i in 0..total {
            let f = SineMixture::random(&mut rng, p.terms);
            targets.extend(&f.coefficients);
            let (n, skew, d) = if i < p.train_functions {
                (p.train_samples, Skew::Left, &mut train)
            } else {
                (p.test_samples, Skew::Right, &mut test)
            };
            let u = f.samples(&mut rng, n, Skew::Uniform, p.noise)?;
            let e = encode_explicit_modes(&cfg, &u, &[Refinement::None], &opts)?;
            d.uniform.extend(e[0].encoding.features());
            let s = f.samples(&mut rng, n, skew, p.noise)?;
            let e = encode_explicit_modes(&cfg, &s, &both, &opts)?;
            d.skew_none.extend(e[0].encoding.features());
            d.skew_one_shot.extend(e[1].encoding.features());
        }
        let split = p.train_functions * p.terms;
        let (y_train, y_test) = targets.split_at(split);
        let fit = |x_train: &[f64], x_test: &[f64]| -> Result<f64> {
            let pred = ridge_regress(x_train, y_train, p.train_functions, p.lambda, x_test)?;
            Ok(r_squared_columns(y_test, &pred, p.terms))
        };
        let mut data = RunData::default();
        data.metric("r2-no-shift", fit(&train.uniform, &test.uniform)?);
        data.metric("r2-shift-none", fit(&train.skew_none, &test.skew_none)?);
        data.metric("r2-shift-oneshot", fit(&train.skew_one_shot, &test.skew_one_shot)?);
        out.per_seed.push(SeedReport { seed, data });
    }
    out.mean_of(&["r2-no-shift", "r2-shift-none", "r2-shift-oneshot"]);
    let a = out.aggregate.get("mean-r2-no-shift");
    let none = out.aggregate.get("mean-r2-shift-none");
    let one = out.aggregate.get("mean-r2-shift-oneshot");
    out.aggregate.metric("gain", one - none);
    out.verdict("no-shift", a >= p.min_r2);
    out.verdict("shift-one-shot", one >= p.min_shift_r2);
    out.verdict("one-shot-gain", one - none >= p.min_gain);
    Ok(out)
}
