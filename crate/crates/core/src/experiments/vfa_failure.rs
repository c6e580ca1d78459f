//! A kernel mixture on top of a constant offset, encoded by the function
//! encoder and by the kernel-mixture baseline at the same kernel width.

use rand::Rng;
use serde::Deserialize;

use crate::baselines::vfa::{default_ridge_lambda, kernel_mixture};
use crate::baselines::{matched_gamma, vfa_eval, vfa_fit, vfa_from_coefficients};
use crate::codec::{encode_explicit, reconstruct, DecodeOptions, Refinement, SampleSet};
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
    alpha: f64,
    beta: f64,
    components: usize,
    gamma: f64,
    offset: f64,
    samples: usize,
    noise: f64,
    lo: f64,
    hi: f64,
    queries: usize,
    max_mae: f64,
    min_ratio: f64,
}

pub(crate) fn run(table: &toml::Table, seeds: &[u64]) -> Result<StudyOutput> {
    let p: Params = parse_params(table)?;
    let mut out = StudyOutput::default();
    for &seed in seeds {
        let mut rng = rng_for(seed, 40);
        let km = KernelMixture::random(&mut rng, 1, p.components, 1, p.gamma);
        let f = |x: f64| p.offset + km.eval(&[x]);
        let xs: Vec<f64> = (0..p.samples).map(|_| rng.random_range(p.lo..p.hi)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| f(x) + p.noise * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let samples = SampleSet::scalar(&xs, &ys)?;
        let mut qs: Vec<f64> = (0..p.queries).map(|_| rng.random_range(p.lo..p.hi)).collect();
        qs.sort_by(f64::total_cmp);
        let truth: Vec<f64> = qs.iter().map(|&x| f(x)).collect();

        let cfg = EncodingConfig::new(p.dim, 1, p.alpha, p.beta, seed)?;
        let (unit, scale) = rescale_to_unit(&samples)?;
        let enc = encode_explicit(&cfg, &unit, Refinement::None)?;
        let hdfe: Vec<f64> = reconstruct(&cfg, &enc, &qs, &DecodeOptions::default())?
            .into_iter()
            .map(|v| scale.inverse(v))
            .collect();

        let gamma = matched_gamma(&cfg);
        let fitted = vfa_fit(&cfg, &samples, gamma, default_ridge_lambda(p.samples))?;
        let vfa = qs
            .iter()
            .map(|&x| vfa_eval(&cfg, &fitted, &[x]))
            .collect::<Result<Vec<f64>>>()?;
        let exact: Vec<f64> = qs
            .iter()
            .map(|&x| kernel_mixture(&samples, &fitted.coefficients, gamma, &[x]))
            .collect();
        let centers = SampleSet::implicit(1, km.centers.clone())?;
        let known = vfa_from_coefficients(&cfg, &centers, &km.alphas, gamma)?;
        let vfa_known = qs
            .iter()
            .map(|&x| vfa_eval(&cfg, &known, &[x]))
            .collect::<Result<Vec<f64>>>()?;

        let mut data = RunData::default();
        data.metric("hdfe-mae", mae(&truth, &hdfe));
        data.metric("vfa-mae", mae(&truth, &vfa));
        data.metric("vfa-exact-kernel-mae", mae(&truth, &exact));
        data.metric("vfa-known-mae", mae(&truth, &vfa_known));
        data.metric("kernel-gamma", gamma);
        data.series("truth", Series::line("x", "f(x)", qs.clone(), truth));
        data.series("hdfe", Series::line("x", "decoded", qs.clone(), hdfe));
        data.series("vfa", Series::line("x", "decoded", qs.clone(), vfa));
        data.series("vfa-known", Series::line("x", "decoded", qs, vfa_known));
        out.per_seed.push(SeedReport { seed, data });
    }
    out.mean_of(&["hdfe-mae", "vfa-mae", "vfa-exact-kernel-mae", "vfa-known-mae"]);
    let h = out.aggregate.get("mean-hdfe-mae");
    let ratio = out.aggregate.get("mean-vfa-mae") / h;
    out.aggregate.metric("vfa-ratio", ratio);
    out.aggregate.metric("vfa-known-ratio", out.aggregate.get("mean-vfa-known-mae") / h);
    out.verdict("hdfe-mae", h <= p.max_mae);
    out.verdict("vfa-ratio", ratio >= p.min_ratio);
    Ok(out)
}
