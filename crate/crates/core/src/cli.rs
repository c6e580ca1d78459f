//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when an experiment criterion fails, 2 on
//! usage, parse or IO errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::codec::format::{load, read_header, save};
use crate::codec::{
    decode_at, encode_explicit, encode_implicit, query_implicit, DecodeOptions, Refinement,
};
use crate::datagen::{generate, DatasetSpec};
use crate::error::{HdfeError, Result};
use crate::experiments::{run_experiment, write_outputs, ExperimentName, ExperimentSpec};
use crate::io::{load_config, load_samples, rescale_to_unit, save_samples, sidecar_path, Sidecar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hdfe", version, about = "Encode sampled functions as hypervectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as CSV plus a TOML sidecar.
    Gen(GenArgs),
    /// Encode a sample CSV under a config.
    Encode(EncodeArgs),
    /// Decode an explicit encoding at one or more inputs.
    Decode(DecodeArgs),
    /// Similarity of an implicit encoding with a query point.
    Query(QueryArgs),
    /// Run a study and write its reports.
    Experiment(ExperimentArgs),
    /// Print the header of an encoding file.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// sine-mixture, skewed-uniform, kernel-mixture or circle.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset parameter as key=value, repeatable (e.g. n=1000).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Map outputs onto [0, 1] and record the inverse in the sidecar.
    #[arg(long)]
    pub rescale: bool,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value = "none")]
    pub mode: Refinement,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub encoding: PathBuf,
    /// Comma-separated input point, repeatable.
    #[arg(long = "at", required = true, value_name = "X1,..,XM")]
    pub at: Vec<String>,
    /// Exhaustive grid search instead of gradient ascent.
    #[arg(long)]
    pub grid: bool,
    #[arg(long, default_value_t = 1001)]
    pub resolution: usize,
    /// Dataset sidecar whose rescale record maps decoded values back.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub encoding: PathBuf,
    #[arg(long = "at", required = true, value_name = "X1,..,XM")]
    pub at: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Study name, or `all`.
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated seeds replacing the defaults.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Parameter override as key=value, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub encoding: PathBuf,
}

/// Parses `argv` (program name first) and runs it, printing to the process
/// streams.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Applies `HDFE_THREADS` to the global worker pool; `0` or unset leaves the
/// default.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HDFE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| HdfeError::param("HDFE_THREADS", "must be a nonnegative integer"))?;
    if n > 0 {
        // A pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn key_values(items: &[String], flag: &'static str) -> Result<BTreeMap<String, String>> {
    items
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| HdfeError::param(flag, format!("expected key=value, got `{s}`")))
        })
        .collect()
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| HdfeError::param("at", format!("`{t}` is not a number")))
        })
        .collect()
}

fn warn_outside_unit(err: &mut dyn Write, what: &str, values: &[f64]) {
    let outside = values.iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
    if outside > 0 {
        let _ = writeln!(err, "warning: {outside} {what} outside [0, 1]");
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen(a) => gen(a, out),
        Command::Encode(a) => encode(a, out, err),
        Command::Decode(a) => decode(a, out, err),
        Command::Query(a) => query(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::Inspect(a) => inspect(&a.encoding, out),
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text)
        .map_err(|e| HdfeError::io(Path::new("<stdout>"), e))
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<i32> {
    let params = key_values(&a.params, "param")?;
    let spec = DatasetSpec::from_params(&a.kind, &params, a.seed)?;
    let mut data = generate(&spec)?;
    let mut rescale = None;
    if a.rescale {
        let (s, r) = rescale_to_unit(&data.samples)?;
        data.samples = s;
        rescale = Some(r);
    }
    save_samples(&a.out, &data.samples)?;
    let side = sidecar_path(&a.out);
    Sidecar::new(&spec, &data, rescale)?.save(&side)?;
    emit(out, format_args!("{}\n{}\n", a.out.display(), side.display()))?;
    Ok(EXIT_OK)
}

fn encode(a: EncodeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(&a.config)?;
    let samples = load_samples(&a.samples)?;
    let enc = match samples.outputs() {
        Some(ys) => {
            warn_outside_unit(err, "outputs lie", ys);
            encode_explicit(&cfg, &samples, a.mode)?
        }
        None => encode_implicit(&cfg, &samples, a.mode)?,
    };
    save(&a.out, &cfg, &enc)?;
    emit(out, format_args!("{}\n", a.out.display()))?;
    Ok(EXIT_OK)
}

fn decode(a: DecodeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (cfg, enc) = load(&a.encoding)?;
    let opts = if a.grid {
        DecodeOptions::grid(a.resolution)
    } else {
        DecodeOptions::default()
    };
    let rescale = match &a.sidecar {
        Some(p) => Sidecar::load(p)?.rescale,
        None => None,
    };
    for s in &a.at {
        let x = parse_point(s)?;
        warn_outside_unit(err, "query coordinates lie", &x);
        let y = decode_at(&cfg, &enc, &x, &opts)?;
        let y = rescale.map_or(y, |r| r.inverse(y));
        emit(out, format_args!("{y}\n"))?;
    }
    Ok(EXIT_OK)
}

fn query(a: QueryArgs, out: &mut dyn Write) -> Result<i32> {
    let (cfg, enc) = load(&a.encoding)?;
    for s in &a.at {
        let v = query_implicit(&cfg, &enc, &parse_point(s)?)?;
        emit(out, format_args!("{v}\n"))?;
    }
    Ok(EXIT_OK)
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<i32> {
    let names: Vec<ExperimentName> = if a.name == "all" {
        ExperimentName::ALL.to_vec()
    } else {
        vec![a.name.parse()?]
    };
    let overrides = key_values(&a.overrides, "set")?;
    let mut code = EXIT_OK;
    for name in names {
        let mut spec = ExperimentSpec::new(name);
        if !a.seeds.is_empty() {
            spec = spec.with_seeds(a.seeds.clone());
        }
        spec.overrides = overrides.clone();
        let report = run_experiment(&spec)?;
        write_outputs(&report, &a.out)?;
        for (criterion, ok) in &report.pass {
            let verdict = if *ok { "PASS" } else { "FAIL" };
            emit(out, format_args!("{verdict} {name}/{criterion}\n"))?;
        }
        emit(
            out,
            format_args!("{name}: {:.1}s\n", report.runtime_seconds),
        )?;
        if !report.passed() {
            code = EXIT_CRITERION;
        }
    }
    Ok(code)
}

fn inspect(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let data = std::fs::read(path).map_err(|e| HdfeError::io(path, e))?;
    let h = read_header(&data)?;
    let (_, enc) = load(path)?;
    emit(
        out,
        format_args!(
            "format-version = {}\nN = {}\nm = {}\nalpha = {:?}\nbeta = {:?}\nseed = {}\nrefinement = \"{}\"\nfingerprint = \"{:016x}\"\nweights = {}\n",
            h.version,
            h.n,
            h.m,
            h.alpha,
            h.beta,
            h.seed,
            h.refinement,
            enc.config_fingerprint,
            enc.weights.as_ref().map_or(0, |w| w.len()),
        ),
    )?;
    Ok(EXIT_OK)
}
