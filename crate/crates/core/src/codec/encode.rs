use std::cmp::Ordering;

use crate::codec::bank::SampleBank;
use crate::codec::refine::{refine_source, RefineOptions, RefineTrace};
use crate::codec::{FunctionEncoding, Refinement, SampleSet};
use crate::error::{HdfeError, Result};
use crate::fpe::EncodingConfig;

/// An encoding together with the refinement trace that produced it.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub encoding: FunctionEncoding,
    pub trace: RefineTrace,
}

pub fn encode_explicit(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    mode: Refinement,
) -> Result<FunctionEncoding> {
    encode_explicit_with(cfg, samples, mode, &RefineOptions::default()).map(|e| e.encoding)
}

pub fn encode_explicit_with(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    mode: Refinement,
    opts: &RefineOptions,
) -> Result<Encoded> {
    if samples.is_implicit() {
        return Err(HdfeError::WrongCodec(
            "explicit encoding needs outputs; use encode_implicit for point sets",
        ));
    }
    encode_any(cfg, samples, mode, opts)
}

pub fn encode_implicit(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    mode: Refinement,
) -> Result<FunctionEncoding> {
    encode_implicit_with(cfg, samples, mode, &RefineOptions::default()).map(|e| e.encoding)
}

pub fn encode_implicit_with(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    mode: Refinement,
    opts: &RefineOptions,
) -> Result<Encoded> {
    if !samples.is_implicit() {
        return Err(HdfeError::WrongCodec(
            "implicit encoding takes points without outputs; use encode_explicit",
        ));
    }
    encode_any(cfg, samples, mode, opts)
}

/// Encodes one sample set under several refinement modes, building the
/// sample encodings only once.
pub fn encode_explicit_modes(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    modes: &[Refinement],
    opts: &RefineOptions,
) -> Result<Vec<Encoded>> {
    if samples.is_implicit() {
        return Err(HdfeError::WrongCodec(
            "explicit encoding needs outputs; use encode_implicit for point sets",
        ));
    }
    encode_many(cfg, samples, modes, opts)
}

fn encode_any(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    mode: Refinement,
    opts: &RefineOptions,
) -> Result<Encoded> {
    encode_many(cfg, samples, &[mode], opts).map(|mut v| v.remove(0))
}

fn encode_many(
    cfg: &EncodingConfig,
    samples: &SampleSet,
    modes: &[Refinement],
    opts: &RefineOptions,
) -> Result<Vec<Encoded>> {
    if samples.is_empty() {
        return Err(HdfeError::EmptySamples);
    }
    if samples.input_dim() != cfg.input_dim() {
        return Err(HdfeError::Dimension {
            expected: cfg.input_dim(),
            got: samples.input_dim(),
        });
    }

    // Samples are processed in a canonical order so the result does not
    // depend on how the caller listed them.
    let order = canonical_order(samples);
    let sorted;
    let work = if order.iter().enumerate().all(|(k, &i)| k == i) {
        samples
    } else {
        sorted = samples.select(&order)?;
        &sorted
    };

    let bank = SampleBank::new(cfg, work);
    modes
        .iter()
        .map(|&mode| {
            let refined = refine_source(&bank, mode, opts)?;
            let mut weights = vec![0.0; samples.len()];
            for (k, &i) in order.iter().enumerate() {
                weights[i] = refined.weights[k];
            }
            Ok(Encoded {
                encoding: FunctionEncoding {
                    vector: refined.vector,
                    config_fingerprint: cfg.fingerprint(),
                    refinement: mode,
                    weights: Some(weights),
                },
                trace: refined.trace,
            })
        })
        .collect()
}

fn canonical_order(samples: &SampleSet) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_by(|&a, &b| {
        let key = |i: usize| samples.input(i).iter().copied().chain(samples.output(i));
        for (x, y) in key(a).zip(key(b)) {
            match x.total_cmp(&y) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        a.cmp(&b)
    });
    idx
}
