//! Encoding sampled functions into single hypervectors and reading them back.

pub mod bank;
pub mod decode;
mod encode;
pub mod format;
pub mod refine;
mod samples;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HdfeError, Result};
use crate::fpe::EncodingConfig;
use crate::hv::HyperVector;

pub use decode::{
    decode_at, decode_detailed, query_implicit, reconstruct, DecodeMode, DecodeObjective,
    DecodeOptions, DecodeOutcome,
};
pub use encode::{
    encode_explicit, encode_explicit_modes, encode_explicit_with, encode_implicit,
    encode_implicit_with, Encoded,
};
pub use refine::{refine_weights, RefineOptions, RefineTrace, StepRule, StopReason};
pub use samples::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    None,
    OneShot,
    Iterative,
}

impl Refinement {
    pub fn tag(self) -> u8 {
        match self {
            Refinement::None => 0,
            Refinement::OneShot => 1,
            Refinement::Iterative => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Refinement::None),
            1 => Some(Refinement::OneShot),
            2 => Some(Refinement::Iterative),
            _ => None,
        }
    }
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refinement::None => "none",
            Refinement::OneShot => "oneshot",
            Refinement::Iterative => "iterative",
        })
    }
}

impl FromStr for Refinement {
    type Err = HdfeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Refinement::None),
            "oneshot" | "one-shot" => Ok(Refinement::OneShot),
            "iterative" => Ok(Refinement::Iterative),
            other => Err(HdfeError::param(
                "mode",
                format!("expected none, oneshot or iterative, got `{other}`"),
            )),
        }
    }
}

/// A unit-norm function encoding plus what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEncoding {
    pub vector: HyperVector,
    pub config_fingerprint: u64,
    pub refinement: Refinement,
    /// Per-sample weights in the caller's sample order.
    pub weights: Option<Vec<f64>>,
}

impl FunctionEncoding {
    pub fn check_config(&self, cfg: &EncodingConfig) -> Result<()> {
        if self.config_fingerprint != cfg.fingerprint() {
            return Err(HdfeError::ConfigMismatch {
                encoding: self.config_fingerprint,
                config: cfg.fingerprint(),
            });
        }
        if self.vector.len() != cfg.dim() {
            return Err(HdfeError::Dimension {
                expected: cfg.dim(),
                got: self.vector.len(),
            });
        }
        Ok(())
    }

    /// All real parts followed by all imaginary parts (length 2N).
    pub fn features(&self) -> Vec<f64> {
        let v = self.vector.values();
        v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_tags_and_names() {
        for r in [Refinement::None, Refinement::OneShot, Refinement::Iterative] {
            assert_eq!(Refinement::from_tag(r.tag()), Some(r));
            assert_eq!(r.to_string().parse::<Refinement>().unwrap(), r);
        }
        assert_eq!(Refinement::from_tag(3), None);
        assert!("fast".parse::<Refinement>().is_err());
    }
}
