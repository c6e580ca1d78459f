//! Hyperdimensional function encoding.
//!
//! Sampled functions are turned into single unit-norm complex vectors by
//! superposing `E_X(x_i) (x) E_Y(y_i)` over the samples, where `E_X` and
//! `E_Y` are fractional power encoders. Values are read back by unbinding
//! the query input and searching for the best-matching output.
//!
//! ```
//! use hdfe::codec::{decode_at, encode_explicit, DecodeOptions, Refinement, SampleSet};
//! use hdfe::fpe::EncodingConfig;
//!
//! let cfg = EncodingConfig::new(2048, 1, 10.0, 2.5, 7).unwrap();
//! let samples = SampleSet::scalar(&[0.25], &[0.8]).unwrap();
//! let enc = encode_explicit(&cfg, &samples, Refinement::None).unwrap();
//! let y = decode_at(&cfg, &enc, &[0.25], &DecodeOptions::grid(1001)).unwrap();
//! assert!((y - 0.8).abs() < 0.01);
//! ```

pub mod baselines;
pub mod cli;
pub mod codec;
pub mod datagen;
pub mod error;
pub mod experiments;
pub mod fpe;
pub mod hv;
pub mod io;

pub use error::{HdfeError, Result};
