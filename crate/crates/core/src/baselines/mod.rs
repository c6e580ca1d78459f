//! Reference methods the encoding is compared against.

pub mod ridge;
pub mod vfa;

pub use ridge::{ridge_regress, RidgeModel};
pub use vfa::{matched_gamma, vfa_eval, vfa_fit, vfa_from_coefficients, VfaEncoding};
