//! Stability conditions, Bogoliubov spectra, quantum-fluctuation integrals
//! and droplet energy landscapes for balanced and general binary Bose
//! mixtures, including interspecies normal and anomalous fluctuations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Small fixed-size matrix code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod bogoliubov;
pub mod droplet;
pub mod error;
pub mod fluctuations;
pub mod model;
pub mod numerics;
pub mod stability;
pub mod validation;

pub use error::{Error, Result};
pub use model::{
    gamma_1d, reduce_symmetric, validate, BranchLabel, FluctuationSet, Gamma1d, MixtureParams, ParamsPatch,
    SymmetricParams, Violation,
};
