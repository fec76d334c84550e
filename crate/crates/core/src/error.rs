use crate::model::{BranchLabel, FluctuationSet, Violation};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("parameters are not balanced: {field1} = {left} but {field2} = {right}")]
    Asymmetric {
        field1: &'static str,
        field2: &'static str,
        left: f64,
        right: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{branch} branch requires 1{} lambda >= 0, got {radicand}", if matches!(.branch, BranchLabel::Minus) { "-" } else { "+" })]
    BranchDomain { branch: BranchLabel, radicand: f64 },

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: estimate {estimate}, error bound {error_bound}"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("individual normal/anomalous integrals diverge in 1D; a positive infrared cutoff k_min is required")]
    MissingInfraredCutoff,

    #[error("mode is dynamically unstable (imaginary frequency {omega_im})")]
    DynamicallyUnstable { omega_im: f64 },

    #[error("self-consistency loop exceeded {max_iter} iterations (residual {residual})")]
    MaxIterations {
        max_iter: usize,
        residual: f64,
        last: FluctuationSet,
    },

    #[error("spectrum became unstable at iteration {iteration} (gap {gap})")]
    UnstableIteration {
        iteration: usize,
        gap: f64,
        last_stable: FluctuationSet,
    },

    #[error("finite-difference Hessian disagrees with the analytic one (relative deviation {rel_dev:.3e})")]
    InconsistentHessian { rel_dev: f64 },

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config error: {0}")]
    Config(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
