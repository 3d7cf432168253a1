//! Theorem-level verification suites binding the discrete and continuous
//! engines together. Every check names the statement it verifies, its
//! tolerance or p-value, and a pass/fail/inconclusive verdict; suites are
//! reproducible bit-for-bit from (config, seed).

pub mod calibration;
pub mod ls_checks;
pub mod report;
pub mod stats;
pub mod suites;
pub mod walk_checks;

pub use report::{CheckReport, Verdict};

use thiserror::Error;

/// Shared run parameters for checks.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: u64,
    /// default sample budget for checks that do not pin their own
    pub n_paths: u64,
    /// global statistical threshold (pass means p above it)
    pub p_threshold: f64,
}

impl Ctx {
    pub fn new(seed: u64, n_paths: u64) -> Ctx {
        Ctx {
            seed,
            n_paths,
            p_threshold: 0.01,
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    /// A precondition gate refused to run the check (configuration error,
    /// not a failed verdict).
    #[error("precondition: {0}")]
    Precondition(String),

    #[error(transparent)]
    Walk(#[from] lsd_walk::WalkError),

    #[error(transparent)]
    Ls(#[from] lsd_ls::LsError),

    #[error(transparent)]
    Core(#[from] lsd_core::CoreError),
}
