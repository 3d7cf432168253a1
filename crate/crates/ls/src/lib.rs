//! The Lyons-Sullivan machinery over the Euclidean covering models: data
//! validation, the sweep operator and recursive LS-measures, kappa-rejection
//! path discretization, the discretized chain, and its Green function.

pub mod chain_green;
pub mod data;
pub mod discretize;
pub mod kappa;
pub mod sweep;

pub use data::{LsData, ValidationReport};
pub use kappa::KappaSource;
pub use sweep::{ls_measure_recursive, LsMeasureResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LsError {
    #[error("(D1) fails: F must sit strictly inside V (r_f = {r_f}, r_v = {r_v})")]
    D1 { r_f: f64, r_v: f64 },

    #[error("(D2) fails: neighboring F and V overlap (r_f + r_v = {sum} >= 1)")]
    D2 { sum: f64 },

    #[error("evenly-covered condition fails: r_v = {0} >= 1/2, lifted V-balls overlap")]
    EvenCover(f64),

    #[error("(D4) data constant C = {c} must exceed 1")]
    BadHarnackConstant { c: f64 },

    #[error("balance constant {b} is too large: the F-level set would be smaller than {min_r}")]
    BalanceTooLarge { b: f64, min_r: f64 },

    #[error("balance constant {b} is too small: F radius {r_f} violates (D2) against r_v = {r_v}")]
    BalanceTooSmall { b: f64, r_f: f64, r_v: f64 },

    #[error("negative bin mass {mass:.3e} in mu': the Harnack constant was underestimated (kappa = {kappa})")]
    NegativeSweepMass { mass: f64, kappa: f64 },

    #[error("kappa wants y in F_x: |y - x| = {dist} > r_f = {r_f}")]
    KappaEntryOutsideF { dist: f64, r_f: f64 },

    #[error("kappa wants z on the V-sphere: | |z - x| - r_v | = {off} beyond snap tolerance")]
    KappaExitOffSphere { off: f64 },

    #[error("sweep rounds exceeded the decay cap of {cap} (residual {residual:.3e}): decay contract broken")]
    DecayContractBroken { cap: u32, residual: f64 },

    #[error("empty boundary bin {bin} in a density estimate; use fewer bins or more paths")]
    EmptyBin { bin: usize },

    #[error("analytic kappa requires phi = 1; the drift model needs a density table")]
    NeedsDensityTable,

    #[error("{0} requires a transient model (d = 3)")]
    NeedsTransience(&'static str),

    #[error("timeout fraction {frac} exceeds the declared bound {bound}")]
    TooManyTimeouts { frac: f64, bound: f64 },
}
