//! Exact (linear-solve) machinery for random walks on countable sets:
//! kernel powers, irreducibility, hitting-measure discretization onto a
//! distinguished orbit, Green functions and Martin kernels, harmonic
//! extension and restriction, symmetry dichotomies, and averaging operators.
//!
//! Everything operates on a [`Truncated`] window; all solves are for the
//! sub-stochastic chain killed at the window boundary and report leaked
//! mass rather than hiding it.

pub mod averaging;
pub mod green;
pub mod harmonic;
pub mod hitting;
pub mod kernel;
pub mod paths;
pub mod solve;
pub mod symmetry;
pub mod tree;
pub mod trunc;

pub use hitting::HittingFamily;
pub use trunc::Truncated;

use lsd_core::space::StateId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error(transparent)]
    Solve(#[from] solve::SolveError),

    #[error("function is missing a value on reachable state {0:?}")]
    MissingValue(StateId),

    #[error("state {0:?} is not in the distinguished orbit")]
    NotInOrbit(StateId),

    #[error("leaked boundary mass {leak:.3e} exceeds tolerance {tol:.3e}; enlarge the window radius")]
    LeakTooLarge { leak: f64, tol: f64 },

    #[error("group element `{0}` is not central in the declared presentation")]
    NotCentral(String),

    #[error("no positive-probability path from the orbit within {0} steps")]
    NoPositivePath(usize),

    #[error("model is not symmetric; {0} requires a symmetric transition family")]
    NotSymmetric(&'static str),

    #[error("Green value at the base point is below the division guard ({0:.3e})")]
    MartinDivisionGuard(f64),

    #[error("orbit does not meet the window")]
    EmptyOrbit,

    #[error("isotropy data invalid: {0}")]
    BadIsotropy(String),

    #[error("ratio h(gamma x)/h(x) is not constant over the orbit (relative variance {0:.3e})")]
    RatioNotConstant(f64),
}
