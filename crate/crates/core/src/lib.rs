//! Shared substrate for the discrete and continuous engines: enumerable
//! state spaces with stable integer ids, group actions on them, absorbing
//! truncation windows, and sparse nonnegative measures.
//!
//! Everything here is immutable after construction and safe to share across
//! worker threads; builders run on a single thread.

pub mod config;
pub mod error;
pub mod group;
pub mod measure;
pub mod model;
pub mod rng;
pub mod site;
pub mod space;

pub use error::CoreError;
pub use group::GroupElem;
pub use measure::FiniteMeasure;
pub use model::{Family, WalkModel};
pub use site::Site;
pub use space::{StateId, Window};
