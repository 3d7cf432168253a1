use thiserror::Error;

/// Errors raised by the substrate types.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown generator symbol `{0}`")]
    UnknownGenerator(String),

    #[error("state {0} is outside the loaded window")]
    OutsideWindow(String),

    #[error("pushforward support escapes the loaded window at state {0}")]
    SupportEscapes(String),

    #[error("group word `{word}` does not act on model family `{family}`")]
    WordFamilyMismatch { word: String, family: String },

    #[error("bad model config: {0}")]
    BadConfig(String),

    #[error("negative weight {weight} at state {state}")]
    NegativeWeight { state: u32, weight: f64 },
}
