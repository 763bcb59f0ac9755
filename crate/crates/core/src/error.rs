use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("satellite below horizon (elevation {elevation_rad} rad)")]
    BelowHorizon { elevation_rad: f64 },

    #[error("phase configuration has {got} entries, panel has {expected} elements")]
    LengthMismatch { expected: usize, got: usize },

    #[error("channel of {requested} entries exceeds the oracle cap of {cap}")]
    OracleScale { requested: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration problem; `key` is the dotted path of the offending entry.
    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
