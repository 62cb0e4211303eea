use serde::Serialize;

pub type SimResult<T> = std::result::Result<T, SimError>;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0}")]
    Core(#[from] ia_arrival::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The requested experiment cannot be run as specified.
    #[error("refused: {0}")]
    Refused(String),

    #[error("trial {trial}: IA failed on {attempts} consecutive channel draws ({last})")]
    Regeneration {
        trial: usize,
        attempts: usize,
        last: ia_arrival::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl SimError {
    pub fn kind(&self) -> &'static str {
        match self {
            SimError::Core(e) => e.kind(),
            SimError::Config(_) => "config",
            SimError::Refused(_) => "refused",
            SimError::Regeneration { .. } => "regeneration_exhausted",
            SimError::Io(_) => "io",
            SimError::Csv(_) => "csv",
        }
    }

    /// One-line JSON description for machine consumers.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            message: self.to_string(),
        })
        .expect("plain struct serializes")
    }
}
