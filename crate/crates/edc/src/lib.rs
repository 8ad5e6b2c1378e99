//! File formats, experiment sweeps and the `edc` command line on top of
//! `edc-core`.

pub mod cli;
pub mod fit;
pub mod input;
pub mod pack;
pub mod report;
pub mod sweep;

/// Environment variable capping materialized endpoint counts.
pub const BUDGET_ENV: &str = "EDC_BUDGET_POINTS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("at ℓ = {ell}: {source}")]
    AtEll {
        ell: u32,
        #[source]
        source: edc_core::Error,
    },
    #[error(transparent)]
    Core(#[from] edc_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 validation, 3 distance contract, 4 budget, 1 anything else (IO).
    pub fn exit_code(&self) -> i32 {
        use edc_core::Error as E;
        let core = match self {
            CliError::AtEll { source, .. } => source,
            CliError::Core(e) => e,
            CliError::Usage(_) | CliError::Json(_) => return 2,
            CliError::Io(_) | CliError::Csv(_) => return 1,
        };
        match core {
            E::Contract(_) | E::EscapedCover => 3,
            E::Budget { .. } => 4,
            _ => 2,
        }
    }
}

/// Point budget from the environment, or the library default.
pub fn budget_from_env() -> Result<usize, CliError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&b| b > 0)
            .ok_or_else(|| CliError::Usage(format!("{BUDGET_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(edc_core::DEFAULT_BUDGET_POINTS),
    }
}
