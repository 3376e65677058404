use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VALIDATION: u8 = 1;
    pub const STRICT: u8 = 2;
    pub const NUMERICAL: u8 = 3;
    pub const IO: u8 = 4;
}

#[derive(Debug)]
pub enum CliError {
    /// An input file could not be parsed or failed validation.
    Input {
        path: PathBuf,
        source: qdiscrim::Error,
    },
    /// A computation on valid input failed.
    Compute {
        id: String,
        source: qdiscrim::Error,
    },
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Usage(String),
}

impl CliError {
    pub fn input(path: &Path, source: qdiscrim::Error) -> Self {
        Self::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input { .. } => exit::VALIDATION,
            Self::Compute { source, .. } => match source {
                qdiscrim::Error::NoConvergence { .. }
                | qdiscrim::Error::NoProgress { .. }
                | qdiscrim::Error::NotPsd { .. } => exit::NUMERICAL,
                _ => exit::VALIDATION,
            },
            Self::Io { .. } | Self::Usage(_) => exit::IO,
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> Value {
        let mut v = match self {
            Self::Input { path, source } => json!({
                "error": kind(source),
                "stage": "input",
                "path": path.display().to_string(),
                "message": source.to_string(),
            }),
            Self::Compute { id, source } => json!({
                "error": kind(source),
                "stage": "compute",
                "id": id,
                "message": source.to_string(),
            }),
            Self::Io { path, source } => json!({
                "error": "io",
                "path": path.display().to_string(),
                "message": source.to_string(),
            }),
            Self::Usage(msg) => json!({ "error": "usage", "message": msg }),
        };
        if let Self::Input { source, .. } | Self::Compute { source, .. } = self {
            if let Some(detail) = detail(source) {
                v["detail"] = detail;
            }
        }
        v["exit_code"] = json!(self.exit_code());
        v
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input { path, source } => write!(f, "{}: {source}", path.display()),
            Self::Compute { id, source } => write!(f, "{id}: {source}"),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Self::Usage(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

fn kind(e: &qdiscrim::Error) -> &'static str {
    use qdiscrim::Error::*;
    match e {
        NonHermitian { .. } => "non_hermitian",
        NoConvergence { .. } => "no_convergence",
        NotPsd { .. } => "not_psd",
        DimensionMismatch { .. } => "dimension_mismatch",
        CountMismatch { .. } => "count_mismatch",
        NotSquare { .. } => "not_square",
        SingularState { .. } => "singular_state",
        InvalidRank { .. } => "invalid_rank",
        BlockTooSmall { .. } => "block_too_small",
        WrongStateCount { .. } => "wrong_state_count",
        InvalidPriors(_) => "invalid_priors",
        InvalidSpec(_) => "invalid_spec",
        Parse { .. } => "parse",
        Validation(_) => "validation",
        ConditionsFail(_) => "conditions_fail",
        NoProgress { .. } => "no_progress",
        EmptyChannelList => "empty_channel_list",
        InvalidChannel(_) => "invalid_channel",
        InvalidPovm(_) => "invalid_povm",
    }
}

fn detail(e: &qdiscrim::Error) -> Option<Value> {
    match e {
        qdiscrim::Error::Validation(report) => serde_json::to_value(report).ok(),
        qdiscrim::Error::ConditionsFail(report) => serde_json::to_value(report).ok(),
        _ => None,
    }
}
