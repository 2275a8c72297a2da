use std::path::PathBuf;

use fusionkit_core::Error as CoreError;

/// Process exit status for each failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const CONFLICT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Malformed or invalid configuration, anchored to a line where possible.
    #[error("{origin}:{} {message}", line.map(|l| format!("{l}:")).unwrap_or_default())]
    Config { origin: String, line: Option<usize>, message: String },
    /// Input file violating its schema.
    #[error("{origin}: row {row}: {message}")]
    Schema { origin: String, row: u64, message: String },
    #[error("{origin}: {source}")]
    Core { origin: String, source: CoreError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    pub fn core(origin: impl Into<String>, source: CoreError) -> Self {
        Self::Core { origin: origin.into(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Schema { .. } | Self::Usage(_) => exit::INPUT,
            Self::Io { .. } => exit::IO,
            Self::Core { source, .. } => match source {
                CoreError::TotalConflict(_) => exit::CONFLICT,
                CoreError::DegenerateEvidence(_)
                | CoreError::NumericalDegeneracy(_)
                | CoreError::MissingLikelihood(_) => exit::DEGENERATE,
                CoreError::InvalidInput(_) | CoreError::FrameMismatch(_) | CoreError::Parse { .. } => exit::INPUT,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(AppError::core("x", CoreError::TotalConflict(1.0)).exit_code(), 4);
        assert_eq!(AppError::core("x", CoreError::NumericalDegeneracy("s".into())).exit_code(), 3);
        assert_eq!(AppError::core("x", CoreError::FrameMismatch("f".into())).exit_code(), 2);
        let e = AppError::Config { origin: "a.toml".into(), line: Some(3), message: "bad".into() };
        assert_eq!(e.to_string(), "a.toml:3: bad");
        assert_eq!(e.exit_code(), 2);
    }
}
