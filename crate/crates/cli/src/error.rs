use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] ipdp_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// `2` for a rejected configuration, `3` for a violated precondition and
    /// `1` for anything else.
    pub fn exit_code(&self) -> u8 {
        use ipdp_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::Precondition(_) | E::TooLarge { .. }) => 3,
            Self::Core(_) => 2,
            Self::Io { .. } | Self::Output(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use ipdp_core::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::from(E::InvalidParameter("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(E::DimensionMismatch { left: 1, right: 2 }).exit_code(),
            2
        );
        assert_eq!(CliError::from(E::Precondition("x".into())).exit_code(), 3);
        assert_eq!(
            CliError::from(E::TooLarge { n: 30, max: 16 }).exit_code(),
            3
        );
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "missing");
        assert_eq!(CliError::io("a", io).exit_code(), 1);
    }
}
