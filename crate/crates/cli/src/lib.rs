//! Commands behind the `iaes` binary.

pub mod bench;
pub mod generate;
pub mod solve;
pub mod verify;

use std::path::Path;

use iaes::io::{load_instance, InstanceSpec};
use iaes::{Error, Oracle};
use thiserror::Error as ThisError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(e) => match e {
                Error::NegativeGap(_)
                | Error::MaxIterationsExceeded(_)
                | Error::NumericalBreakdown(_)
                | Error::FactorizationFailure(_) => EXIT_NUMERICAL,
                Error::ConflictingVerdict(_) => EXIT_VERIFICATION,
                Error::Io(_) => EXIT_IO,
                _ => EXIT_USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Loads an instance, replacing its seed when `seed` is given.
pub fn open_instance(path: &Path, seed: Option<u64>) -> CliResult<(InstanceSpec, Oracle)> {
    match seed {
        None => Ok(load_instance(path)?),
        Some(seed) => {
            let text = std::fs::read_to_string(path)?;
            let mut spec: InstanceSpec = serde_json::from_str(&text).map_err(Error::from)?;
            spec.seed = Some(seed);
            let oracle = spec.build(path.parent().unwrap_or(Path::new(".")))?;
            Ok((spec, oracle))
        }
    }
}

/// Name used in tables: the instance file stem, or its directory when the
/// file is the conventional `instance.json`.
pub fn instance_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if stem == "instance" {
        if let Some(dir) = path.parent().and_then(|d| d.file_name()) {
            return dir.to_string_lossy().into_owned();
        }
    }
    stem
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Core(Error::NegativeGap(-1.0)).exit_code(), EXIT_NUMERICAL);
        assert_eq!(
            CliError::Core(Error::ConflictingVerdict(3)).exit_code(),
            EXIT_VERIFICATION
        );
        assert_eq!(
            CliError::Core(Error::InvalidCounts("p0".into())).exit_code(),
            EXIT_USAGE
        );
    }

    #[test]
    fn names() {
        assert_eq!(instance_name(Path::new("runs/moons200/instance.json")), "moons200");
        assert_eq!(instance_name(Path::new("cut_a.json")), "cut_a");
    }
}
