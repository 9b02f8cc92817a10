use std::fmt;
use std::path::Path;

use drxsim_core::config::ConfigError;
use drxsim_core::Error;

/// A command failure. The variant decides the process exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration, arguments or unparseable input: exit 2.
    Input(String),
    /// The inputs were well formed but the run failed: exit 1.
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }

    pub fn read(path: &Path, err: std::io::Error) -> Self {
        Failure::Input(format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: std::io::Error) -> Self {
        Failure::Runtime(format!("cannot write {}: {err}", path.display()))
    }

    /// Prefixes the message with where it came from, e.g. a file name.
    pub fn context(self, what: impl fmt::Display) -> Self {
        match self {
            Failure::Input(m) => Failure::Input(format!("{what}: {m}")),
            Failure::Runtime(m) => Failure::Runtime(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput { .. } | Error::Parse { .. } | Error::Config(_) => Failure::Input(e.to_string()),
            Error::Overlap { .. } | Error::EmptySeries(_) | Error::InsufficientData(_) | Error::InvalidComparison(_) => {
                Failure::Runtime(e.to_string())
            }
        }
    }
}
