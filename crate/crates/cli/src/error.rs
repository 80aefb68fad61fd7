use std::fmt;
use subsql::ErrorKind;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or unreadable input/output files.
    Config(String),
    Core(subsql::Error),
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Physics => 3,
                ErrorKind::Numeric => 4,
            },
            CliError::NotConverged(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::NotConverged(m) => write!(f, "fit did not converge: {m}"),
        }
    }
}

impl From<subsql::Error> for CliError {
    fn from(e: subsql::Error) -> Self {
        CliError::Core(e)
    }
}
