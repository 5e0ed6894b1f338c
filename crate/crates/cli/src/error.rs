use thiserror::Error;

/// Failures of a command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: scenario document, flags or point files. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The input was valid but the computation failed. Exit code 3.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub(crate) fn validation(path: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{path}: {msg}"))
    }
}

impl From<iptv_amc::Error> for CliError {
    fn from(e: iptv_amc::Error) -> Self {
        use iptv_amc::Error as E;
        match e {
            E::InvalidScenario(_)
            | E::ZoneOutOfRange { .. }
            | E::NotADroppingMove { .. }
            | E::OutsideCell(_)
            | E::InvalidAlpha(_)
            | E::NonPositiveRate { .. }
            | E::EmptyClass { .. }
            | E::DegenerateFit(_)
            | E::InvalidConfig(_) => CliError::Validation(e.to_string()),
            E::NonPositiveFactor { .. }
            | E::OracleCapExceeded { .. }
            | E::SingularGenerator
            | E::TargetUnreachable { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
