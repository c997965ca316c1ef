use std::fmt;

/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for unreadable or invalid input data.
pub const EXIT_DATA: i32 = 3;
/// Exit code for numerical failures.
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cbtest::Error> for CliError {
    fn from(e: cbtest::Error) -> Self {
        use cbtest::Error as E;
        let code = match &e {
            E::Config(_) | E::Parse(_) | E::Json(_) | E::Domain(_) | E::InvalidModel(_) => EXIT_USAGE,
            E::Io(_) => EXIT_DATA,
            E::NonFinite { .. } | E::IllPosed(_) | E::Envelope { .. } => EXIT_NUMERIC,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::usage(e.to_string())
    }
}
