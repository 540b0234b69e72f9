use std::fmt;

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable files, parse errors, invalid options. Exit code 2.
    Input(String),
    /// A numerical procedure failed. Exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) | Self::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wbary::Error> for CliError {
    fn from(e: wbary::Error) -> Self {
        if e.is_numeric() {
            Self::Numeric(e.to_string())
        } else {
            Self::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}
