use std::fmt;

/// Exit status 2: bad flags, bad configuration, unreadable or unwritable files,
/// or any error raised by the library.
pub const EXIT_USAGE: u8 = 2;
/// Exit status 1: a check ran and failed.
pub const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    /// Prefixes the message with the flag it concerns.
    pub fn flag(flag: &str, e: impl fmt::Display) -> Self {
        Self::usage(format!("--{flag}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ridge_anova::Error> for CliError {
    fn from(e: ridge_anova::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}
