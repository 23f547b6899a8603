//! Command-line error reporting: every failure prints one line of the form
//! `error[<class>]: <detail>` on stderr and exits nonzero. The class is a
//! stable machine-parsable token; the detail is for humans.

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("error[{class}]: {message}")]
pub struct CliError {
    pub class: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(class: &'static str, message: impl Into<String>) -> Self {
        CliError {
            class,
            message: message.into(),
        }
    }

    pub fn invalid_config(message: impl Into<String>) -> Self {
        CliError::new("invalid-config", message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::new("io", format!("{}: {err}", path.display()))
    }
}

impl From<hbo_core::Error> for CliError {
    fn from(err: hbo_core::Error) -> Self {
        CliError {
            class: err.class(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
