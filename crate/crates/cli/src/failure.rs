use std::fmt;
use std::path::Path;

use defocus_core::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// A command failure, reported as one `error: kind=... code=... message=...` line.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "usage",
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure {
            kind: "data",
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::io_msg(path, err.to_string())
    }

    pub fn io_msg(path: &Path, message: impl fmt::Display) -> Self {
        Failure {
            kind: "io",
            code: EXIT_IO,
            message: format!("{}: {message}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let kind = match &err {
            Error::Domain(_) => "domain",
            Error::Shape { .. } => "shape",
            Error::Data(_) => "data",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
        };
        let code = if kind == "io" { EXIT_IO } else { EXIT_DATA };
        Failure {
            kind,
            code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message: String = self
            .message
            .chars()
            .map(|c| if c.is_control() { ' ' } else { c })
            .collect();
        write!(f, "error: kind={} code={} message={}", self.kind, self.code, message.trim())
    }
}
