//! Process exit codes.
//!
//! `2` bad flags or parameter values, `3` unreadable or inconsistent input
//! and output files, `4` numerical failure during evolution.

use std::fmt;

use levelseg::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }

    /// Attach a context line, keeping the exit code.
    pub fn context(self, ctx: impl fmt::Display + Send + Sync + 'static) -> Self {
        Failure {
            code: self.code,
            error: self.error.context(ctx),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Spec(_) => EXIT_USAGE,
            Error::NonFinite { .. } => EXIT_NUMERIC,
            Error::Parse { .. }
            | Error::Truncated { .. }
            | Error::Format(_)
            | Error::DimensionMismatch { .. }
            | Error::Io { .. } => EXIT_INPUT,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
