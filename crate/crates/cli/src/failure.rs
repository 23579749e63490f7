use std::fmt;

use fundamental_core::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
const EXIT_OTHER: u8 = 1;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self::with_code(EXIT_USAGE, msg)
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        Self::with_code(EXIT_INPUT, msg)
    }

    pub fn numeric(msg: impl fmt::Display) -> Self {
        Self::with_code(EXIT_NUMERIC, msg)
    }

    fn with_code(code: u8, msg: impl fmt::Display) -> Self {
        Self {
            code,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn context(self, ctx: impl fmt::Display) -> Self {
        Self {
            code: self.code,
            error: self.error.context(ctx.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) => EXIT_USAGE,
            Error::NyquistViolation { .. } | Error::SignalTooShort { .. } => EXIT_INPUT,
            _ => EXIT_NUMERIC,
        };
        let error = match &e {
            Error::DegenerateMaximum { .. } => anyhow::Error::new(e).context(
                "theorem hypotheses fail: |f| has a flat global maximum; \
                 perturb the amplitudes so every peak of |f| is strict",
            ),
            Error::ConstantModulus => anyhow::Error::new(e).context(
                "theorem hypotheses fail; add a second frequency",
            ),
            _ => anyhow::Error::new(e),
        };
        Self { code, error }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_OTHER,
            error: e.into(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: EXIT_OTHER,
            error: e.into(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
