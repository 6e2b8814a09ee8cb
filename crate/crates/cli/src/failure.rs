//! Mapping from errors to process exit codes.

use std::fmt;

use gcf_core::GcfError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SUITE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Attaches an explicit exit code to an error chain.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Coded {}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    Coded { code: EXIT_INVALID, message: message.into() }.into()
}

pub fn gcf_code(e: &GcfError) -> u8 {
    match e {
        GcfError::InvalidParameter(_)
        | GcfError::GridMismatch
        | GcfError::Positivity { .. }
        | GcfError::Convexity { .. }
        | GcfError::UnderResolved { .. } => EXIT_INVALID,
        GcfError::NoConvergence { .. }
        | GcfError::Statistical(_)
        | GcfError::StepRejected(_)
        | GcfError::Stiffness { .. }
        | GcfError::InsufficientData { .. } => EXIT_NUMERICAL,
    }
}

/// Exit code for an error: the first recognized cause in the chain decides.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Coded>() {
            return c.code;
        }
        if let Some(g) = cause.downcast_ref::<GcfError>() {
            return gcf_code(g);
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_INVALID
}
