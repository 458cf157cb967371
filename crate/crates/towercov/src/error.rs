//! Error taxonomy shared by all modules.
//!
//! The split that matters downstream is *input* versus *numerical*: input
//! errors mean the caller handed us something invalid (bad config, malformed
//! file, out-of-domain argument) and retrying with the same input is
//! pointless; numerical errors mean a solver broke down on data that was
//! structurally valid (singular systems, non-convergence, degenerate
//! channels). The CLI maps the former to exit code 1 and the latter to 2.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration struct failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A function argument was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scalar left the range a model is specified for.
    #[error("{what} = {value} outside supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// Channel or gain matrix with no usable signal dimension.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// Linear system too ill-conditioned to solve reliably.
    #[error("ill-conditioned system (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// An iterative solver exhausted its iteration budget.
    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for solver breakdowns on structurally valid input; false for
    /// errors the caller can fix by changing input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateChannel(_)
                | Error::IllConditioned { .. }
                | Error::NonConvergence { .. }
        )
    }

    /// Stable kebab-case tag for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::OutOfRange { .. } => "out-of-range",
            Error::DegenerateChannel(_) => "degenerate-channel",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_classification_drives_exit_codes() {
        assert!(Error::DegenerateChannel("x".into()).is_numerical());
        assert!(Error::IllConditioned { cond: 1e18 }.is_numerical());
        assert!(Error::NonConvergence {
            what: "bisection",
            iterations: 200
        }
        .is_numerical());
        assert!(!Error::InvalidConfig("x".into()).is_numerical());
        assert!(!Error::InvalidArgument("x".into()).is_numerical());
        assert!(!Error::OutOfRange {
            what: "d2d",
            value: 5.0,
            range: "[10, inf)"
        }
        .is_numerical());
        assert!(!Error::Parse {
            line: 3,
            msg: "bad field".into()
        }
        .is_numerical());
    }

    #[test]
    fn kind_tags_are_stable_kebab_case() {
        assert_eq!(Error::InvalidConfig("x".into()).kind(), "invalid-config");
        assert_eq!(Error::IllConditioned { cond: 1e18 }.kind(), "ill-conditioned");
        assert_eq!(
            Error::Parse {
                line: 1,
                msg: "x".into()
            }
            .kind(),
            "parse"
        );
    }

    #[test]
    fn messages_name_the_offending_quantity() {
        let e = Error::OutOfRange {
            what: "user distance",
            value: 5.0,
            range: "[35 m, inf)",
        };
        let msg = e.to_string();
        assert!(msg.contains("user distance"));
        assert!(msg.contains('5'));
    }
}
