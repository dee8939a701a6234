//! Error taxonomy and process exit codes.
//!
//! Every fallible operation in the crate returns [`Error`]. The CLI maps each
//! variant class to a stable exit code so scripted callers can distinguish
//! bad invocations (2), malformed data (3), refused resource-heavy requests
//! (4), and numeric failures (5) from successful runs (0).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments or an inconsistent configuration.
    #[error("usage: {0}")]
    Usage(String),

    /// Malformed input data or spec file; `line` is 1-based.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// File could not be read or written.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// An enumeration-based computation would exceed the kernel-evaluation cap.
    #[error("{what} needs {needed} kernel evaluations, above the cap of {cap}")]
    ResourceCap {
        what: String,
        needed: u128,
        cap: u64,
    },

    /// Numeric failure (non-positive-definite matrix, overflow, and similar).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Jackknife variance below the floor for the listed pairs (1-based labels).
    #[error("degenerate jackknife variance for pair(s) {}", format_pairs(pairs))]
    DegenerateVariance { pairs: Vec<(usize, usize)> },
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Parse { .. } | Error::Io { .. } => 3,
            Error::ResourceCap { .. } => 4,
            Error::Numeric(_) | Error::DegenerateVariance { .. } => 5,
        }
    }
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    let shown: Vec<String> = pairs
        .iter()
        .take(8)
        .map(|&(i, j)| format!("({},{})", i + 1, j + 1))
        .collect();
    let mut s = shown.join(", ");
    if pairs.len() > 8 {
        s.push_str(&format!(", ... {} total", pairs.len()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(Error::Usage("x".into()).exit_code(), 2);
        assert_eq!(
            Error::Parse {
                path: "f".into(),
                line: 3,
                msg: "bad".into()
            }
            .exit_code(),
            3
        );
        assert_eq!(
            Error::ResourceCap {
                what: "u-statistic".into(),
                needed: 1,
                cap: 0
            }
            .exit_code(),
            4
        );
        assert_eq!(Error::Numeric("x".into()).exit_code(), 5);
        assert_eq!(
            Error::DegenerateVariance { pairs: vec![(0, 1)] }.exit_code(),
            5
        );
    }

    #[test]
    fn degenerate_message_uses_one_based_labels() {
        let e = Error::DegenerateVariance {
            pairs: vec![(0, 1), (2, 4)],
        };
        assert_eq!(
            e.to_string(),
            "degenerate jackknife variance for pair(s) (1,2), (3,5)"
        );
    }
}
