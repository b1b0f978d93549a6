use std::fmt;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid scope: {0}")]
    InvalidScope(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("invalid decomposition: {}", format_violations(.0))]
    InvalidDecomposition(Vec<String>),
    #[error("width cap exceeded at node {node} ({tuples} tuples > cap {cap})")]
    WidthCapExceeded { node: usize, tuples: u64, cap: u64 },
    #[error("width budget exceeded: {0}")]
    WidthExceeded(String),
    #[error("{what} limit exceeded: {actual} > {limit}")]
    LimitExceeded {
        what: &'static str,
        limit: u64,
        actual: u64,
    },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_violations(violations: &[String]) -> impl fmt::Display + '_ {
    struct V<'a>(&'a [String]);
    impl fmt::Display for V<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}", self.0.join("; "))
        }
    }
    V(violations)
}
