use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The integrand (or transform) produced a non-finite value.
    #[error("non-finite evaluation at {at} in {op}")]
    Evaluation { op: &'static str, at: String },

    #[error("convergence failure in {op}: {msg}")]
    Convergence { op: &'static str, msg: String },

    /// A memory kernel whose implied spectral strength is negative (gain medium).
    #[error("positivity violation: implied f^2({omega}) = {value:e} < 0; the kernel describes gain, not dissipation")]
    Positivity { omega: f64, value: f64 },

    #[error("divergence in {op}: |value| = {value:e} exceeded {limit:e} at t = {t}")]
    Divergence {
        op: &'static str,
        value: f64,
        limit: f64,
        t: f64,
    },

    #[error("lattice blow-up: non-finite value in {field} at site {site}, t = {t}")]
    BlowUp {
        field: &'static str,
        site: usize,
        t: f64,
    },

    #[error("undamped resonance: |denominator| = {magnitude:e} at omega = {omega}; refine the frequency grid")]
    Resonance { omega: f64, magnitude: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("table error at line {line}: {msg}")]
    Table { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}
