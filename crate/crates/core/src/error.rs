use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every layer of the toolkit.
///
/// Numerical failures carry the name of the operation that gave up so the
/// command-line front end can report it verbatim.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("{op}: no convergence (estimate {estimate:e}, error {error:e})")]
    Convergence {
        op: &'static str,
        estimate: f64,
        error: f64,
    },

    /// The supplied interval does not bracket a sign change.
    #[error("{op}: interval [{lo}, {hi}] does not bracket a root (f = {f_lo:e}, {f_hi:e})")]
    Bracket {
        op: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// The ODE step size collapsed before reaching the target.
    #[error("{op}: step size underflow at x = {x}")]
    Stiffness { op: &'static str, x: f64 },

    /// An integrand or iterate became NaN or infinite.
    #[error("{op}: non-finite value at x = {x}")]
    NonFinite { op: &'static str, x: f64 },

    /// The WKB basis used to project the propagated solution is degenerate.
    #[error("{op}: ill-conditioned projection (|det| = {det:e})")]
    Projection { op: &'static str, det: f64 },

    /// Scattering amplitudes violate flux conservation beyond tolerance.
    #[error("{op}: data quality: unitarity residual {residual:e} exceeds {tolerance:e}")]
    DataQuality {
        op: &'static str,
        residual: f64,
        tolerance: f64,
    },

    /// Phase read-off points disagree: the asymptotic region was not reached.
    #[error("{op}: asymptotics not reached at x = {x} (read-offs differ by {spread:e} rad)")]
    AsymptoticsNotReached { op: &'static str, x: f64, spread: f64 },

    /// A sequence of Wronskian evaluations failed to settle.
    #[error("{op}: limit did not converge (trace: {trace:?})")]
    LimitNotConverged { op: &'static str, trace: Vec<(f64, f64)> },

    /// A semiclassical estimate could not be formed.
    #[error("{op}: estimation failed: {detail}")]
    Estimation { op: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// Name of the operation that failed.
    pub fn op(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::Convergence { op, .. }
            | Error::Bracket { op, .. }
            | Error::Stiffness { op, .. }
            | Error::NonFinite { op, .. }
            | Error::Projection { op, .. }
            | Error::DataQuality { op, .. }
            | Error::AsymptoticsNotReached { op, .. }
            | Error::LimitNotConverged { op, .. }
            | Error::Estimation { op, .. } => op,
        }
    }

    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain { .. })
    }
}
