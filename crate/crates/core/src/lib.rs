//! Bounds on minimum-error discrimination of weighted mixed quantum states,
//! the measurements that attain them, and independent numerical checks.
//!
//! All indices are 0-based: state `0` is the distinguished state `rho_1` of
//! the conditional bounds.
//!
//! ```
//! use qdiscrim::{full_report, generate, optimize_min_error, GeneratorKind, GeneratorSpec, OracleOptions};
//!
//! let e = generate(&GeneratorSpec::new(GeneratorKind::GinibreFullRank, 3, 3, 7))?;
//! let report = full_report(&e, None)?;
//! let oracle = optimize_min_error(&e, &OracleOptions::default())?;
//! assert!(oracle.q_star >= report.q_lower - 1e-7);
//! # Ok::<(), qdiscrim::Error>(())
//! ```

pub mod bounds;
pub mod channels;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod oracle;
pub mod seed;

pub use bounds::{full_report, full_report_with, BoundsReport, ReportOptions};
pub use channels::{channel_bound, ChannelBoundOptions, ChannelBoundResult, QuantumChannel};
pub use ensemble::{
    generate, GeneratorKind, GeneratorSpec, PriorSpec, ValidationReport, WeightedEnsemble,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianOperator};
pub use measurement::{Certificate, ConditionReport, Povm};
pub use oracle::{optimize_min_error, OracleOptions, OracleResult};

/// Tolerance knobs shared by the front-ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative slack on negative eigenvalues of states.
    pub psd: f64,
    /// Frobenius threshold for projector orthogonality.
    pub ortho: f64,
    /// Slack in the optimality certificate.
    pub cert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: linalg::PSD_TOL,
            ortho: measurement::ORTHO_TOL,
            cert: measurement::CERT_TOL,
        }
    }
}
