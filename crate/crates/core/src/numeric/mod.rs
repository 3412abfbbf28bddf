//! Scalar-generic numeric kernels: log-space accumulation, symmetric
//! eigensolvers, series statistics, and least-squares fits.

pub mod dense;
pub mod fit;
pub mod logsumexp;
pub mod real;
pub mod stats;
pub mod tridiag;

pub use dense::SymMatrix;
pub use fit::{fit_line, fit_log_log, LineFit};
pub use logsumexp::{log_add_exp, log_sub_exp, log_sum_exp, LogSumAcc, SignedLogAcc};
pub use real::Real;
pub use stats::{batch_means, BatchSummary, Estimate, RunningMoments};
pub use tridiag::SymTridiag;
