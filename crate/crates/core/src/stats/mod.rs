//! Statistical kernel: descriptive statistics, Student-t tail
//! probabilities, two-sample and paired t-tests, and ordinary least
//! squares with classical standard errors.
//!
//! Everything here is a pure function of its inputs. The t-distribution
//! tail is computed through the regularized incomplete beta function
//! (continued fractions, Lentz's method) rather than a lookup table, so
//! fractional Welch–Satterthwaite degrees of freedom are exact to working
//! precision.

mod describe;
mod ols;
mod tdist;
mod ttest;

pub use describe::mean_sd;
pub use ols::{ols_fit, OlsFit};
pub use tdist::{ln_gamma, reg_inc_beta, t_tail_two_sided};
pub use ttest::{paired_t, two_sample_t, TestResult};

/// Errors from the statistical kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty input sequence")]
    EmptyInput,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    /// Both samples (or the difference series) carry zero spread, so the
    /// t statistic is 0/0-undefined.
    #[error("degenerate variance: no spread to test against")]
    DegenerateVariance,
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("degrees of freedom must be positive, got {0}")]
    NonPositiveDf(f64),
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("need more rows than regressors: n = {n}, k = {k}")]
    TooFewRows { n: usize, k: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("incomplete beta did not converge (a = {a}, b = {b}, x = {x})")]
    BetaNoConvergence { a: f64, b: f64, x: f64 },
}
