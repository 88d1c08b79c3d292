//! Ordinary least squares via Householder QR.
//!
//! The fit never forms XᵀX: the design matrix is reduced to upper
//! triangular form by Householder reflections, coefficients come out of a
//! back-substitution against Qᵀy, and the classical covariance
//! σ̂²(XᵀX)⁻¹ = σ̂²·R⁻¹R⁻ᵀ is assembled from the inverse of the (small)
//! triangular factor. This keeps the solution stable on designs the
//! normal equations would square the condition number of.

use serde::Serialize;

use super::tdist::t_tail_two_sided;
use super::StatsError;

/// Columns whose reduced norm falls below `max column norm × this` are
/// treated as linearly dependent on their predecessors.
const RANK_TOLERANCE: f64 = 1e-10;

/// A fitted least-squares regression.
#[derive(Debug, Clone, Serialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    /// Classical homoskedastic standard errors, σ̂²(XᵀX)⁻¹ with
    /// σ̂² = RSS/(n−k).
    pub standard_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    /// Two-sided p-values with n−k degrees of freedom.
    pub p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// Observation count.
    pub n: usize,
    /// Regressor count, intercept included.
    pub k: usize,
}

impl OlsFit {
    pub fn df_residual(&self) -> usize {
        self.n - self.k
    }
}

/// Fit y on the design matrix given as rows. Every row must have the same
/// width; the intercept, if wanted, is the caller's column of ones.
pub fn ols_fit(x_rows: &[Vec<f64>], y: &[f64]) -> Result<OlsFit, StatsError> {
    let n = x_rows.len();
    if n == 0 {
        return Err(StatsError::EmptyInput);
    }
    let k = x_rows[0].len();
    if k == 0 {
        return Err(StatsError::DimensionMismatch("no regressors".into()));
    }
    if y.len() != n {
        return Err(StatsError::DimensionMismatch(format!(
            "{} design rows but {} outcomes",
            n,
            y.len()
        )));
    }
    if n <= k {
        return Err(StatsError::TooFewRows { n, k });
    }

    // Flatten row-major and validate as we go.
    let mut a = vec![0.0f64; n * k];
    for (i, row) in x_rows.iter().enumerate() {
        if row.len() != k {
            return Err(StatsError::DimensionMismatch(format!(
                "row {} has {} columns, expected {}",
                i,
                row.len(),
                k
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(StatsError::NonFiniteInput);
            }
            a[i * k + j] = v;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }

    // Scale for the rank test: the largest original column norm.
    let mut max_norm = 0.0f64;
    for j in 0..k {
        let norm = (0..n)
            .map(|i| a[i * k + j] * a[i * k + j])
            .sum::<f64>()
            .sqrt();
        max_norm = max_norm.max(norm);
    }
    if max_norm == 0.0 {
        return Err(StatsError::RankDeficient { column: 0 });
    }
    let tol = max_norm * RANK_TOLERANCE;

    // Householder reduction; reflectors overwrite the lower triangle,
    // R's diagonal lands in `rdiag` (JAMA convention).
    let mut rdiag = vec![0.0f64; k];
    for j in 0..k {
        let mut norm = 0.0f64;
        for i in j..n {
            norm = norm.hypot(a[i * k + j]);
        }
        if norm <= tol {
            return Err(StatsError::RankDeficient { column: j });
        }
        if a[j * k + j] < 0.0 {
            norm = -norm;
        }
        for i in j..n {
            a[i * k + j] /= norm;
        }
        a[j * k + j] += 1.0;

        for l in (j + 1)..k {
            let mut s = 0.0f64;
            for i in j..n {
                s += a[i * k + j] * a[i * k + l];
            }
            s = -s / a[j * k + j];
            for i in j..n {
                a[i * k + l] += s * a[i * k + j];
            }
        }
        rdiag[j] = -norm;
    }

    // Qᵀy.
    let mut qty = y.to_vec();
    for j in 0..k {
        let mut s = 0.0f64;
        for i in j..n {
            s += a[i * k + j] * qty[i];
        }
        s = -s / a[j * k + j];
        for i in j..n {
            qty[i] += s * a[i * k + j];
        }
    }

    // Back-substitution: R β = (Qᵀy)[..k].
    let mut beta = vec![0.0f64; k];
    for j in (0..k).rev() {
        let mut s = qty[j];
        for l in (j + 1)..k {
            s -= a[j * k + l] * beta[l];
        }
        beta[j] = s / rdiag[j];
    }

    // Residuals against the original design.
    let mut residuals = vec![0.0f64; n];
    let mut rss = 0.0f64;
    for (i, row) in x_rows.iter().enumerate() {
        let fitted: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let r = y[i] - fitted;
        residuals[i] = r;
        rss += r * r;
    }

    let df = (n - k) as f64;
    let sigma2 = rss / df;

    // R⁻¹ (upper triangular), then diag(XᵀX)⁻¹ = rows of R⁻¹ dotted with
    // themselves.
    let mut rinv = vec![0.0f64; k * k];
    for j in 0..k {
        rinv[j * k + j] = 1.0 / rdiag[j];
        for i in (0..j).rev() {
            // R[i,l] for l > i lives in the strict upper triangle of `a`.
            let mut s = 0.0f64;
            for l in (i + 1)..=j {
                s += a[i * k + l] * rinv[l * k + j];
            }
            rinv[i * k + j] = -s / rdiag[i];
        }
    }

    let mut standard_errors = vec![0.0f64; k];
    let mut t_values = vec![0.0f64; k];
    let mut p_values = vec![0.0f64; k];
    for i in 0..k {
        let mut var_scale = 0.0f64;
        for j in i..k {
            var_scale += rinv[i * k + j] * rinv[i * k + j];
        }
        let se = (sigma2 * var_scale).sqrt();
        standard_errors[i] = se;
        let t = if se > 0.0 {
            beta[i] / se
        } else if beta[i] == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(beta[i])
        };
        t_values[i] = t;
        p_values[i] = t_tail_two_sided(t, df)?;
    }

    // R² against the centered total sum of squares.
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss = y.iter().map(|v| (v - ybar) * (v - ybar)).sum::<f64>();
    let (r_squared, adj_r_squared) = if tss > 0.0 {
        let r2 = 1.0 - rss / tss;
        let adj = 1.0 - (1.0 - r2) * ((n - 1) as f64) / df;
        (r2, adj)
    } else {
        (0.0, 0.0)
    };

    Ok(OlsFit {
        coefficients: beta,
        standard_errors,
        t_values,
        p_values,
        residuals,
        r_squared,
        adj_r_squared,
        n,
        k,
    })
}
