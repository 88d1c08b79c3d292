//! Two-sample and paired t-tests.

use serde::Serialize;

use super::describe::mean_var;
use super::tdist::t_tail_two_sided;
use super::StatsError;
use crate::config::TtestVariant;

/// Outcome of a t-test.
///
/// For a two-sample test `mean_x`/`mean_y` are the group means; for a
/// paired test `mean_x` is the mean difference and `mean_y` the null
/// value 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Degrees of freedom; fractional under Welch–Satterthwaite.
    pub df: f64,
    pub p_two_sided: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl TestResult {
    pub fn mean_diff(&self) -> f64 {
        self.mean_x - self.mean_y
    }
}

/// Two-sample t-test of mean(xs) − mean(ys).
///
/// `Welch` (the default elsewhere in the pipeline) does not assume equal
/// variances and uses the Welch–Satterthwaite degrees of freedom;
/// `Pooled` assumes a common variance with df = n₁ + n₂ − 2. When both
/// samples have zero spread the statistic is undefined if the means agree
/// (`DegenerateVariance`); if they differ the test degenerates to an
/// infinite statistic with p = 0.
pub fn two_sample_t(
    xs: &[f64],
    ys: &[f64],
    variant: TtestVariant,
) -> Result<TestResult, StatsError> {
    for (sample, n) in [(xs, xs.len()), (ys, ys.len())] {
        if n < 2 {
            return Err(StatsError::TooFewObservations { needed: 2, got: n });
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFiniteInput);
        }
    }

    let n1 = xs.len() as f64;
    let n2 = ys.len() as f64;
    let (m1, v1) = mean_var(xs);
    let (m2, v2) = mean_var(ys);

    if v1 == 0.0 && v2 == 0.0 {
        if m1 == m2 {
            return Err(StatsError::DegenerateVariance);
        }
        // No spread but distinct means: the evidence is, in the limit,
        // overwhelming. Surface that rather than dividing 0 by 0.
        return Ok(TestResult {
            statistic: f64::INFINITY.copysign(m1 - m2),
            df: n1 + n2 - 2.0,
            p_two_sided: 0.0,
            mean_x: m1,
            mean_y: m2,
            n_x: xs.len(),
            n_y: ys.len(),
        });
    }

    let (t, df) = match variant {
        TtestVariant::Welch => {
            let a = v1 / n1;
            let b = v2 / n2;
            let se = (a + b).sqrt();
            let df = (a + b) * (a + b) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
            ((m1 - m2) / se, df)
        }
        TtestVariant::Pooled => {
            let sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
            let se = (sp2 * (1.0 / n1 + 1.0 / n2)).sqrt();
            ((m1 - m2) / se, n1 + n2 - 2.0)
        }
    };

    Ok(TestResult {
        statistic: t,
        df,
        p_two_sided: t_tail_two_sided(t, df)?,
        mean_x: m1,
        mean_y: m2,
        n_x: xs.len(),
        n_y: ys.len(),
    })
}

/// Paired t-test on a series of within-unit differences:
/// t = mean(d) / (sd(d)/√n), df = n − 1.
pub fn paired_t(diffs: &[f64]) -> Result<TestResult, StatsError> {
    if diffs.len() < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: diffs.len(),
        });
    }
    if diffs.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }

    let n = diffs.len() as f64;
    let (mean, var) = mean_var(diffs);
    if var == 0.0 {
        // A constant difference series — even a nonzero one — gives the
        // test no spread to judge against.
        return Err(StatsError::DegenerateVariance);
    }

    let t = mean / (var.sqrt() / n.sqrt());
    let df = n - 1.0;
    Ok(TestResult {
        statistic: t,
        df,
        p_two_sided: t_tail_two_sided(t, df)?,
        mean_x: mean,
        mean_y: 0.0,
        n_x: diffs.len(),
        n_y: diffs.len(),
    })
}
