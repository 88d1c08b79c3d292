//! Descriptive statistics.

use super::StatsError;

/// Arithmetic mean and sample standard deviation (n−1 denominator).
///
/// A single observation has a mean but no defined spread, so the sd slot
/// is `None` rather than a silent zero.
pub fn mean_sd(xs: &[f64]) -> Result<(f64, Option<f64>), StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, None));
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    Ok((mean, Some((ss / (n - 1.0)).sqrt())))
}

/// Mean and sample variance in one pass over the data; callers that need
/// both avoid the double traversal of `mean_sd` + squaring.
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence() {
        let (m, sd) = mean_sd(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(m, 5.0);
        assert_eq!(sd, Some(0.0));
    }

    #[test]
    fn textbook_values() {
        let (m, sd) = mean_sd(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((sd.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(mean_sd(&[]), Err(StatsError::EmptyInput));
    }

    #[test]
    fn single_value_has_no_sd() {
        let (m, sd) = mean_sd(&[7.25]).unwrap();
        assert_eq!(m, 7.25);
        assert_eq!(sd, None);
    }

    #[test]
    fn rejects_nan() {
        assert_eq!(mean_sd(&[1.0, f64::NAN]), Err(StatsError::NonFiniteInput));
    }
}
