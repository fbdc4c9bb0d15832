//! Summary measures over a sequence of nested models.

use crate::error::{input, Result};
use crate::scalar::Scalar;

/// `1 − dev(r)·dfres(last) / (dev(last)·dfres(r))`.
///
/// Returns `(value, degenerate)`. A row with no residual df is 1 by
/// convention; when the last model has zero deviance the measure is undefined
/// and is reported as 1 with `degenerate` set.
pub fn adjusted_rsq<T: Scalar>(dev: T, dfres: usize, dev_last: T, dfres_last: usize) -> (T, bool) {
    if !(dev_last > T::zero()) {
        return (T::one(), true);
    }
    if dfres == 0 {
        return (T::one(), false);
    }
    let value = T::one() - dev * T::of_usize(dfres_last) / (dev_last * T::of_usize(dfres));
    (value, false)
}

/// AIC and BIC relative to the saturated model: `dev + 2·dfmod` and
/// `dev + dfmod·ln n`. Reported only as diagnostics; selection never uses them.
pub fn penalized_scores<T: Scalar>(dev: T, dfmod: usize, n: T) -> (T, T) {
    let k = T::of_usize(dfmod);
    (dev + k + k, dev + k * n.ln())
}

/// Area under the normalized deviance-vs-parameters curve divided by the area
/// of the triangle below the straight line. A straight line gives 1; values
/// near 0 mean the information is concentrated in a few parameters.
///
/// `curve` holds `(dfmod, dev)` points. Parameters are scaled so the largest
/// model sits at `x = 0` and the smallest at `x = 1`; deviance is divided by
/// its maximum.
pub fn info_concentration<T: Scalar>(curve: &[(usize, T)]) -> Result<T> {
    if curve.len() < 2 {
        return input("concentration needs at least two curve points");
    }
    let dev_max = curve.iter().map(|p| p.1).fold(T::zero(), T::max);
    let df_max = curve.iter().map(|p| p.0).max().unwrap_or(0);
    let df_min = curve.iter().map(|p| p.0).min().unwrap_or(0);
    if !(dev_max > T::zero()) || df_max == df_min {
        return Ok(T::zero());
    }
    let span = T::of_usize(df_max - df_min);
    let mut points: Vec<(T, T)> = curve
        .iter()
        .map(|&(df, dev)| (T::of_usize(df_max - df) / span, dev / dev_max))
        .collect();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite curve coordinates"));
    let half = T::of(0.5);
    let area = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * half)
        .sum::<T>();
    Ok(area / half)
}
