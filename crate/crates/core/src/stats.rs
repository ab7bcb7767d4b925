//! Numeric helpers for the estimators: pairwise summation (so reductions are
//! reproducible regardless of how callers parallelize path production),
//! mean/standard-error, least squares, median.

/// Cascade summation over the slice in its given order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and the standard error of the mean (`s / sqrt(n)`, zero for a
/// single sample).
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = mean(xs);
    if n == 1 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    (m, (var / n as f64).sqrt())
}

/// Ordinary least-squares slope of `ys` against `ts`.
pub fn least_squares_slope(ts: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(ts.len(), ys.len());
    let n = ts.len();
    if n < 2 {
        return f64::NAN;
    }
    let t_mean = mean(ts);
    let y_mean = mean(ys);
    let num: Vec<f64> = ts
        .iter()
        .zip(ys)
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .collect();
    let den: Vec<f64> = ts.iter().map(|t| (t - t_mean) * (t - t_mean)).collect();
    pairwise_sum(&num) / pairwise_sum(&den)
}

/// Median of a slice (averaging the two middle values for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaNs in median input"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
