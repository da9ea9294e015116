//! Fixed catalog of summary features over an ordered numeric series.

use crate::stats;

/// Catalog names in output order.
pub const TIMESERIES_FEATURES: [&str; 16] = [
    "mean",
    "std",
    "min",
    "max",
    "range",
    "first",
    "last",
    "last_minus_first",
    "linear_trend_slope",
    "lag1_autocorrelation",
    "lag2_autocorrelation",
    "peak_count",
    "skewness",
    "kurtosis",
    "energy",
    "mean_abs_change",
];

fn lag_correlation(x: &[f64], k: usize) -> Option<f64> {
    if x.len() < k + 2 {
        return None;
    }
    stats::pearson(&x[..x.len() - k], &x[k..])
}

fn central_moment(x: &[f64], m: f64, p: i32) -> f64 {
    x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / x.len() as f64
}

/// Computes the catalog. An empty series gives all Null; entries needing a
/// minimum length, or a non-zero variance, are Null otherwise.
pub fn timeseries_features(x: &[f64]) -> [Option<f64>; 16] {
    let n = x.len();
    if n == 0 {
        return [None; 16];
    }
    let mean = stats::mean(x).unwrap();
    let var = stats::variance(x).unwrap();
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = (n >= 2).then(|| {
        let tm = (n - 1) as f64 / 2.0;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            let dt = i as f64 - tm;
            sxy += dt * (v - mean);
            sxx += dt * dt;
        }
        sxy / sxx
    });
    let peaks = (n >= 3).then(|| x.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count() as f64);
    let skew = (n >= 3 && var > 0.0).then(|| central_moment(x, mean, 3) / var.powf(1.5));
    let kurt = (n >= 4 && var > 0.0).then(|| central_moment(x, mean, 4) / (var * var) - 3.0);
    let mac = (n >= 2).then(|| x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1) as f64);
    [
        Some(mean),
        Some(var.sqrt()),
        Some(min),
        Some(max),
        Some(max - min),
        Some(x[0]),
        Some(x[n - 1]),
        Some(x[n - 1] - x[0]),
        slope,
        lag_correlation(x, 1),
        lag_correlation(x, 2),
        peaks,
        skew,
        kurt,
        Some(x.iter().map(|v| v * v).sum()),
        mac,
    ]
}
