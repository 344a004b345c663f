//! Chain diagnostics: autocorrelation and ergodic-mean traces.

/// Sample autocorrelation at lags `0..=max_lag` (lags beyond the series
/// length are reported as 0). A constant series has autocorrelation 1 at
/// lag 0 and 0 elsewhere.
pub fn acf(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mut out = vec![0.0; max_lag + 1];
    if n == 0 {
        return out;
    }
    out[0] = 1.0;
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if !(var > 0.0) {
        return out;
    }
    for (lag, slot) in out.iter_mut().enumerate().skip(1).take(n.saturating_sub(1)) {
        let cov: f64 = (0..n - lag)
            .map(|t| (series[t] - mean) * (series[t + lag] - mean))
            .sum();
        *slot = cov / var;
    }
    out
}

/// Running means `x_1, (x_1 + x_2) / 2, ...`.
pub fn ergodic_means(series: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    series
        .iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

pub fn mean_abs_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "vectors must have equal length");
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}
