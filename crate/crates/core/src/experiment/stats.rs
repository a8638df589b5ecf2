//! Multi-run aggregation of loss curves and final distributions.

use serde::Serialize;

use crate::error::{QbmError, Result};
use crate::target::format_bitstring;

pub const DEFAULT_WINDOW: usize = 10;

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    // shifted by the first value: identical inputs give exactly that value
    let mean = xs[0] + xs.iter().map(|x| x - xs[0]).sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trailing moving average; the first `window − 1` points average what is
/// available.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..xs.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(w);
            xs[lo..=t].iter().sum::<f64>() / (t + 1 - lo) as f64
        })
        .collect()
}

pub fn running_min(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(f64::INFINITY, |m, &x| {
            *m = m.min(x);
            Some(*m)
        })
        .collect()
}

/// Per-iteration statistics of a batch of loss traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSummary {
    pub window: usize,
    pub iteration: Vec<usize>,
    pub mse_mean: Vec<f64>,
    pub mse_std: Vec<f64>,
    /// Moving average of `mse_mean`.
    pub mse_mavg: Vec<f64>,
    /// Moving average of `mse_std`, the band drawn around `mse_mavg`.
    pub mse_mavg_std: Vec<f64>,
    /// Mean over runs of each run's minimum so far.
    pub mse_min: Vec<f64>,
    pub mse_min_std: Vec<f64>,
}

/// Aggregates traces of possibly different lengths; shorter ones are padded
/// by repeating their last value.
pub fn aggregate(traces: &[Vec<f64>], window: usize) -> Result<CurveSummary> {
    if traces.is_empty() || traces.iter().any(|t| t.is_empty()) {
        return Err(QbmError::Empty("loss traces"));
    }
    if window == 0 {
        return Err(QbmError::Config("moving-average window must be at least 1".into()));
    }
    let len = traces.iter().map(Vec::len).max().unwrap_or(0);
    let padded: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| {
            let last = *t.last().expect("nonempty");
            t.iter().cloned().chain(std::iter::repeat(last)).take(len).collect()
        })
        .collect();
    let mins: Vec<Vec<f64>> = padded.iter().map(|t| running_min(t)).collect();
    let column = |rows: &[Vec<f64>], i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    let (mut mse_mean, mut mse_std, mut mse_min, mut mse_min_std) =
        (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for i in 0..len {
        let (m, s) = mean_std(&column(&padded, i));
        mse_mean.push(m);
        mse_std.push(s);
        let (m, s) = mean_std(&column(&mins, i));
        mse_min.push(m);
        mse_min_std.push(s);
    }
    Ok(CurveSummary {
        window,
        iteration: (0..len).collect(),
        mse_mavg: moving_average(&mse_mean, window),
        mse_mavg_std: moving_average(&mse_std, window),
        mse_mean,
        mse_std,
        mse_min,
        mse_min_std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateStat {
    pub state: String,
    pub mean_prob: f64,
    pub std_prob: f64,
}

/// Per-state mean and standard deviation of probability across runs,
/// ranked by mean (lower index first on ties).
pub fn ranked_states(dists: &[Vec<f64>], n_qubits: usize) -> Result<Vec<StateStat>> {
    let dim = 1usize << n_qubits;
    if dists.is_empty() {
        return Err(QbmError::Empty("final distributions"));
    }
    if let Some(bad) = dists.iter().find(|d| d.len() != dim) {
        return Err(QbmError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let mut stats: Vec<(usize, f64, f64)> = (0..dim)
        .map(|i| {
            let col: Vec<f64> = dists.iter().map(|d| d[i]).collect();
            let (m, s) = mean_std(&col);
            (i, m, s)
        })
        .collect();
    stats.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(stats
        .into_iter()
        .map(|(i, mean_prob, std_prob)| StateStat {
            state: format_bitstring(i, n_qubits),
            mean_prob,
            std_prob,
        })
        .collect())
}

pub fn top_k(dists: &[Vec<f64>], n_qubits: usize, k: usize) -> Result<Vec<StateStat>> {
    let mut all = ranked_states(dists, n_qubits)?;
    all.truncate(k);
    Ok(all)
}
