//! Extraction quality (SNR, running MSE) and beat-detection scores.

use crate::error::{Error, Result};
use crate::qrs::PeakList;
use crate::signal::{power, Signal};

pub const DEFAULT_MATCH_TOLERANCE_MS: f64 = 50.0;

/// `10·log10(P(fecg_estimate) / P(filter_output))`.
///
/// In noise cancellation the estimate is the error sequence and the output
/// is the predicted interference, so lower values mean stronger suppression.
pub fn snr_db(fecg_estimate: &Signal, filter_output: &Signal) -> Result<f64> {
    if fecg_estimate.len() != filter_output.len() {
        return Err(Error::DimensionMismatch {
            expected: fecg_estimate.len(),
            got: filter_output.len(),
        });
    }
    let num = power(fecg_estimate)?;
    let den = power(filter_output)?;
    if den == 0.0 {
        return Err(Error::UndefinedMetric("filter output has zero power".into()));
    }
    if num == 0.0 {
        return Err(Error::UndefinedMetric("error signal has zero power".into()));
    }
    Ok(10.0 * (num / den).log10())
}

/// Running mean of squared error, `MSE(n) = (1/n)·Σ_{i≤n} e(i)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MseCurve {
    values: Vec<f64>,
}

impl MseCurve {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

pub fn mse_curve(e: &[f64]) -> MseCurve {
    let mut sum = 0.0;
    let values = e
        .iter()
        .enumerate()
        .map(|(i, v)| {
            sum += v * v;
            sum / (i + 1) as f64
        })
        .collect();
    MseCurve { values }
}

/// Outcome of pairing detected peaks with reference peaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// (reference index, detected index) in sample units.
    pub pairs: Vec<(usize, usize)>,
}

/// Greedy matching in increasing time order: each detected peak takes the
/// nearest still-unmatched reference peak within `±tol_ms`.
pub fn match_peaks(reference: &PeakList, detected: &PeakList, tol_ms: f64) -> Result<MatchResult> {
    if reference.fs() != detected.fs() {
        return Err(Error::InvalidInput(format!(
            "peak lists use different sampling rates: {} vs {}",
            reference.fs(),
            detected.fs()
        )));
    }
    if !(tol_ms.is_finite() && tol_ms > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol_ms}")));
    }
    let tol_s = tol_ms / 1000.0;
    let fs = reference.fs();
    let refs = reference.indices();
    let mut used = vec![false; refs.len()];
    let mut pairs = Vec::new();
    for &d in detected.indices() {
        let best = refs
            .iter()
            .enumerate()
            .filter(|&(k, &r)| !used[k] && (r as f64 - d as f64).abs() / fs <= tol_s)
            .min_by_key(|&(_, &r)| r.abs_diff(d));
        if let Some((k, &r)) = best {
            used[k] = true;
            pairs.push((r, d));
        }
    }
    let tp = pairs.len();
    Ok(MatchResult {
        tp,
        fp: detected.len() - tp,
        fn_: refs.len() - tp,
        pairs,
    })
}

/// Detection scores in percent. A ratio with a zero denominator is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionReport {
    pub sensitivity: Option<f64>,
    pub accuracy: Option<f64>,
    pub ppv: Option<f64>,
    pub f1: Option<f64>,
}

fn percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn detection_report(m: &MatchResult) -> DetectionReport {
    let sensitivity = percent(m.tp, m.tp + m.fn_);
    let ppv = percent(m.tp, m.tp + m.fp);
    let accuracy = percent(m.tp, m.tp + m.fp + m.fn_);
    let f1 = match (sensitivity, ppv) {
        (Some(se), Some(p)) if se + p > 0.0 => Some(2.0 * p * se / (p + se)),
        _ => None,
    };
    DetectionReport {
        sensitivity,
        accuracy,
        ppv,
        f1,
    }
}

impl DetectionReport {
    /// Every score rounded half-up to two decimals.
    pub fn rounded(&self) -> DetectionReport {
        let r = |v: Option<f64>| v.map(round2);
        DetectionReport {
            sensitivity: r(self.sensitivity),
            accuracy: r(self.accuracy),
            ppv: r(self.ppv),
            f1: r(self.f1),
        }
    }
}

/// Half-up rounding to two decimals.
///
/// Goes through a 12-digit decimal rendering first so that values such as
/// 95.235 produced by binary arithmetic round as their decimal form does.
pub fn round2(v: f64) -> f64 {
    let cleaned: f64 = format!("{v:.12}").parse().unwrap_or(v);
    let scaled = cleaned * 100.0;
    let r = (scaled.abs() + 0.5 + 1e-9).floor().copysign(scaled);
    r / 100.0
}

/// Two-decimal rendering of an optional score; absent scores print as `NA`.
pub fn fmt_percent(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{:.2}", round2(x)))
}
