//! Pan-Tompkins style QRS detection.
//!
//! Stages: zero-phase bandpass (cascaded second-order Butterworth high-pass
//! and low-pass sections run forward then backward), five-point derivative,
//! squaring, centred moving-window integration, and dual adaptive thresholds
//! on the integrated signal with RR-based search-back. Each accepted
//! integrator peak is moved to the largest-magnitude bandpassed sample
//! within the refinement window.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub low_hz: f64,
    pub high_hz: f64,
    pub window_ms: f64,
    pub refractory_ms: f64,
    /// Beats closer than this to the previous QRS with less than half its
    /// slope are treated as T waves. Zero disables the check.
    pub t_wave_ms: f64,
    /// Search-back interval assumed before two beats have been seen.
    pub initial_rr_ms: f64,
    pub learning_s: f64,
    pub refine_ms: f64,
    /// Weight of a new peak in the running signal/noise peak estimates.
    pub peak_smoothing: f64,
    /// Position of the primary threshold between the noise and signal levels.
    pub threshold_fraction: f64,
    pub searchback_factor: f64,
}

impl DetectorConfig {
    /// Adult/maternal profile.
    pub fn maternal() -> Self {
        Self {
            low_hz: 5.0,
            high_hz: 15.0,
            window_ms: 80.0,
            refractory_ms: 200.0,
            t_wave_ms: 360.0,
            initial_rr_ms: 800.0,
            learning_s: 2.0,
            refine_ms: 40.0,
            peak_smoothing: 0.125,
            threshold_fraction: 0.25,
            searchback_factor: 1.66,
        }
    }

    /// Fetal profile: narrower complexes and rates up to ~180 bpm.
    pub fn fetal() -> Self {
        Self {
            low_hz: 10.0,
            high_hz: 30.0,
            window_ms: 50.0,
            refractory_ms: 72.0,
            t_wave_ms: 0.0,
            initial_rr_ms: 430.0,
            ..Self::maternal()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fetal" => Some(Self::fetal()),
            "maternal" => Some(Self::maternal()),
            _ => None,
        }
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz) {
            return Err(Error::Config(format!(
                "bandpass corners must satisfy 0 < low < high, got {} and {}",
                self.low_hz, self.high_hz
            )));
        }
        if self.high_hz >= fs / 2.0 {
            return Err(Error::Config(format!(
                "sampling rate {fs} Hz is too low for a {} Hz upper corner",
                self.high_hz
            )));
        }
        let positive = [
            ("integration window", self.window_ms),
            ("refractory period", self.refractory_ms),
            ("initial RR", self.initial_rr_ms),
            ("learning period", self.learning_s),
            ("search-back factor", self.searchback_factor),
        ];
        for (what, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{what} must be positive, got {v}")));
            }
        }
        for (what, v) in [("T-wave window", self.t_wave_ms), ("refinement window", self.refine_ms)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{what} must be non-negative, got {v}")));
            }
        }
        for (what, v) in [
            ("peak smoothing", self.peak_smoothing),
            ("threshold fraction", self.threshold_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{what} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Detected R-peak sample indices, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    indices: Vec<usize>,
    fs: f64,
}

impl PeakList {
    pub fn new(indices: Vec<usize>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidInput(format!("sampling rate must be positive, got {fs}")));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("peak indices must be strictly increasing".into()));
        }
        Ok(Self { indices, fs })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices.iter().map(|&i| i as f64 / self.fs)
    }

    /// One `<sample_index>\t<time_seconds>` line per peak.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&i, t) in self.indices.iter().zip(self.times()) {
            let _ = writeln!(out, "{i}\t{t:.6}");
        }
        out
    }

    /// Parses the peak text format; `#` lines and blank lines are skipped.
    pub fn from_text(text: &str, fs: f64) -> Result<Self> {
        let mut indices = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            let mut fields = line.split('\t');
            let idx: usize = fields
                .next()
                .unwrap_or_default()
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad sample index: {e}")))?;
            if let Some(t) = fields.next() {
                let t: f64 = t
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(format!("bad time: {e}")))?;
                if (t - idx as f64 / fs).abs() > 1e-3 {
                    return Err(parse_err(format!(
                        "time {t} does not match sample {idx} at {fs} Hz"
                    )));
                }
            }
            indices.push(idx);
        }
        Self::new(indices, fs)
    }
}

/// A reference peak list with its provenance notes.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationFile {
    pub provenance: Vec<String>,
    pub peaks: PeakList,
}

impl AnnotationFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.provenance {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str(&self.peaks.to_text());
        out
    }

    pub fn from_text(text: &str, fs: f64) -> Result<Self> {
        let provenance = text
            .lines()
            .filter_map(|l| l.trim_start().strip_prefix('#'))
            .map(|l| l.trim().to_string())
            .collect();
        Ok(Self {
            provenance,
            peaks: PeakList::from_text(text, fs)?,
        })
    }
}

/// Beats per minute from the first-to-last peak span.
pub fn heart_rate(p: &PeakList) -> Result<f64> {
    let idx = p.indices();
    if idx.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "heart rate needs at least 2 peaks, got {}",
            idx.len()
        )));
    }
    let span = (idx[idx.len() - 1] - idx[0]) as f64;
    Ok(60.0 * p.fs() * (idx.len() - 1) as f64 / span)
}

/// Second-order section `y[n] = b0·x[n] + b1·x[n−1] + b2·x[n−2] − a1·y[n−1] − a2·y[n−2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Butterworth low-pass via the bilinear transform, corner pre-warped.
    pub fn butterworth_lowpass(fc: f64, fs: f64) -> Self {
        let k = (PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
        let b0 = k * k * norm;
        Self {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - SQRT_2 * k + k * k) * norm],
        }
    }

    pub fn butterworth_highpass(fc: f64, fs: f64) -> Self {
        let k = (PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
        Self {
            b: [norm, -2.0 * norm, norm],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - SQRT_2 * k + k * k) * norm],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
                (x2, x1, y2, y1) = (x1, x0, y1, y0);
                y0
            })
            .collect()
    }
}

/// Zero-phase bandpass: high-pass then low-pass, forward and backward.
pub fn bandpass(x: &[f64], cfg: &DetectorConfig, fs: f64) -> Vec<f64> {
    let hp = Biquad::butterworth_highpass(cfg.low_hz, fs);
    let lp = Biquad::butterworth_lowpass(cfg.high_hz, fs);
    let mut y = lp.apply(&hp.apply(x));
    y.reverse();
    let mut y = lp.apply(&hp.apply(&y));
    y.reverse();
    y
}

/// Centred five-point derivative, zero outside the signal.
fn derivative(x: &[f64]) -> Vec<f64> {
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= x.len() {
            0.0
        } else {
            x[i as usize]
        }
    };
    (0..x.len() as isize)
        .map(|n| (2.0 * at(n + 2) + at(n + 1) - at(n - 1) - 2.0 * at(n - 2)) / 8.0)
        .collect()
}

/// Centred moving average over `width` samples.
fn integrate(x: &[f64], width: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    let half = width / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (lo + width).min(n);
            (prefix[hi] - prefix[lo]) / width as f64
        })
        .collect()
}

fn ms_to_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round() as usize
}

/// Smallest whole-sample gap that is at least `ms` long.
fn refractory_samples(ms: f64, fs: f64) -> usize {
    ((ms * fs / 1000.0 - 1e-9).ceil() as usize).max(1)
}

/// Intermediate stages, exposed for plotting and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorTrace {
    pub bandpassed: Vec<f64>,
    pub integrated: Vec<f64>,
    pub peaks: PeakList,
}

pub fn pan_tompkins(s: &Signal, cfg: &DetectorConfig) -> Result<PeakList> {
    Ok(pan_tompkins_trace(s, cfg)?.peaks)
}

pub fn pan_tompkins_trace(s: &Signal, cfg: &DetectorConfig) -> Result<DetectorTrace> {
    let fs = s.fs();
    cfg.validate(fs)?;
    let n = s.len();
    if (n as f64) < 2.0 * fs {
        log::warn!("QRS detection on {n} samples, under the recommended two seconds at {fs} Hz");
    }
    if n == 0 {
        return Ok(DetectorTrace {
            bandpassed: Vec::new(),
            integrated: Vec::new(),
            peaks: PeakList::new(Vec::new(), fs)?,
        });
    }
    let mean = s.samples().iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = s.samples().iter().map(|x| x - mean).collect();
    let bp = bandpass(&centred, cfg, fs);
    let slope = derivative(&bp);
    let squared: Vec<f64> = slope.iter().map(|v| v * v).collect();
    let mwi = integrate(&squared, ms_to_samples(cfg.window_ms, fs).max(1));

    let beats = threshold_peaks(&mwi, &slope, cfg, fs);
    let refined = refine(&beats, &bp, cfg, fs);
    Ok(DetectorTrace {
        bandpassed: bp,
        integrated: mwi,
        peaks: PeakList::new(refined, fs)?,
    })
}

struct Thresholds {
    spki: f64,
    npki: f64,
    fraction: f64,
}

impl Thresholds {
    fn primary(&self) -> f64 {
        self.npki + self.fraction * (self.spki - self.npki)
    }

    fn secondary(&self) -> f64 {
        0.5 * self.primary()
    }
}

fn max_slope_around(slope: &[f64], i: usize, half: usize) -> f64 {
    let lo = i.saturating_sub(half);
    let hi = (i + half + 1).min(slope.len());
    slope[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Adaptive dual-threshold classification of integrator peaks.
fn threshold_peaks(mwi: &[f64], slope: &[f64], cfg: &DetectorConfig, fs: f64) -> Vec<usize> {
    let n = mwi.len();
    let candidates: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| mwi[i] > 0.0 && mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1])
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }

    let learn = ((cfg.learning_s * fs).round() as usize).clamp(1, n);
    let train = &mwi[..learn];
    let mut th = Thresholds {
        spki: train.iter().fold(0.0f64, |m, &v| m.max(v)) / 3.0,
        npki: train.iter().sum::<f64>() / learn as f64 / 2.0,
        fraction: cfg.threshold_fraction,
    };
    let refractory = refractory_samples(cfg.refractory_ms, fs);
    let t_wave = ms_to_samples(cfg.t_wave_ms, fs);
    let slope_half = ms_to_samples(cfg.window_ms, fs).max(1) / 2;
    let alpha = cfg.peak_smoothing;

    let mut beats: Vec<usize> = Vec::new();
    let rr_estimate = |beats: &[usize]| -> f64 {
        if beats.len() < 2 {
            return cfg.initial_rr_ms * fs / 1000.0;
        }
        let recent = &beats[beats.len().saturating_sub(9)..];
        (recent[recent.len() - 1] - recent[0]) as f64 / (recent.len() - 1) as f64
    };

    for (ci, &i) in candidates.iter().enumerate() {
        // Search back over already-seen candidates when a beat is overdue.
        loop {
            let last = beats.last().copied();
            let since = i - last.unwrap_or(0);
            if (since as f64) <= cfg.searchback_factor * rr_estimate(&beats) {
                break;
            }
            let lo = last.map_or(0, |l| l + refractory);
            let best = candidates[..ci]
                .iter()
                .copied()
                .filter(|&c| c >= lo && c < i && mwi[c] > th.secondary())
                .max_by(|&a, &b| mwi[a].total_cmp(&mwi[b]));
            match best {
                Some(c) => {
                    th.spki = 0.25 * mwi[c] + 0.75 * th.spki;
                    beats.push(c);
                }
                None => break,
            }
        }

        let v = mwi[i];
        match beats.last().copied() {
            Some(last) if i - last < refractory => {
                if v > mwi[last] {
                    *beats.last_mut().unwrap() = i;
                }
            }
            last => {
                if v > th.primary() {
                    let is_t_wave = match last {
                        Some(l) if t_wave > 0 && i - l < t_wave => {
                            max_slope_around(slope, i, slope_half)
                                < 0.5 * max_slope_around(slope, l, slope_half)
                        }
                        _ => false,
                    };
                    if is_t_wave {
                        th.npki = alpha * v + (1.0 - alpha) * th.npki;
                    } else {
                        th.spki = alpha * v + (1.0 - alpha) * th.spki;
                        beats.push(i);
                    }
                } else {
                    th.npki = alpha * v + (1.0 - alpha) * th.npki;
                }
            }
        }
    }
    beats
}

/// Moves each beat to the largest |bandpassed| sample nearby, then enforces
/// the refractory spacing on the refined positions.
fn refine(beats: &[usize], bp: &[f64], cfg: &DetectorConfig, fs: f64) -> Vec<usize> {
    let half = ms_to_samples(cfg.refine_ms, fs);
    let refractory = refractory_samples(cfg.refractory_ms, fs);
    let mut out: Vec<usize> = Vec::with_capacity(beats.len());
    for &b in beats {
        let lo = b.saturating_sub(half);
        let hi = (b + half + 1).min(bp.len());
        let r = (lo..hi)
            .max_by(|&x, &y| bp[x].abs().total_cmp(&bp[y].abs()).then(y.cmp(&x)))
            .unwrap_or(b);
        match out.last().copied() {
            Some(prev) if r <= prev || r - prev < refractory => {
                if bp[r].abs() > bp[prev].abs() {
                    out.pop();
                    // the replacement can only move later, away from anything before prev
                    if out.last().is_none_or(|&pp| r > pp && r - pp >= refractory) {
                        out.push(r);
                    } else {
                        out.push(prev);
                    }
                }
            }
            _ => out.push(r),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heart_rate_examples() {
        let p = PeakList::new(vec![0, 250], 250.0).unwrap();
        assert_eq!(heart_rate(&p).unwrap(), 60.0);
        let p = PeakList::new((0..10).map(|k| 150 * k).collect(), 250.0).unwrap();
        assert!((heart_rate(&p).unwrap() - 100.0).abs() < 1e-12);
        // 22 beats spread evenly from 0 to 2499 samples
        let idx: Vec<usize> = (0..22).map(|k| k * 119).collect();
        let p = PeakList::new(idx, 250.0).unwrap();
        let hr = heart_rate(&p).unwrap();
        assert!((hr - 60.0 * 250.0 / 119.0).abs() < 1e-9);
        assert!((110.0..=160.0).contains(&hr));
        assert!(matches!(
            heart_rate(&PeakList::new(vec![3], 250.0).unwrap()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn peak_text_roundtrip() {
        let p = PeakList::new(vec![0, 113, 2499], 250.0).unwrap();
        let text = p.to_text();
        assert_eq!(text, "0\t0.000000\n113\t0.452000\n2499\t9.996000\n");
        assert_eq!(PeakList::from_text(&text, 250.0).unwrap(), p);
        assert!(PeakList::from_text("5\t0.02\n3\t0.012\n", 250.0).is_err());
        assert!(PeakList::from_text("5\t1.0\n", 250.0).is_err());
    }

    #[test]
    fn annotation_keeps_provenance() {
        let a = AnnotationFile {
            provenance: vec!["source: generator".into(), "channel: 2".into()],
            peaks: PeakList::new(vec![10, 20], 250.0).unwrap(),
        };
        let back = AnnotationFile::from_text(&a.to_text(), 250.0).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn config_checks_band_against_fs() {
        assert!(DetectorConfig::fetal().validate(250.0).is_ok());
        assert!(matches!(DetectorConfig::fetal().validate(50.0), Err(Error::Config(_))));
        let mut c = DetectorConfig::maternal();
        c.low_hz = 20.0;
        assert!(c.validate(250.0).is_err());
    }

    #[test]
    fn zero_and_constant_signals_have_no_peaks() {
        for v in [0.0, 3.5] {
            let s = Signal::new(vec![v; 2500], 250.0).unwrap();
            for cfg in [DetectorConfig::fetal(), DetectorConfig::maternal()] {
                assert!(pan_tompkins(&s, &cfg).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn butterworth_gains() {
        let fs = 250.0;
        let lp = Biquad::butterworth_lowpass(15.0, fs);
        let hp = Biquad::butterworth_highpass(5.0, fs);
        // DC gain of the low-pass is 1, of the high-pass 0
        assert!(((lp.b.iter().sum::<f64>()) / (1.0 + lp.a[0] + lp.a[1]) - 1.0).abs() < 1e-12);
        assert!(hp.b.iter().sum::<f64>().abs() < 1e-15);
    }
}
