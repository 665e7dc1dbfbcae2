//! Deterministic surrogate of the eight-channel cutaneous recording of a
//! pregnant woman (five abdominal leads, three thoracic leads, 250 Hz, 10 s).
//!
//! The maternal heart is modelled as three lead sources built from Gaussian
//! P-Q-R-S-T waves. Thoracic channels see fixed mixtures of them. Abdominal
//! channels see a delayed mixture whose gain is modulated by respiration,
//! plus a fetal source at roughly twice the maternal rate, baseline wander
//! and white noise. Fetal R-peak positions are known exactly and serve as
//! ground-truth annotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::qrs::{AnnotationFile, PeakList};
use crate::signal::{MultichannelRecording, Signal};

/// File names used for the vendored copy under `data/`.
pub const SURROGATE_RECORDING: &str = "daisy_surrogate.dat";
pub const SURROGATE_ANNOTATION: &str = "fetal_peaks.ann";

/// (centre relative to R in seconds, width in seconds, amplitude)
type Wave = (f64, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateParams {
    pub seed: u64,
    pub fs: f64,
    pub samples: usize,
    pub maternal_rr_s: f64,
    pub fetal_rr_s: f64,
    pub respiration_hz: f64,
    /// Respiratory gain modulation depth of the maternal component, per abdominal lead.
    pub modulation: [f64; 5],
    /// Maternal mixture (lead A, lead B, lead C) per abdominal lead.
    pub abdominal_mix: [[f64; 3]; 5],
    /// Propagation delay of the maternal component, in samples, per abdominal lead.
    pub abdominal_delay: [usize; 5],
    pub fetal_gain: [f64; 5],
    pub thoracic_mix: [[f64; 3]; 3],
    pub wander: [f64; 5],
    pub noise_sd: f64,
    /// Overall amplitude scale applied to every channel.
    pub scale: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            seed: 0x00DA_15E7,
            fs: 250.0,
            samples: 2500,
            maternal_rr_s: 0.78,
            fetal_rr_s: 0.455,
            respiration_hz: 0.27,
            modulation: [0.10, 0.15, 0.12, 0.10, 0.08],
            abdominal_mix: [
                [0.55, 0.30, 0.10],
                [1.60, 0.90, 0.30],
                [1.10, 0.60, -0.20],
                [0.80, 0.20, 0.40],
                [0.70, 0.50, 0.10],
            ],
            abdominal_delay: [1, 2, 2, 3, 1],
            fetal_gain: [0.45, -0.30, 0.30, 0.20, 0.35],
            thoracic_mix: [[0.60, 0.50, 0.00], [0.70, 0.00, 0.50], [1.00, 0.15, 0.00]],
            wander: [0.04, 0.05, 0.04, 0.03, 0.04],
            noise_sd: 0.012,
            scale: 2.8,
        }
    }
}

const MATERNAL_LEADS: [[Wave; 5]; 3] = [
    [
        (-0.200, 0.025, 0.12),
        (-0.025, 0.010, -0.15),
        (0.000, 0.012, 1.00),
        (0.025, 0.010, -0.25),
        (0.300, 0.060, 0.30),
    ],
    [
        (-0.196, 0.025, 0.05),
        (-0.021, 0.010, -0.30),
        (0.004, 0.012, 0.60),
        (0.029, 0.010, -0.50),
        (0.304, 0.060, 0.15),
    ],
    [
        (-0.200, 0.025, 0.10),
        (-0.025, 0.010, 0.10),
        (0.000, 0.012, -0.40),
        (0.025, 0.010, 0.30),
        (0.300, 0.060, -0.10),
    ],
];

const FETAL_WAVES: [Wave; 4] = [
    (-0.010, 0.004, -0.10),
    (0.000, 0.006, 1.00),
    (0.010, 0.004, -0.20),
    (0.150, 0.030, 0.12),
];

fn beat_times(rng: &mut ChaCha8Rng, start: f64, rr: f64, jitter: f64, end: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = start;
    while t < end {
        times.push(t);
        t += rr * (1.0 + jitter * rng.gen_range(-1.0..1.0));
    }
    times
}

fn render(waves: &[Wave], beats: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for &tb in beats {
        if (t - tb).abs() > 0.6 {
            continue;
        }
        for &(c, w, a) in waves {
            let z = (t - tb - c) / w;
            v += a * (-0.5 * z * z).exp();
        }
    }
    v
}

/// The generated recording plus fetal ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub recording: MultichannelRecording,
    /// Fetal R-peak sample indices (shared by every abdominal lead).
    pub fetal_peaks: PeakList,
    pub maternal_peaks: PeakList,
}

impl Surrogate {
    pub fn fetal_annotation(&self) -> AnnotationFile {
        AnnotationFile {
            provenance: vec![
                "fetal R peaks, valid for every abdominal channel (1-5)".to_string(),
                "source: ground truth of the deterministic surrogate generator (fecg_anc::synth), \
                 default parameters"
                    .to_string(),
                "format: <sample_index>\\t<time_seconds>".to_string(),
            ],
            peaks: self.fetal_peaks.clone(),
        }
    }
}

pub fn generate(p: &SurrogateParams) -> Result<Surrogate> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.samples;
    let duration = n as f64 / p.fs;
    let maternal = beat_times(&mut rng, 0.31, p.maternal_rr_s, 0.03, duration + 0.3);
    let fetal = beat_times(&mut rng, 0.17, p.fetal_rr_s, 0.02, duration + 0.3);

    // lead sources with enough history for the largest delay
    let pad = p.abdominal_delay.iter().copied().max().unwrap_or(0);
    let leads: Vec<Vec<f64>> = MATERNAL_LEADS
        .iter()
        .map(|waves| {
            (0..n + pad)
                .map(|k| render(waves, &maternal, (k as f64 - pad as f64) / p.fs))
                .collect()
        })
        .collect();
    let fetal_wave: Vec<f64> = (0..n).map(|k| render(&FETAL_WAVES, &fetal, k as f64 / p.fs)).collect();

    let noise = Normal::new(0.0, p.noise_sd).expect("noise sd is finite");
    let mut channels = Vec::with_capacity(8);
    for ch in 0..5 {
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let wander_phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let mix = p.abdominal_mix[ch];
        let delay = p.abdominal_delay[ch];
        let samples = (0..n)
            .map(|k| {
                let t = k as f64 / p.fs;
                let resp = (std::f64::consts::TAU * p.respiration_hz * t + phase).sin();
                let gain = 1.0 + p.modulation[ch] * resp;
                let src = k + pad - delay;
                let m: f64 = (0..3).map(|l| mix[l] * leads[l][src]).sum();
                let wander =
                    p.wander[ch] * (std::f64::consts::TAU * p.respiration_hz * t + wander_phase).sin();
                p.scale
                    * (gain * m + p.fetal_gain[ch] * fetal_wave[k] + wander + noise.sample(&mut rng))
            })
            .collect();
        channels.push(Signal::new(samples, p.fs)?);
    }
    for mix in &p.thoracic_mix {
        let samples = (0..n)
            .map(|k| {
                let m: f64 = (0..3).map(|l| mix[l] * leads[l][k + pad]).sum();
                p.scale * (m + noise.sample(&mut rng))
            })
            .collect();
        channels.push(Signal::new(samples, p.fs)?);
    }

    let to_peaks = |times: &[f64]| -> Result<PeakList> {
        let idx = times
            .iter()
            .map(|t| (t * p.fs).round() as usize)
            .filter(|&i| i < n)
            .collect();
        PeakList::new(idx, p.fs)
    };
    Ok(Surrogate {
        recording: MultichannelRecording::new(channels, MultichannelRecording::daisy_roles(8))?,
        fetal_peaks: to_peaks(&fetal)?,
        maternal_peaks: to_peaks(&maternal)?,
    })
}
