#![allow(dead_code)]

use std::path::PathBuf;

use fecg_anc::config::PipelineConfig;
use fecg_anc::qrs::AnnotationFile;
use fecg_anc::recording::DEFAULT_FS;
use fecg_anc::signal::{MultichannelRecording, Signal};
use fecg_anc::synth::{SURROGATE_ANNOTATION, SURROGATE_RECORDING};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn recording_path() -> PathBuf {
    data_path(SURROGATE_RECORDING)
}

pub fn annotation_path() -> PathBuf {
    data_path(SURROGATE_ANNOTATION)
}

pub fn load_recording() -> MultichannelRecording {
    fecg_anc::pipeline::read_recording(&recording_path(), DEFAULT_FS).expect("vendored recording")
}

pub fn load_annotation() -> AnnotationFile {
    let text = std::fs::read_to_string(annotation_path()).expect("vendored annotation");
    AnnotationFile::from_text(&text, DEFAULT_FS).expect("annotation parses")
}

/// Shipped defaults pointed at the vendored files.
pub fn default_config(out: PathBuf) -> PipelineConfig {
    PipelineConfig {
        input: Some(recording_path()),
        annotation: Some(annotation_path()),
        output_dir: out,
        ..PipelineConfig::default()
    }
}

pub fn channel(rec: &MultichannelRecording, one_based: usize) -> Signal {
    rec.channel(one_based - 1).expect("channel exists").clone()
}

/// Gaussian spikes of unit height every `spacing` samples, starting at
/// `spacing` and keeping half a spacing clear of the end. Returns the
/// signal and the true centres.
pub fn spike_train(n: usize, spacing: usize, sigma: f64) -> (Vec<f64>, Vec<usize>) {
    let centres: Vec<usize> = (spacing..n.saturating_sub(spacing / 2)).step_by(spacing).collect();
    let mut x = vec![0.0; n];
    for &c in &centres {
        let reach = (6.0 * sigma).ceil() as isize;
        for k in -reach..=reach {
            let i = c as isize + k;
            if (0..n as isize).contains(&i) {
                x[i as usize] += (-(k as f64).powi(2) / (2.0 * sigma * sigma)).exp();
            }
        }
    }
    (x, centres)
}

/// Adds white Gaussian noise at the given signal-to-noise ratio.
pub fn add_noise(x: &[f64], snr_db: f64, seed: u64) -> Vec<f64> {
    let p = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let sd = (p / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    x.iter()
        .map(|v| v + sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
