//! Runs all five algorithms on the bundled recording and ranks them by SNR
//! (lower means more maternal interference removed).

use std::path::Path;

use fecg_anc::config::{AlgorithmKind, PipelineConfig};
use fecg_anc::metrics::fmt_percent;
use fecg_anc::pipeline::run_batch;

fn main() -> fecg_anc::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = PipelineConfig {
        input: Some(data.join("daisy_surrogate.dat")),
        annotation: Some(data.join("fetal_peaks.ann")),
        output_dir: std::env::temp_dir().join("fecg-anc-compare"),
        ..PipelineConfig::default()
    };
    let batch = run_batch(&cfg, &AlgorithmKind::COMPARED)?;
    println!("{:<8} {:>10} {:>11} {:>7} {:>7}", "", "snr dB", "final mse", "se", "f1");
    for (kind, snr) in &batch.ranking {
        let run = batch.runs.iter().find(|r| r.algorithm == *kind).expect("run for ranked kind");
        let report = run.detection.as_ref().map(|d| d.report.rounded());
        println!(
            "{:<8} {snr:>10.4} {:>11.6} {:>7} {:>7}",
            kind.name(),
            run.final_mse(),
            fmt_percent(report.and_then(|r| r.sensitivity)),
            fmt_percent(report.and_then(|r| r.f1)),
        );
    }
    println!("plots and traces in {}", cfg.output_dir.display());
    Ok(())
}
