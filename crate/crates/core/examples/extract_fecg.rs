//! End-to-end extraction on the bundled recording: CRLS on channel 2 with
//! the chest lead as reference, fetal QRS detection, scoring and plots.
//! Files go to $FECG_ANC_OUT (default `out`).

use std::path::Path;

use fecg_anc::config::PipelineConfig;
use fecg_anc::pipeline::{run_pipeline, run_report};

fn main() -> fecg_anc::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut cfg = PipelineConfig {
        input: Some(data.join("daisy_surrogate.dat")),
        annotation: Some(data.join("fetal_peaks.ann")),
        ..PipelineConfig::default()
    };
    if let Some(ch) = std::env::args().nth(1) {
        cfg.set("desired", &ch)?;
    }
    let art = run_pipeline(&cfg)?;
    print!("{}", run_report(&art.run, &cfg).to_text());
    for f in &art.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
