//! Pan-Tompkins detection on the maternal chest lead and on a clean
//! synthetic spike train.

use std::path::Path;

use fecg_anc::pipeline::read_recording;
use fecg_anc::qrs::{heart_rate, pan_tompkins_trace, DetectorConfig};
use fecg_anc::signal::Signal;

fn main() -> fecg_anc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/daisy_surrogate.dat");
    let rec = read_recording(&path, 250.0)?;
    let chest = rec.channel(7).expect("eight channels");

    let trace = pan_tompkins_trace(chest, &DetectorConfig::maternal())?;
    println!("maternal lead: {} beats, {:.1} bpm", trace.peaks.len(), heart_rate(&trace.peaks)?);
    print!("{}", trace.peaks.to_text());

    let mut spikes = vec![0.0; 2500];
    for c in (150..2425).step_by(150) {
        for k in -6i32..=6 {
            spikes[(c + k) as usize] = (-(k * k) as f64 / 8.0).exp();
        }
    }
    let found = pan_tompkins_trace(&Signal::new(spikes, 250.0)?, &DetectorConfig::fetal())?;
    println!(
        "\nspike train every 150 samples: {:?} ({:.0} bpm)",
        found.peaks.indices(),
        heart_rate(&found.peaks)?
    );
    Ok(())
}
