//! Builds the synthetic eight-lead recording and checks it against the
//! bundled copy.

use std::path::Path;

use fecg_anc::qrs::heart_rate;
use fecg_anc::recording::{parse_recording, serialize_recording};
use fecg_anc::synth::{generate, SurrogateParams, SURROGATE_RECORDING};

fn main() -> fecg_anc::Result<()> {
    let params = SurrogateParams::default();
    let s = generate(&params)?;
    let text = serialize_recording(&s.recording);
    assert_eq!(parse_recording(&text, params.fs)?, s.recording);

    println!("{} samples x {} channels at {} Hz", s.recording.len(), s.recording.channel_count(), params.fs);
    println!("maternal: {} beats, {:.1} bpm", s.maternal_peaks.len(), heart_rate(&s.maternal_peaks)?);
    println!("fetal:    {} beats, {:.1} bpm", s.fetal_peaks.len(), heart_rate(&s.fetal_peaks)?);

    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(SURROGATE_RECORDING);
    match std::fs::read_to_string(&bundled) {
        Ok(b) if b == text => println!("matches {}", bundled.display()),
        Ok(_) => println!("differs from {}", bundled.display()),
        Err(e) => println!("{}: {e}", bundled.display()),
    }
    Ok(())
}
