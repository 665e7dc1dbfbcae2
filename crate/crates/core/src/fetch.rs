//! Dataset download.

use std::fs;
use std::io::Read as _;
use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::pipeline::decode_text;
use crate::recording::{parse_recording, DEFAULT_FS};
use crate::signal::MultichannelRecording;

/// Where the cutaneous recording of a pregnant woman is published.
pub const DAISY_URL: &str = "https://homes.esat.kuleuven.be/~smc/daisy/daisydata/foetal_ecg.dat.gz";

pub const EXPECTED_SAMPLES: usize = 2500;
pub const EXPECTED_CHANNELS: usize = 8;

/// Checks that downloaded bytes hold a 2500×8 recording (with or without a
/// time column) and returns the decoded text.
pub fn validate_dataset(bytes: &[u8]) -> Result<(String, MultichannelRecording)> {
    let text = decode_text(bytes)
        .map_err(|e| Error::InvalidInput(format!("downloaded data is not readable text: {e}")))?;
    let rec = parse_recording(&text, DEFAULT_FS)?;
    if rec.len() != EXPECTED_SAMPLES || rec.channel_count() != EXPECTED_CHANNELS {
        return Err(Error::InvalidInput(format!(
            "expected {EXPECTED_SAMPLES}×{EXPECTED_CHANNELS} samples, got {}×{}",
            rec.len(),
            rec.channel_count()
        )));
    }
    Ok((text, rec))
}

/// Downloads the recording, validates its shape, and stores it
/// decompressed at `dest`.
pub fn fetch_dataset(url: &str, dest: &Path) -> Result<MultichannelRecording> {
    let agent = ureq::AgentBuilder::new()
        .timeout_connect(Duration::from_secs(10))
        .timeout(Duration::from_secs(60))
        .build();
    let response = agent
        .get(url)
        .call()
        .map_err(|e| Error::Fetch(e.to_string()))?;
    let mut bytes = Vec::new();
    response
        .into_reader()
        .take(64 << 20)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Fetch(format!("{url}: {e}")))?;
    let (text, rec) = validate_dataset(&bytes)?;
    if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(dest, text).map_err(|e| Error::io(dest, e))?;
    Ok(rec)
}
