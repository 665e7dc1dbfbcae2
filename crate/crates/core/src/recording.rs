//! Whitespace-delimited ASCII recordings in the DaISy layout.
//!
//! Each line is one time instant. A line holds either one value per channel
//! or a leading time column followed by the channels; the time column is
//! recognised by a strictly increasing first column.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::signal::{MultichannelRecording, Signal};

pub const DEFAULT_FS: f64 = 250.0;

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        msg: format!("not a finite number: {tok:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {w} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parses a recording sampled at `fs`. Channel roles follow the DaISy
/// convention (1-5 abdominal, 6-8 thoracic).
pub fn parse_recording(text: &str, fs: f64) -> Result<MultichannelRecording> {
    let rows = parse_rows(text)?;
    if rows.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "a recording needs at least 2 samples, found {}",
            rows.len()
        )));
    }
    let width = rows[0].len();
    let has_time = width >= 3 && rows.windows(2).all(|w| w[1][0] > w[0][0]);
    let first = usize::from(has_time);
    let channels = (first..width)
        .map(|c| Signal::new(rows.iter().map(|r| r[c]).collect(), fs))
        .collect::<Result<Vec<_>>>()?;
    let roles = MultichannelRecording::daisy_roles(channels.len());
    MultichannelRecording::new(channels, roles)
}

/// Writes a recording with a leading time column, using the shortest
/// representation that parses back to the identical value.
pub fn serialize_recording(rec: &MultichannelRecording) -> String {
    let mut out = String::new();
    let fs = rec.fs();
    for n in 0..rec.len() {
        let _ = write!(out, "{}", n as f64 / fs);
        for ch in rec.channels() {
            let _ = write!(out, " {}", ch.samples()[n]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ChannelRole;

    #[test]
    fn detects_time_column() {
        let text = "0 1 2 3 4 5 6 7 8\n0.004 1 2 3 4 5 6 7 8\n0.008 0 0 0 0 0 0 0 0\n";
        let rec = parse_recording(text, 250.0).unwrap();
        assert_eq!(rec.channel_count(), 8);
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.channel(0).unwrap().samples(), &[1.0, 1.0, 0.0]);
        assert_eq!(rec.roles()[4], ChannelRole::Abdominal);
        assert_eq!(rec.roles()[5], ChannelRole::Thoracic);
    }

    #[test]
    fn channels_only_layout() {
        let text = "3 1 2\n1 1 2\n2 1 2\n";
        let rec = parse_recording(text, 250.0).unwrap();
        assert_eq!(rec.channel_count(), 3);
        assert_eq!(rec.channel(0).unwrap().samples(), &[3.0, 1.0, 2.0]);
    }

    #[test]
    fn ragged_row_names_line() {
        let mut text = String::new();
        for i in 0..5 {
            text.push_str(&format!("{} 1 2 3 4 5 6 7 8\n", i as f64 * 0.004));
        }
        text.push_str("0.02 1 2 3 4 5 6\n");
        match parse_recording(&text, 250.0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            parse_recording("0 1 x\n0.004 1 2\n", 250.0),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_recording("0 1 2\n", 250.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(parse_recording("0 1 nan\n0.004 1 2\n", 250.0).is_err());
    }
}
