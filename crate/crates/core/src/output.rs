//! Text artifacts: CSV traces and key=value reports.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// `digits` significant digits, plain notation for moderate exponents.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `n,time_s,value` trace with 9 significant digits.
pub fn trace_csv(values: &[f64], fs: f64) -> String {
    let mut out = String::from("n,time_s,value\n");
    for (n, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{n},{:.6},{}", n as f64 / fs, fmt_sig(*v, 9));
    }
    out
}

/// Reads the value column (the last one) of a CSV trace with a header row.
pub fn read_trace_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    lines.next().ok_or_else(|| Error::InvalidInput("empty trace file".into()))?;
    lines
        .map(|(i, line)| {
            let field = line.rsplit(',').next().unwrap_or_default().trim();
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: format!("not a finite number: {field:?}"),
                })
        })
        .collect()
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueReport {
    entries: Vec<(String, String)>,
}

impl KeyValueReport {
    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected key=value".into(),
            })?;
            r.push(k, v);
        }
        Ok(r)
    }
}
