//! Signal containers, the tap-delay regressor, and basic preprocessing.

use crate::error::{Error, Result};

/// A uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    fs: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling frequency must be positive, got {fs}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples from `start` onwards, as a new signal.
    pub fn skip(&self, start: usize) -> Signal {
        let start = start.min(self.samples.len());
        Signal {
            samples: self.samples[start..].to_vec(),
            fs: self.fs,
        }
    }

    /// Every sample multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Signal> {
        Signal::new(self.samples.iter().map(|x| c * x).collect(), self.fs)
    }
}

/// Physiological role of a recording channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelRole {
    Abdominal,
    Thoracic,
    Unknown,
}

/// Equal-length channels sharing one sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelRecording {
    channels: Vec<Signal>,
    roles: Vec<ChannelRole>,
}

impl MultichannelRecording {
    pub fn new(channels: Vec<Signal>, roles: Vec<ChannelRole>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::InvalidInput("recording has no channels".into()));
        };
        if roles.len() != channels.len() {
            return Err(Error::DimensionMismatch {
                expected: channels.len(),
                got: roles.len(),
            });
        }
        let (n, fs) = (first.len(), first.fs());
        for ch in &channels[1..] {
            if ch.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: ch.len(),
                });
            }
            if ch.fs() != fs {
                return Err(Error::InvalidInput(format!(
                    "channel sampling rates differ: {fs} vs {}",
                    ch.fs()
                )));
            }
        }
        Ok(Self { channels, roles })
    }

    /// Roles of the DaISy cutaneous recording: five abdominal leads, then thoracic.
    pub fn daisy_roles(count: usize) -> Vec<ChannelRole> {
        (0..count)
            .map(|i| match i {
                0..=4 => ChannelRole::Abdominal,
                5..=7 => ChannelRole::Thoracic,
                _ => ChannelRole::Unknown,
            })
            .collect()
    }

    pub fn channel(&self, index: usize) -> Option<&Signal> {
        self.channels.get(index)
    }

    pub fn channels(&self) -> &[Signal] {
        &self.channels
    }

    pub fn roles(&self) -> &[ChannelRole] {
        &self.roles
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fs(&self) -> f64 {
        self.channels[0].fs()
    }
}

/// Tap-delay line holding the `order` most recent reference samples,
/// most recent first. Missing history reads as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    taps: Vec<f64>,
}

impl Regressor {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("regressor order must be positive".into()));
        }
        Ok(Self {
            taps: vec![0.0; order],
        })
    }

    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidInput("regressor order must be positive".into()));
        }
        if taps.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("regressor taps must be finite".into()));
        }
        Ok(Self { taps })
    }

    pub fn push(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("cannot push non-finite sample {x}")));
        }
        self.taps.rotate_right(1);
        self.taps[0] = x;
        Ok(())
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn order(&self) -> usize {
        self.taps.len()
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        dot(&self.taps, w)
    }

    pub fn energy(&self) -> f64 {
        dot(&self.taps, &self.taps)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Subtracts the arithmetic mean.
pub fn remove_mean(s: &Signal) -> Result<Signal> {
    if s.is_empty() {
        return Err(Error::InvalidInput("cannot remove mean of an empty signal".into()));
    }
    let mean = s.samples.iter().sum::<f64>() / s.len() as f64;
    Signal::new(s.samples.iter().map(|x| x - mean).collect(), s.fs)
}

/// Mean squared amplitude.
pub fn power(s: &Signal) -> Result<f64> {
    power_of(s.samples())
}

pub(crate) fn power_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("power of an empty signal".into()));
    }
    Ok(samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64)
}
