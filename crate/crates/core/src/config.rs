//! Run configuration as flat `key = value` text.
//!
//! Every tunable default is a key. Keys are applied in order, so a later
//! `detector = <preset>` resets earlier `detector.*` overrides.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::combination::{
    ComboVariant, MixingParams, DEFAULT_CLMS_MU_FAST, DEFAULT_CLMS_MU_SLOW,
    DEFAULT_CRLS_LAMBDA_FAST, DEFAULT_CRLS_LAMBDA_SLOW, DEFAULT_RLS_LMS_LAMBDA,
    DEFAULT_RLS_LMS_MU,
};
use crate::error::{Error, Result};
use crate::filters::{
    FilterConfig, DEFAULT_LMS_MU, DEFAULT_NLMS_EPS, DEFAULT_NLMS_MU, DEFAULT_ORDER,
    DEFAULT_RLS_DELTA, DEFAULT_RLS_LAMBDA,
};
use crate::metrics::DEFAULT_MATCH_TOLERANCE_MS;
use crate::qrs::DetectorConfig;
use crate::recording::DEFAULT_FS;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "FECG_ANC_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Lms,
    Nlms,
    Rls,
    Clms,
    Crls,
    RlsLms,
}

impl AlgorithmKind {
    /// The five algorithms compared in batch mode.
    pub const COMPARED: [AlgorithmKind; 5] = [
        AlgorithmKind::Nlms,
        AlgorithmKind::Rls,
        AlgorithmKind::Clms,
        AlgorithmKind::RlsLms,
        AlgorithmKind::Crls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Lms => "lms",
            AlgorithmKind::Nlms => "nlms",
            AlgorithmKind::Rls => "rls",
            AlgorithmKind::Clms => "clms",
            AlgorithmKind::Crls => "crls",
            AlgorithmKind::RlsLms => "rls-lms",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "lms" => AlgorithmKind::Lms,
            "nlms" => AlgorithmKind::Nlms,
            "rls" => AlgorithmKind::Rls,
            "clms" => AlgorithmKind::Clms,
            "crls" => AlgorithmKind::Crls,
            "rls-lms" | "rls+lms" | "rlslms" => AlgorithmKind::RlsLms,
            other => return Err(Error::Config(format!("unknown algorithm {other:?}"))),
        })
    }

    pub fn is_combination(self) -> bool {
        matches!(self, AlgorithmKind::Clms | AlgorithmKind::Crls | AlgorithmKind::RlsLms)
    }
}

/// Parameters for every algorithm; the selected one is built on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmParams {
    pub order: usize,
    pub lms_mu: f64,
    pub nlms_mu: f64,
    pub nlms_eps: f64,
    pub rls_lambda: f64,
    pub rls_delta: f64,
    pub clms_mu_fast: f64,
    pub clms_mu_slow: f64,
    pub crls_lambda_fast: f64,
    pub crls_lambda_slow: f64,
    pub rls_lms_lambda: f64,
    pub rls_lms_mu: f64,
    pub mixing: MixingParams,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            lms_mu: DEFAULT_LMS_MU,
            nlms_mu: DEFAULT_NLMS_MU,
            nlms_eps: DEFAULT_NLMS_EPS,
            rls_lambda: DEFAULT_RLS_LAMBDA,
            rls_delta: DEFAULT_RLS_DELTA,
            clms_mu_fast: DEFAULT_CLMS_MU_FAST,
            clms_mu_slow: DEFAULT_CLMS_MU_SLOW,
            crls_lambda_fast: DEFAULT_CRLS_LAMBDA_FAST,
            crls_lambda_slow: DEFAULT_CRLS_LAMBDA_SLOW,
            rls_lms_lambda: DEFAULT_RLS_LMS_LAMBDA,
            rls_lms_mu: DEFAULT_RLS_LMS_MU,
            mixing: MixingParams::default(),
        }
    }
}

/// A single filter or a combination, fully parameterised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Single(FilterConfig),
    Combination(ComboVariant, MixingParams),
}

impl AlgorithmParams {
    pub fn build(&self, kind: AlgorithmKind) -> Algorithm {
        match kind {
            AlgorithmKind::Lms => Algorithm::Single(FilterConfig::Lms { mu: self.lms_mu }),
            AlgorithmKind::Nlms => Algorithm::Single(FilterConfig::Nlms {
                mu: self.nlms_mu,
                eps: self.nlms_eps,
            }),
            AlgorithmKind::Rls => Algorithm::Single(FilterConfig::Rls {
                lambda: self.rls_lambda,
                delta: self.rls_delta,
            }),
            AlgorithmKind::Clms => Algorithm::Combination(
                ComboVariant::Clms {
                    mu_fast: self.clms_mu_fast,
                    mu_slow: self.clms_mu_slow,
                },
                self.mixing,
            ),
            AlgorithmKind::Crls => Algorithm::Combination(
                ComboVariant::Crls {
                    lambda_fast: self.crls_lambda_fast,
                    lambda_slow: self.crls_lambda_slow,
                    delta: self.rls_delta,
                },
                self.mixing,
            ),
            AlgorithmKind::RlsLms => Algorithm::Combination(
                ComboVariant::RlsLms {
                    lambda: self.rls_lms_lambda,
                    mu: self.rls_lms_mu,
                    delta: self.rls_delta,
                },
                self.mixing,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub fs: f64,
    /// 1-based channel numbers.
    pub desired: usize,
    pub reference: usize,
    pub algorithm: AlgorithmKind,
    pub params: AlgorithmParams,
    pub remove_mean: bool,
    pub burn_in: usize,
    pub detector_preset: String,
    pub detector: DetectorConfig,
    pub annotation: Option<PathBuf>,
    pub match_tolerance_ms: f64,
    pub plot_start: usize,
    pub plot_end: usize,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            fs: DEFAULT_FS,
            desired: 2,
            reference: 8,
            algorithm: AlgorithmKind::Crls,
            params: AlgorithmParams::default(),
            remove_mean: true,
            burn_in: 25,
            detector_preset: "fetal".into(),
            detector: DetectorConfig::fetal(),
            annotation: None,
            match_tolerance_ms: DEFAULT_MATCH_TOLERANCE_MS,
            plot_start: 1600,
            plot_end: 2400,
            output_dir: std::env::var_os(OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (key, value) = (key.trim(), value.trim());
        let p = &mut self.params;
        let d = &mut self.detector;
        match key {
            "input" => self.input = (!value.is_empty()).then(|| PathBuf::from(value)),
            "fs" => self.fs = parse_num(key, value)?,
            "desired" => self.desired = parse_num(key, value)?,
            "reference" => self.reference = parse_num(key, value)?,
            "algorithm" => self.algorithm = AlgorithmKind::parse(value)?,
            "order" => p.order = parse_num(key, value)?,
            "lms.mu" => p.lms_mu = parse_num(key, value)?,
            "nlms.mu" => p.nlms_mu = parse_num(key, value)?,
            "nlms.eps" => p.nlms_eps = parse_num(key, value)?,
            "rls.lambda" => p.rls_lambda = parse_num(key, value)?,
            "rls.delta" => p.rls_delta = parse_num(key, value)?,
            "clms.mu_fast" => p.clms_mu_fast = parse_num(key, value)?,
            "clms.mu_slow" => p.clms_mu_slow = parse_num(key, value)?,
            "crls.lambda_fast" => p.crls_lambda_fast = parse_num(key, value)?,
            "crls.lambda_slow" => p.crls_lambda_slow = parse_num(key, value)?,
            "rls_lms.lambda" => p.rls_lms_lambda = parse_num(key, value)?,
            "rls_lms.mu" => p.rls_lms_mu = parse_num(key, value)?,
            "mix.mu_a" => p.mixing.mu_a = parse_num(key, value)?,
            "mix.a_plus" => p.mixing.a_plus = parse_num(key, value)?,
            "mix.a0" => p.mixing.a0 = parse_num(key, value)?,
            "remove_mean" => self.remove_mean = parse_bool(key, value)?,
            "burn_in" => self.burn_in = parse_num(key, value)?,
            "detector" => {
                *d = DetectorConfig::preset(value)
                    .ok_or_else(|| Error::Config(format!("unknown detector preset {value:?}")))?;
                self.detector_preset = value.to_string();
            }
            "detector.low_hz" => d.low_hz = parse_num(key, value)?,
            "detector.high_hz" => d.high_hz = parse_num(key, value)?,
            "detector.window_ms" => d.window_ms = parse_num(key, value)?,
            "detector.refractory_ms" => d.refractory_ms = parse_num(key, value)?,
            "detector.t_wave_ms" => d.t_wave_ms = parse_num(key, value)?,
            "detector.initial_rr_ms" => d.initial_rr_ms = parse_num(key, value)?,
            "detector.learning_s" => d.learning_s = parse_num(key, value)?,
            "detector.refine_ms" => d.refine_ms = parse_num(key, value)?,
            "detector.peak_smoothing" => d.peak_smoothing = parse_num(key, value)?,
            "detector.threshold_fraction" => d.threshold_fraction = parse_num(key, value)?,
            "detector.searchback_factor" => d.searchback_factor = parse_num(key, value)?,
            "annotation" => self.annotation = (!value.is_empty()).then(|| PathBuf::from(value)),
            "match_tolerance_ms" => self.match_tolerance_ms = parse_num(key, value)?,
            "plot.start" => self.plot_start = parse_num(key, value)?,
            "plot.end" => self.plot_end = parse_num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {pair:?}")))?;
        self.set(k, v)
    }

    /// Applies every setting in a config file's text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Full parameter set; parsing it back yields an identical config.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let d = &self.detector;
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("input", path(&self.input));
        kv("fs", self.fs.to_string());
        kv("desired", self.desired.to_string());
        kv("reference", self.reference.to_string());
        kv("algorithm", self.algorithm.name().to_string());
        kv("order", p.order.to_string());
        kv("lms.mu", p.lms_mu.to_string());
        kv("nlms.mu", p.nlms_mu.to_string());
        kv("nlms.eps", p.nlms_eps.to_string());
        kv("rls.lambda", p.rls_lambda.to_string());
        kv("rls.delta", p.rls_delta.to_string());
        kv("clms.mu_fast", p.clms_mu_fast.to_string());
        kv("clms.mu_slow", p.clms_mu_slow.to_string());
        kv("crls.lambda_fast", p.crls_lambda_fast.to_string());
        kv("crls.lambda_slow", p.crls_lambda_slow.to_string());
        kv("rls_lms.lambda", p.rls_lms_lambda.to_string());
        kv("rls_lms.mu", p.rls_lms_mu.to_string());
        kv("mix.mu_a", p.mixing.mu_a.to_string());
        kv("mix.a_plus", p.mixing.a_plus.to_string());
        kv("mix.a0", p.mixing.a0.to_string());
        kv("remove_mean", self.remove_mean.to_string());
        kv("burn_in", self.burn_in.to_string());
        kv("detector", self.detector_preset.clone());
        kv("detector.low_hz", d.low_hz.to_string());
        kv("detector.high_hz", d.high_hz.to_string());
        kv("detector.window_ms", d.window_ms.to_string());
        kv("detector.refractory_ms", d.refractory_ms.to_string());
        kv("detector.t_wave_ms", d.t_wave_ms.to_string());
        kv("detector.initial_rr_ms", d.initial_rr_ms.to_string());
        kv("detector.learning_s", d.learning_s.to_string());
        kv("detector.refine_ms", d.refine_ms.to_string());
        kv("detector.peak_smoothing", d.peak_smoothing.to_string());
        kv("detector.threshold_fraction", d.threshold_fraction.to_string());
        kv("detector.searchback_factor", d.searchback_factor.to_string());
        kv("annotation", path(&self.annotation));
        kv("match_tolerance_ms", self.match_tolerance_ms.to_string());
        kv("plot.start", self.plot_start.to_string());
        kv("plot.end", self.plot_end.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        out
    }

    /// Checks everything that can be checked without the recording.
    pub fn validate(&self) -> Result<()> {
        if self.desired == 0 || self.reference == 0 {
            return Err(Error::Config("channel numbers are 1-based".into()));
        }
        if self.desired == self.reference {
            return Err(Error::Config(format!(
                "desired and reference channel are both {}",
                self.desired
            )));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::Config(format!("fs must be positive, got {}", self.fs)));
        }
        if !(self.match_tolerance_ms.is_finite() && self.match_tolerance_ms > 0.0) {
            return Err(Error::Config("match_tolerance_ms must be positive".into()));
        }
        if self.plot_start >= self.plot_end {
            return Err(Error::Config("plot.start must precede plot.end".into()));
        }
        self.detector.validate(self.fs)?;
        crate::pipeline::check_algorithm(&self.params.build(self.algorithm), self.params.order)
    }
}
