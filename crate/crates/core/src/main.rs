use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fecg_anc::config::{AlgorithmKind, PipelineConfig, OUTPUT_DIR_ENV};
use fecg_anc::output::read_trace_csv;
use fecg_anc::qrs::{pan_tompkins, AnnotationFile, DetectorConfig};
use fecg_anc::signal::Signal;
use fecg_anc::synth::{SURROGATE_ANNOTATION, SURROGATE_RECORDING};
use fecg_anc::{fetch, pipeline, Error, Result};

#[derive(Parser)]
#[command(name = "fecg-anc", version, about = "Fetal ECG extraction by adaptive noise cancellation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and write traces, peaks, report and plots.
    Extract {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        algorithm: Option<String>,
    },
    /// Compare several algorithms on the same input and rank them by SNR.
    Batch {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated list; defaults to nlms,rls,clms,rls-lms,crls.
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
    },
    /// Detect QRS complexes in a CSV trace and print the peak list.
    Detect {
        input: PathBuf,
        #[arg(long, default_value_t = 250.0)]
        fs: f64,
        #[arg(long, default_value = "fetal")]
        preset: String,
        /// Write the peak list here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics from a stored FECG trace and an annotation.
    Report {
        /// FECG (error) trace CSV.
        fecg: PathBuf,
        /// Filter output trace CSV, needed for SNR.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        annotation: Option<PathBuf>,
        #[arg(long, default_value_t = 250.0)]
        fs: f64,
        #[arg(long, default_value_t = 25)]
        burn_in: usize,
        #[arg(long, default_value = "fetal")]
        preset: String,
        #[arg(long, default_value_t = fecg_anc::metrics::DEFAULT_MATCH_TOLERANCE_MS)]
        tol_ms: f64,
    },
    /// Download the cutaneous recording and check its shape.
    Fetch {
        #[arg(long, default_value = fetch::DAISY_URL)]
        url: String,
        #[arg(long, default_value = "foetal_ecg.dat")]
        dest: PathBuf,
    },
    /// Write a synthetic recording in the same layout, with fetal annotations.
    Synth {
        #[arg(long, default_value = "data")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key = value config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// 1-based desired (abdominal) channel.
    #[arg(long)]
    desired: Option<usize>,
    /// 1-based reference (thoracic) channel.
    #[arg(long)]
    reference: Option<usize>,
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Any config key, e.g. --set crls.lambda_fast=0.97
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(c) = self.desired {
            cfg.desired = c;
        }
        if let Some(c) = self.reference {
            cfg.reference = c;
        }
        if let Some(p) = &self.annotation {
            cfg.annotation = Some(p.clone());
        }
        if let Some(p) = &self.out {
            cfg.output_dir = p.clone();
        }
        for pair in &self.overrides {
            cfg.set_pair(pair)?;
        }
        Ok(cfg)
    }
}

fn detector(preset: &str) -> Result<DetectorConfig> {
    DetectorConfig::preset(preset).ok_or_else(|| Error::Config(format!("unknown detector preset {preset:?}")))
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract { run, algorithm } => {
            let mut cfg = run.config()?;
            if let Some(a) = algorithm {
                cfg.algorithm = AlgorithmKind::parse(&a)?;
            }
            let art = pipeline::run_pipeline(&cfg)?;
            print!("{}", pipeline::run_report(&art.run, &cfg).to_text());
            if art.run.detection.is_none() {
                eprintln!("note: no annotation available, detection scores omitted");
            }
            eprintln!("wrote {} files to {}", art.files.len(), cfg.output_dir.display());
        }
        Command::Batch { run, algorithms } => {
            let cfg = run.config()?;
            let kinds = if algorithms.is_empty() {
                AlgorithmKind::COMPARED.to_vec()
            } else {
                algorithms.iter().map(|a| AlgorithmKind::parse(a)).collect::<Result<_>>()?
            };
            let art = pipeline::run_batch(&cfg, &kinds)?;
            println!("rank,algorithm,snr_db");
            for (i, (k, snr)) in art.ranking.iter().enumerate() {
                println!("{},{},{snr:.4}", i + 1, k.name());
            }
            eprintln!("wrote {} files to {}", art.files.len(), cfg.output_dir.display());
        }
        Command::Detect { input, fs, preset, out } => {
            let values = read_trace_csv(&read(&input)?)?;
            let peaks = pan_tompkins(&Signal::new(values, fs)?, &detector(&preset)?)?;
            match out {
                Some(path) => fs::write(&path, peaks.to_text())
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?,
                None => print!("{}", peaks.to_text()),
            }
        }
        Command::Report { fecg, output, annotation, fs, burn_in, preset, tol_ms } => {
            let e = read_trace_csv(&read(&fecg)?)?;
            let y = output.as_ref().map(|p| read(p).and_then(|t| read_trace_csv(&t))).transpose()?;
            let ann = annotation
                .as_ref()
                .map(|p| read(p).and_then(|t| AnnotationFile::from_text(&t, fs)))
                .transpose()?;
            let report = pipeline::report_from_traces(&e, y.as_deref(), fs, burn_in, &detector(&preset)?, ann.as_ref(), tol_ms)?;
            print!("{}", report.to_text());
        }
        Command::Fetch { url, dest } => {
            let rec = fetch::fetch_dataset(&url, &dest)?;
            eprintln!("saved {}×{} recording to {}", rec.len(), rec.channel_count(), dest.display());
        }
        Command::Synth { dir } => {
            let s = fecg_anc::synth::generate(&fecg_anc::synth::SurrogateParams::default())?;
            fs::create_dir_all(&dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
            let write = |name: &str, text: String| {
                fs::write(dir.join(name), text).map_err(|e| Error::InvalidInput(format!("{name}: {e}")))
            };
            write(SURROGATE_RECORDING, fecg_anc::recording::serialize_recording(&s.recording))?;
            write(SURROGATE_ANNOTATION, s.fetal_annotation().to_text())?;
            eprintln!("wrote surrogate recording to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
