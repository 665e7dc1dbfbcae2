//! End-to-end extraction: load, preprocess, cancel, detect, score, write.

use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use crate::combination::{run_combination, CombinationState};
use crate::config::{Algorithm, AlgorithmKind, PipelineConfig};
use crate::error::{Error, Result};
use crate::filters::run_filter;
use crate::metrics::{detection_report, fmt_percent, match_peaks, mse_curve, snr_db, DetectionReport, MatchResult, MseCurve};
use crate::output::{fmt_sig, trace_csv, KeyValueReport};
use crate::plot::{line_chart, Markers, Series};
use crate::qrs::{heart_rate, pan_tompkins, AnnotationFile, DetectorConfig, PeakList};
use crate::recording::parse_recording;
use crate::signal::{remove_mean, MultichannelRecording, Signal};

/// Peak-matching outcome against a reference annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub matched: MatchResult,
    pub report: DetectionReport,
}

/// In-memory result of one extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionRun {
    pub algorithm: AlgorithmKind,
    pub fs: f64,
    /// Desired channel after preprocessing.
    pub desired: Vec<f64>,
    pub y: Vec<f64>,
    pub e: Vec<f64>,
    pub eta: Option<Vec<f64>>,
    pub component_errors: Option<(Vec<f64>, Vec<f64>)>,
    pub burn_in: usize,
    pub snr_db: f64,
    /// Running MSE over the post-burn-in errors.
    pub mse: MseCurve,
    pub peaks: PeakList,
    pub heart_rate_bpm: Option<f64>,
    pub detection: Option<Detection>,
}

impl ExtractionRun {
    pub fn final_mse(&self) -> f64 {
        self.mse.last().unwrap_or(f64::NAN)
    }
}

pub(crate) fn check_algorithm(alg: &Algorithm, order: usize) -> Result<()> {
    match alg {
        Algorithm::Single(f) => f.build(order).map(|_| ()),
        Algorithm::Combination(v, mix) => CombinationState::new(*v, order, *mix).map(|_| ()),
    }
}

struct Traces {
    y: Vec<f64>,
    e: Vec<f64>,
    eta: Option<Vec<f64>>,
    component_errors: Option<(Vec<f64>, Vec<f64>)>,
}

fn run_algorithm(alg: &Algorithm, order: usize, d: &Signal, r: &Signal) -> Result<Traces> {
    match alg {
        Algorithm::Single(cfg) => {
            let mut f = cfg.build(order)?;
            let out = run_filter(&mut f, d, r)?;
            Ok(Traces {
                y: out.y,
                e: out.e,
                eta: None,
                component_errors: None,
            })
        }
        Algorithm::Combination(v, mix) => {
            let mut c = CombinationState::new(*v, order, *mix)?;
            let out = run_combination(&mut c, d, r)?;
            Ok(Traces {
                y: out.y,
                e: out.e,
                eta: Some(out.eta),
                component_errors: Some((out.e1, out.e2)),
            })
        }
    }
}

fn select_channel(rec: &MultichannelRecording, one_based: usize, what: &str) -> Result<Signal> {
    one_based
        .checked_sub(1)
        .and_then(|i| rec.channel(i))
        .cloned()
        .ok_or_else(|| {
            Error::Config(format!(
                "{what} channel {one_based} is outside 1..={}",
                rec.channel_count()
            ))
        })
}

/// Scores detected peaks against an annotation, if one is given.
pub fn score_detection(
    peaks: &PeakList,
    annotation: Option<&AnnotationFile>,
    tol_ms: f64,
) -> Result<Option<Detection>> {
    annotation
        .map(|a| {
            let matched = match_peaks(&a.peaks, peaks, tol_ms)?;
            let report = detection_report(&matched);
            Ok(Detection { matched, report })
        })
        .transpose()
}

/// Runs one algorithm of `cfg` on an already loaded recording.
pub fn extract(
    rec: &MultichannelRecording,
    cfg: &PipelineConfig,
    kind: AlgorithmKind,
    annotation: Option<&AnnotationFile>,
) -> Result<ExtractionRun> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let mut desired = select_channel(rec, cfg.desired, "desired")?;
    let mut reference = select_channel(rec, cfg.reference, "reference")?;
    if cfg.remove_mean {
        desired = remove_mean(&desired).map_err(|e| e.in_stage("preprocess"))?;
        reference = remove_mean(&reference).map_err(|e| e.in_stage("preprocess"))?;
    }
    let fs = desired.fs();
    if cfg.burn_in >= desired.len() {
        return Err(Error::Config(format!(
            "burn-in of {} samples leaves nothing of a {}-sample record",
            cfg.burn_in,
            desired.len()
        )));
    }

    let alg = cfg.params.build(kind);
    let traces = run_algorithm(&alg, cfg.params.order, &desired, &reference)
        .map_err(|e| e.in_stage("filter"))?;

    let steady_e = Signal::new(traces.e[cfg.burn_in..].to_vec(), fs)?;
    let steady_y = Signal::new(traces.y[cfg.burn_in..].to_vec(), fs)?;
    let snr = snr_db(&steady_e, &steady_y).map_err(|e| e.in_stage("metrics"))?;
    let mse = mse_curve(steady_e.samples());

    let fecg = Signal::new(traces.e.clone(), fs)?;
    let peaks = pan_tompkins(&fecg, &cfg.detector).map_err(|e| e.in_stage("detect"))?;
    let heart_rate_bpm = heart_rate(&peaks).ok();
    let detection = score_detection(&peaks, annotation, cfg.match_tolerance_ms)
        .map_err(|e| e.in_stage("detect"))?;

    Ok(ExtractionRun {
        algorithm: kind,
        fs,
        desired: desired.into_samples(),
        y: traces.y,
        e: traces.e,
        eta: traces.eta,
        component_errors: traces.component_errors,
        burn_in: cfg.burn_in,
        snr_db: snr,
        mse,
        peaks,
        heart_rate_bpm,
        detection,
    })
}

/// Reads a recording file; gzip-compressed input is accepted.
pub fn read_recording(path: &Path, fs: f64) -> Result<MultichannelRecording> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = decode_text(&bytes).map_err(|e| Error::io(path, e))?;
    parse_recording(&text, fs)
}

pub(crate) fn decode_text(bytes: &[u8]) -> std::io::Result<String> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut text = String::new();
        flate2::read::GzDecoder::new(bytes).read_to_string(&mut text)?;
        Ok(text)
    } else {
        String::from_utf8(bytes.to_vec())
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

fn load_recording(cfg: &PipelineConfig) -> Result<MultichannelRecording> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input recording configured".into()))?;
    read_recording(input, cfg.fs).map_err(|e| e.in_stage("ingest"))
}

/// Loads the configured annotation. A configured but missing file is
/// reported and skipped.
pub fn load_annotation(cfg: &PipelineConfig) -> Result<Option<AnnotationFile>> {
    let Some(path) = &cfg.annotation else {
        return Ok(None);
    };
    match fs::read_to_string(path) {
        Ok(text) => AnnotationFile::from_text(&text, cfg.fs)
            .map(Some)
            .map_err(|e| e.in_stage("annotation")),
        Err(err) if err.kind() == std::io::ErrorKind::NotFound => {
            log::warn!(
                "annotation {} not found; detection report omitted",
                path.display()
            );
            Ok(None)
        }
        Err(err) => Err(Error::io(path, err)),
    }
}

/// Summary of one run as key=value lines.
pub fn run_report(run: &ExtractionRun, cfg: &PipelineConfig) -> KeyValueReport {
    let mut r = KeyValueReport::default();
    r.push("algorithm", run.algorithm.name())
        .push("desired_channel", cfg.desired)
        .push("reference_channel", cfg.reference)
        .push("samples", run.e.len())
        .push("fs_hz", fmt_sig(run.fs, 9))
        .push("burn_in", run.burn_in)
        .push("snr_db", fmt_sig(run.snr_db, 9))
        .push("final_mse", fmt_sig(run.final_mse(), 9))
        .push("detected_peaks", run.peaks.len())
        .push(
            "heart_rate_bpm",
            run.heart_rate_bpm.map_or("NA".into(), |v| fmt_sig(v, 6)),
        );
    if let Some(eta) = &run.eta {
        let mean = eta.iter().sum::<f64>() / eta.len() as f64;
        r.push("mean_eta", fmt_sig(mean, 9));
    }
    push_detection(&mut r, run.detection.as_ref());
    r
}

fn push_detection(r: &mut KeyValueReport, detection: Option<&Detection>) {
    match detection {
        Some(d) => {
            r.push("tp", d.matched.tp)
                .push("fp", d.matched.fp)
                .push("fn", d.matched.fn_)
                .push("sensitivity", fmt_percent(d.report.sensitivity))
                .push("ppv", fmt_percent(d.report.ppv))
                .push("accuracy", fmt_percent(d.report.accuracy))
                .push("f1", fmt_percent(d.report.f1));
        }
        None => {
            r.push("detection", "omitted (no annotation)");
        }
    }
}

const TABLE_HEADER: &str = "algorithm,snr_db,final_mse,detected_peaks,sensitivity,ppv,accuracy,f1";

fn table_row(run: &ExtractionRun) -> String {
    let scores = run.detection.as_ref().map(|d| d.report);
    format!(
        "{},{},{},{},{},{},{},{}",
        run.algorithm.name(),
        fmt_sig(run.snr_db, 9),
        fmt_sig(run.final_mse(), 9),
        run.peaks.len(),
        fmt_percent(scores.and_then(|s| s.sensitivity)),
        fmt_percent(scores.and_then(|s| s.ppv)),
        fmt_percent(scores.and_then(|s| s.accuracy)),
        fmt_percent(scores.and_then(|s| s.f1)),
    )
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn overlay_svg(run: &ExtractionRun, cfg: &PipelineConfig) -> String {
    let end = cfg.plot_end.min(run.e.len());
    let start = cfg.plot_start.min(end);
    let pts = |v: &[f64]| (start..end).map(|n| (n as f64, v[n])).collect();
    let peaks = run
        .peaks
        .indices()
        .iter()
        .filter(|&&i| i >= start && i < end)
        .map(|&i| (i as f64, run.e[i]))
        .collect();
    line_chart(
        &format!(
            "AECG (channel {}) and extracted FECG, {}, samples {start}-{end}",
            cfg.desired,
            run.algorithm.name()
        ),
        "sample",
        &[
            Series {
                label: "AECG",
                color: "#999999",
                points: pts(&run.desired),
            },
            Series {
                label: "FECG estimate",
                color: "#d62728",
                points: pts(&run.e),
            },
        ],
        &[Markers {
            label: "detected R peaks",
            color: "#1f77b4",
            points: peaks,
        }],
    )
}

fn mse_points(curve: &MseCurve, burn_in: usize) -> Vec<(f64, f64)> {
    curve
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + burn_in) as f64, v))
        .collect()
}

fn mse_svg(run: &ExtractionRun) -> String {
    let mut series = vec![Series {
        label: run.algorithm.name(),
        color: PALETTE[0],
        points: mse_points(&run.mse, run.burn_in),
    }];
    if let Some((e1, e2)) = &run.component_errors {
        for (label, e, color) in [("component 1", e1, PALETTE[1]), ("component 2", e2, PALETTE[2])] {
            series.push(Series {
                label,
                color,
                points: mse_points(&mse_curve(&e[run.burn_in..]), run.burn_in),
            });
        }
    }
    line_chart("Running MSE", "sample", &series, &[])
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes every artifact of `run` into `dir`, returning the paths written.
pub fn write_run(run: &ExtractionRun, cfg: &PipelineConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut cfg_used = cfg.clone();
    cfg_used.algorithm = run.algorithm;
    write_file(dir, "config.txt", &cfg_used.to_text(), &mut written)?;
    write_file(dir, "fecg.csv", &trace_csv(&run.e, run.fs), &mut written)?;
    write_file(dir, "output.csv", &trace_csv(&run.y, run.fs), &mut written)?;
    if let Some(eta) = &run.eta {
        write_file(dir, "eta.csv", &trace_csv(eta, run.fs), &mut written)?;
    }
    write_file(dir, "mse.csv", &mse_csv(&run.mse, run.burn_in, run.fs), &mut written)?;
    write_file(dir, "peaks.txt", &run.peaks.to_text(), &mut written)?;
    write_file(dir, "report.txt", &run_report(run, cfg).to_text(), &mut written)?;
    write_file(
        dir,
        "summary.csv",
        &format!("{TABLE_HEADER}\n{}\n", table_row(run)),
        &mut written,
    )?;
    write_file(dir, "overlay.svg", &overlay_svg(run, cfg), &mut written)?;
    write_file(dir, "mse.svg", &mse_svg(run), &mut written)?;
    Ok(written)
}

fn mse_csv(curve: &MseCurve, burn_in: usize, fs: f64) -> String {
    let mut out = String::from("n,time_s,value\n");
    for (i, v) in curve.values().iter().enumerate() {
        let n = i + burn_in;
        out.push_str(&format!("{n},{:.6},{}\n", n as f64 / fs, fmt_sig(*v, 9)));
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub run: ExtractionRun,
    pub files: Vec<PathBuf>,
}

/// Single run of the configured algorithm, written to `cfg.output_dir`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunArtifacts> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let rec = load_recording(cfg)?;
    let annotation = load_annotation(cfg)?;
    let run = extract(&rec, cfg, cfg.algorithm, annotation.as_ref())?;
    let files = write_run(&run, cfg, &cfg.output_dir).map_err(|e| e.in_stage("write"))?;
    Ok(RunArtifacts { run, files })
}

#[derive(Debug, Clone)]
pub struct BatchArtifacts {
    /// Runs in the order requested.
    pub runs: Vec<ExtractionRun>,
    /// Algorithms sorted by ascending SNR (best suppression first).
    pub ranking: Vec<(AlgorithmKind, f64)>,
    pub files: Vec<PathBuf>,
}

/// Runs each algorithm on an already loaded recording, in parallel.
pub fn extract_batch(
    rec: &MultichannelRecording,
    cfg: &PipelineConfig,
    kinds: &[AlgorithmKind],
    annotation: Option<&AnnotationFile>,
) -> Result<Vec<ExtractionRun>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| scope.spawn(move || extract(rec, cfg, kind, annotation)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction thread panicked"))
            .collect()
    })
}

pub fn ranking(runs: &[ExtractionRun]) -> Vec<(AlgorithmKind, f64)> {
    let mut r: Vec<_> = runs.iter().map(|run| (run.algorithm, run.snr_db)).collect();
    r.sort_by(|a, b| a.1.total_cmp(&b.1));
    r
}

/// Compares several algorithms on the same configuration. Each run is
/// written to `<output_dir>/<algorithm>/`; the ranking table and the MSE
/// comparison go to `<output_dir>` itself.
pub fn run_batch(cfg: &PipelineConfig, kinds: &[AlgorithmKind]) -> Result<BatchArtifacts> {
    if kinds.is_empty() {
        return Err(Error::Config("batch needs at least one algorithm".into()));
    }
    for &k in kinds {
        let mut c = cfg.clone();
        c.algorithm = k;
        c.validate().map_err(|e| e.in_stage("config"))?;
    }
    let rec = load_recording(cfg)?;
    let annotation = load_annotation(cfg)?;
    let runs = extract_batch(&rec, cfg, kinds, annotation.as_ref())?;

    let mut files = Vec::new();
    for run in &runs {
        let dir = cfg.output_dir.join(run.algorithm.name());
        files.extend(write_run(run, cfg, &dir).map_err(|e| e.in_stage("write"))?);
    }
    let ranked = ranking(&runs);
    let by_kind = |k: AlgorithmKind| runs.iter().find(|r| r.algorithm == k).expect("ranked run exists");
    let mut table = format!("rank,{TABLE_HEADER}\n");
    for (i, (k, _)) in ranked.iter().enumerate() {
        table.push_str(&format!("{},{}\n", i + 1, table_row(by_kind(*k))));
    }
    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_file(out, "ranking.csv", &table, &mut files)?;

    let series: Vec<Series> = runs
        .iter()
        .enumerate()
        .map(|(i, run)| Series {
            label: run.algorithm.name(),
            color: PALETTE[i % PALETTE.len()],
            points: mse_points(&run.mse, run.burn_in),
        })
        .collect();
    write_file(
        out,
        "mse_comparison.svg",
        &line_chart("Comparison of running MSE", "sample", &series, &[]),
        &mut files,
    )?;
    Ok(BatchArtifacts {
        runs,
        ranking: ranked,
        files,
    })
}

/// Metrics recomputed from stored traces: detection on the FECG trace, SNR
/// and MSE when the filter-output trace is also available.
pub fn report_from_traces(
    fecg: &[f64],
    output: Option<&[f64]>,
    fs: f64,
    burn_in: usize,
    detector: &DetectorConfig,
    annotation: Option<&AnnotationFile>,
    tol_ms: f64,
) -> Result<KeyValueReport> {
    if burn_in >= fecg.len() {
        return Err(Error::InvalidInput(format!(
            "burn-in of {burn_in} samples leaves nothing of a {}-sample trace",
            fecg.len()
        )));
    }
    let e = Signal::new(fecg.to_vec(), fs)?;
    let mut r = KeyValueReport::default();
    r.push("samples", fecg.len())
        .push("fs_hz", fmt_sig(fs, 9))
        .push("burn_in", burn_in);
    if let Some(y) = output {
        let y = Signal::new(y.to_vec(), fs)?;
        let snr = snr_db(&e.skip(burn_in), &y.skip(burn_in))?;
        r.push("snr_db", fmt_sig(snr, 9));
    }
    let mse = mse_curve(&fecg[burn_in..]).last().unwrap_or(f64::NAN);
    r.push("final_mse", fmt_sig(mse, 9));
    let peaks = pan_tompkins(&e, detector)?;
    r.push("detected_peaks", peaks.len()).push(
        "heart_rate_bpm",
        heart_rate(&peaks).map_or("NA".into(), |v| fmt_sig(v, 6)),
    );
    push_detection(&mut r, score_detection(&peaks, annotation, tol_ms)?.as_ref());
    Ok(r)
}
