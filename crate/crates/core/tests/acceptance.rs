//! One test per acceptance criterion. Each prints a single PASS/FAIL line;
//! run with `--nocapture` to see them all.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use fecg_anc::combination::{run_combination, CombinationState, ComboVariant, MixingParams};
use fecg_anc::config::{AlgorithmKind, PipelineConfig};
use fecg_anc::filters::{run_filter, AdaptiveFilter, FilterConfig, RlsFilter};
use fecg_anc::metrics::{detection_report, MatchResult};
use fecg_anc::output::{read_trace_csv, trace_csv, KeyValueReport};
use fecg_anc::pipeline::{extract, extract_batch, run_batch, run_pipeline, ExtractionRun};
use fecg_anc::qrs::{pan_tompkins, AnnotationFile, DetectorConfig, PeakList};
use fecg_anc::recording::{parse_recording, serialize_recording, DEFAULT_FS};
use fecg_anc::signal::{Regressor, Signal};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn verdict(id: u32, name: &str, failures: &[String], detail: &str) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {id} [{status}] {name}: {detail}");
    for f in failures {
        println!("    - {f}");
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
}

fn by_kind(runs: &[ExtractionRun]) -> BTreeMap<&'static str, &ExtractionRun> {
    runs.iter().map(|r| (r.algorithm.name(), r)).collect()
}

const SINGLES: [AlgorithmKind; 2] = [AlgorithmKind::Nlms, AlgorithmKind::Rls];
const COMBOS: [AlgorithmKind; 3] = [AlgorithmKind::Clms, AlgorithmKind::RlsLms, AlgorithmKind::Crls];

fn batch_on_vendored() -> (Vec<ExtractionRun>, f64) {
    let start = Instant::now();
    let cfg = default_config(std::env::temp_dir());
    let rec = load_recording();
    let ann = load_annotation();
    let runs = extract_batch(&rec, &cfg, &AlgorithmKind::COMPARED, Some(&ann)).expect("batch runs");
    (runs, start.elapsed().as_secs_f64())
}

#[test]
fn criterion_1_snr_ordering() {
    let (runs, secs) = batch_on_vendored();
    let k = by_kind(&runs);
    let snr = |a: AlgorithmKind| k[a.name()].snr_db;
    let (nlms, rls, clms, rls_lms, crls) = (
        snr(AlgorithmKind::Nlms),
        snr(AlgorithmKind::Rls),
        snr(AlgorithmKind::Clms),
        snr(AlgorithmKind::RlsLms),
        snr(AlgorithmKind::Crls),
    );
    let mut failures = Vec::new();
    if !(nlms > rls && rls > clms && clms > rls_lms && rls_lms >= crls) {
        failures.push("ordering nlms > rls > clms > rls-lms >= crls violated".to_string());
    }
    if !runs.iter().filter(|r| r.algorithm != AlgorithmKind::Crls).all(|r| crls < r.snr_db) {
        failures.push("crls is not strictly minimal".into());
    }
    let worst_combo = COMBOS.iter().map(|&a| snr(a)).fold(f64::MIN, f64::max);
    let best_single = SINGLES.iter().map(|&a| snr(a)).fold(f64::MAX, f64::min);
    if worst_combo >= best_single {
        failures.push(format!("combination {worst_combo:.4} dB not below single {best_single:.4} dB"));
    }
    if crls > -10.0 {
        failures.push(format!("crls {crls:.4} dB above -10 dB"));
    }
    if secs >= 5.0 {
        failures.push(format!("runtime {secs:.2} s"));
    }
    verdict(
        1,
        "SNR ordering",
        &failures,
        &format!(
            "nlms {nlms:.4} > rls {rls:.4} > clms {clms:.4} > rls-lms {rls_lms:.4} >= crls {crls:.4} dB, {secs:.2} s"
        ),
    );
}

#[test]
fn criterion_2_mse_convergence() {
    let (runs, _) = batch_on_vendored();
    let k = by_kind(&runs);
    let mse = |a: AlgorithmKind| k[a.name()].final_mse();
    let worst_combo = COMBOS.iter().map(|&a| mse(a)).fold(f64::MIN, f64::max);
    let best_single = SINGLES.iter().map(|&a| mse(a)).fold(f64::MAX, f64::min);
    let crls = mse(AlgorithmKind::Crls);
    let mut failures = Vec::new();
    if worst_combo * 1.01 > best_single {
        failures.push(format!(
            "worst combination {worst_combo:.6} not 1% below best single {best_single:.6}"
        ));
    }
    if !runs.iter().filter(|r| r.algorithm != AlgorithmKind::Crls).all(|r| crls < r.final_mse()) {
        failures.push("crls is not minimal".into());
    }
    let listing: Vec<String> = AlgorithmKind::COMPARED
        .iter()
        .map(|&a| format!("{} {:.6}", a.name(), mse(a)))
        .collect();
    verdict(
        2,
        "MSE convergence",
        &failures,
        &format!(
            "{}; separation {:.1}%",
            listing.join(", "),
            100.0 * (1.0 - worst_combo / best_single)
        ),
    );
}

#[test]
fn criterion_3_metric_formulas() {
    let m = MatchResult {
        tp: 20,
        fp: 2,
        fn_: 1,
        pairs: Vec::new(),
    };
    let r = detection_report(&m).rounded();
    let got = [r.sensitivity, r.ppv, r.accuracy, r.f1];
    let want = [95.24, 90.91, 86.96, 93.02];
    let mut failures = Vec::new();
    for (name, (g, w)) in ["se", "ppv", "acc", "f1"].iter().zip(got.iter().zip(want)) {
        if *g != Some(w) {
            failures.push(format!("{name}: got {g:?}, want {w}"));
        }
    }
    verdict(
        3,
        "detection metric formulas",
        &failures,
        &format!("TP=20 FP=2 FN=1 gives {got:?}"),
    );
}

#[test]
fn criterion_4_end_to_end_detection() {
    let start = Instant::now();
    let rec = load_recording();
    let ann = load_annotation();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for (ch, min_se, min_f1) in [(2usize, 90.0, 88.0), (1, 100.0, 93.0)] {
        let cfg = PipelineConfig {
            desired: ch,
            ..default_config(std::env::temp_dir())
        };
        let run = extract(&rec, &cfg, AlgorithmKind::Crls, Some(&ann)).expect("extraction");
        let d = run.detection.as_ref().expect("annotation scored");
        let r = d.report.rounded();
        let (se, f1) = (r.sensitivity.unwrap_or(0.0), r.f1.unwrap_or(0.0));
        details.push(format!(
            "ch{ch}: TP {} FP {} FN {} Se {se:.2} PPV {:.2} F1 {f1:.2}",
            d.matched.tp,
            d.matched.fp,
            d.matched.fn_,
            r.ppv.unwrap_or(0.0)
        ));
        if se < min_se {
            failures.push(format!("ch{ch} sensitivity {se:.2} < {min_se}"));
        }
        if f1 < min_f1 {
            failures.push(format!("ch{ch} F1 {f1:.2} < {min_f1}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        failures.push(format!("runtime {secs:.2} s"));
    }
    details.push(format!("{secs:.2} s"));
    verdict(4, "end-to-end fetal QRS detection", &failures, &details.join("; "));
}

/// Weights of the regularized least-squares problem after each sample.
fn normal_equation_weights(us: &[Vec<f64>], ds: &[f64], delta: f64) -> Vec<DVector<f64>> {
    let m = us[0].len();
    let mut r = DMatrix::<f64>::identity(m, m) / delta;
    let mut p = DVector::<f64>::zeros(m);
    us.iter()
        .zip(ds)
        .map(|(u, &d)| {
            let u = DVector::from_column_slice(u);
            r += &u * u.transpose();
            p += &u * d;
            r.clone().cholesky().expect("regularized matrix is positive definite").solve(&p)
        })
        .collect()
}

#[test]
fn criterion_5_rls_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 200;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let m = rng.gen_range(1..=4);
        let t = rng.gen_range(1..=50);
        let delta = 10f64.powf(rng.gen_range(0.0..3.0));
        let xs = white(t, rng.gen());
        let ds = white(t, rng.gen());
        let mut f = RlsFilter::new(m, 1.0, delta).unwrap();
        let mut u = Regressor::new(m).unwrap();
        let mut regressors = Vec::with_capacity(t);
        let mut streamed = Vec::with_capacity(t);
        for (&x, &d) in xs.iter().zip(&ds) {
            u.push(x).unwrap();
            regressors.push(u.taps().to_vec());
            f.step(&u, d).unwrap();
            streamed.push(f.weights().to_vec());
        }
        let oracle = normal_equation_weights(&regressors, &ds, delta);
        for (n, (w, w_star)) in streamed.iter().zip(&oracle).enumerate() {
            let diff = (DVector::from_column_slice(w) - w_star).norm();
            let rel = diff / w_star.norm().max(1e-12);
            worst = worst.max(rel);
            if rel > 1e-6 {
                failures.push(format!("trial {trial} (M={m}, T={t}) step {n}: relative error {rel:.3e}"));
            }
        }
    }
    failures.truncate(5);
    verdict(
        5,
        "RLS equals normal-equations solution",
        &failures,
        &format!("{trials} trials, worst relative error {worst:.3e}"),
    );
}

fn random_variant(rng: &mut ChaCha8Rng) -> ComboVariant {
    match rng.gen_range(0..3) {
        0 => {
            let slow = rng.gen_range(0.001..0.02);
            ComboVariant::Clms {
                mu_fast: slow * rng.gen_range(2.0..10.0),
                mu_slow: slow,
            }
        }
        1 => {
            let fast = rng.gen_range(0.9..0.99);
            ComboVariant::Crls {
                lambda_fast: fast,
                lambda_slow: rng.gen_range(fast + 0.001..=1.0),
                delta: 10f64.powf(rng.gen_range(0.0..3.0)),
            }
        }
        _ => ComboVariant::RlsLms {
            lambda: rng.gen_range(0.95..=1.0),
            mu: rng.gen_range(0.001..0.05),
            delta: 10f64.powf(rng.gen_range(0.0..3.0)),
        },
    }
}

fn components(v: ComboVariant) -> (FilterConfig, FilterConfig) {
    match v {
        ComboVariant::Clms { mu_fast, mu_slow } => {
            (FilterConfig::Lms { mu: mu_fast }, FilterConfig::Lms { mu: mu_slow })
        }
        ComboVariant::Crls {
            lambda_fast,
            lambda_slow,
            delta,
        } => (
            FilterConfig::Rls {
                lambda: lambda_fast,
                delta,
            },
            FilterConfig::Rls {
                lambda: lambda_slow,
                delta,
            },
        ),
        ComboVariant::RlsLms { lambda, mu, delta } => {
            (FilterConfig::Rls { lambda, delta }, FilterConfig::Lms { mu })
        }
    }
}

/// Checks the bounds on every sample of a combination run.
fn check_bounds(label: &str, v: ComboVariant, order: usize, mix: MixingParams, d: &Signal, x: &Signal) -> Vec<String> {
    let mut state = CombinationState::new(v, order, mix).unwrap();
    let run = run_combination(&mut state, d, x).unwrap();
    let mut out = Vec::new();
    if let Some(n) = run.eta.iter().position(|e| !(0.0..=1.0).contains(e)) {
        out.push(format!("{label}: eta {} outside [0, 1] at {n}", run.eta[n]));
    }
    if let Some(n) = run.a.iter().position(|a| a.abs() > mix.a_plus) {
        out.push(format!("{label}: |a| = {} above {} at {n}", run.a[n].abs(), mix.a_plus));
    }
    out
}

#[test]
fn criterion_6_combination_invariants() {
    let rec = load_recording();
    let (d, x) = (channel(&rec, 2), channel(&rec, 8));
    let mut failures = Vec::new();
    let mut runs = 0;

    // Full dataset, shipped defaults and an aggressive mixing step that saturates a.
    for v in [ComboVariant::clms(), ComboVariant::crls(), ComboVariant::rls_lms()] {
        for mu_a in [100.0, 1e5] {
            let mix = MixingParams {
                mu_a,
                ..MixingParams::default()
            };
            failures.extend(check_bounds(&format!("{} mu_a={mu_a}", v.name()), v, 10, mix, &d, &x));
            runs += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..150 {
        let v = random_variant(&mut rng);
        let order = rng.gen_range(1..=8);
        let n = rng.gen_range(20..400);
        let scale = 10f64.powf(rng.gen_range(-2.0..1.0));
        let fs = DEFAULT_FS;
        let xs: Vec<f64> = white(n, rng.gen()).iter().map(|v| v * scale).collect();
        let ds: Vec<f64> = white(n, rng.gen()).iter().map(|v| v * scale).collect();
        let (sx, sd) = (Signal::new(xs, fs).unwrap(), Signal::new(ds, fs).unwrap());
        let a_plus = rng.gen_range(0.5..8.0);
        let mix = MixingParams {
            mu_a: 10f64.powf(rng.gen_range(-1.0..4.0)),
            a_plus,
            a0: rng.gen_range(-a_plus..=a_plus),
        };
        failures.extend(check_bounds(&format!("fuzz {trial}"), v, order, mix, &sd, &sx));
        runs += 1;

        // Identical components reproduce the single filter bit for bit.
        let (c1, _) = components(v);
        let mut single = c1.build(order).unwrap();
        let alone = run_filter(&mut single, &sd, &sx).unwrap();
        let mut twin = CombinationState::from_components(
            c1.build(order).unwrap(),
            c1.build(order).unwrap(),
            MixingParams {
                a0: 0.0,
                ..mix
            },
        )
        .unwrap();
        let both = run_combination(&mut twin, &sd, &sx).unwrap();
        if both.y != alone.y || both.e != alone.e {
            failures.push(format!("fuzz {trial}: identical-component run differs from {}", c1.name()));
        }

        // Pinned mixing reproduces the selected component.
        let (c1, c2) = components(v);
        for (a0, pinned) in [(a_plus, c1), (-a_plus, c2)] {
            let mut alone = pinned.build(order).unwrap();
            let alone = run_filter(&mut alone, &sd, &sx).unwrap();
            let mut state = CombinationState::new(
                v,
                order,
                MixingParams {
                    mu_a: 0.0,
                    a_plus,
                    a0,
                },
            )
            .unwrap();
            let run = run_combination(&mut state, &sd, &sx).unwrap();
            if run.y != alone.y || run.e != alone.e {
                failures.push(format!("fuzz {trial}: run pinned at a0={a0} differs from its component"));
            }
        }
    }
    failures.truncate(5);
    verdict(
        6,
        "combination invariants",
        &failures,
        &format!("{runs} bounded runs, 150 identical-component and 300 pinned comparisons"),
    );
}

fn recovered_within(truth: &[usize], found: &PeakList, tol: usize) -> usize {
    truth
        .iter()
        .filter(|&&t| found.indices().iter().any(|&p| p.abs_diff(t) <= tol))
        .count()
}

fn min_gap(p: &PeakList) -> Option<usize> {
    p.indices().windows(2).map(|w| w[1] - w[0]).min()
}

fn spacing_ok(p: &PeakList, cfg: &DetectorConfig) -> bool {
    min_gap(p).is_none_or(|g| g as f64 * 1000.0 / p.fs() >= cfg.refractory_ms)
}

#[test]
fn criterion_7_detector_properties() {
    let mut failures = Vec::new();
    let mut details = Vec::new();
    let (clean, truth) = spike_train(2500, 150, 2.0);
    for (preset, cfg) in [("fetal", DetectorConfig::fetal()), ("maternal", DetectorConfig::maternal())] {
        let s = Signal::new(clean.clone(), DEFAULT_FS).unwrap();
        let found = pan_tompkins(&s, &cfg).unwrap();
        let hits = recovered_within(&truth, &found, 3);
        if hits != truth.len() || found.len() != truth.len() {
            failures.push(format!(
                "{preset} noiseless: {hits}/{} recovered, {} detections",
                truth.len(),
                found.len()
            ));
        }
        let mut worst = 1.0f64;
        for seed in 0..20 {
            let noisy = Signal::new(add_noise(&clean, 10.0, seed), DEFAULT_FS).unwrap();
            let found = pan_tompkins(&noisy, &cfg).unwrap();
            let frac = recovered_within(&truth, &found, 3) as f64 / truth.len() as f64;
            worst = worst.min(frac);
            if frac < 0.95 {
                failures.push(format!("{preset} 10 dB seed {seed}: {:.1}% recovered", 100.0 * frac));
            }
            if !spacing_ok(&found, &cfg) {
                failures.push(format!("{preset} 10 dB seed {seed}: duplicate inside refractory window"));
            }
        }
        details.push(format!(
            "{preset}: {}/{} noiseless, worst {:.0}% at 10 dB",
            found.len(),
            truth.len(),
            100.0 * worst
        ));
    }

    // Amplitude-scale invariance on a synthetic and a real trace.
    let rec = load_recording();
    let cfg = DetectorConfig::fetal();
    let noisy = Signal::new(add_noise(&clean, 10.0, 99), DEFAULT_FS).unwrap();
    for (label, s) in [("spikes", noisy), ("ch1", channel(&rec, 1))] {
        let base = pan_tompkins(&s, &cfg).unwrap();
        for c in [1e-3, 0.37, 2.0, 7.5, 1e3] {
            if pan_tompkins(&s.scaled(c).unwrap(), &cfg).unwrap() != base {
                failures.push(format!("{label}: detections change under scaling by {c}"));
            }
        }
    }

    // Refractory spacing on random inputs.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fuzz = 0;
    for _ in 0..200 {
        let n = rng.gen_range(100..3000);
        let mut x = white(n, rng.gen());
        for _ in 0..rng.gen_range(0..40) {
            let i = rng.gen_range(0..n);
            x[i] += rng.gen_range(-20.0..20.0);
        }
        let cfg = if rng.gen() {
            DetectorConfig::fetal()
        } else {
            DetectorConfig::maternal()
        };
        let fs = [250.0, 500.0, 1000.0][rng.gen_range(0..3)];
        let p = pan_tompkins(&Signal::new(x, fs).unwrap(), &cfg).unwrap();
        if !spacing_ok(&p, &cfg) {
            failures.push(format!("fuzz: gap {:?} below {} ms at {fs} Hz", min_gap(&p), cfg.refractory_ms));
        }
        fuzz += 1;
    }
    details.push(format!("scale invariance ok over 10 cases, {fuzz} refractory fuzz inputs"));
    failures.truncate(8);
    verdict(7, "QRS detector properties", &failures, &details.join("; "));
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_8_determinism_and_round_trip() {
    let mut failures = Vec::new();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = default_config(out.clone());

    let mut snapshots = Vec::new();
    for _ in 0..2 {
        run_pipeline(&cfg).unwrap();
        run_batch(&cfg, &AlgorithmKind::COMPARED).unwrap();
        snapshots.push(snapshot(&out));
        std::fs::remove_dir_all(&out).unwrap();
    }
    let files = snapshots[0].len();
    if snapshots[0] != snapshots[1] {
        failures.push("repeated runs wrote different bytes".into());
    }

    let text = std::fs::read_to_string(recording_path()).unwrap();
    let rec = parse_recording(&text, DEFAULT_FS).unwrap();
    if serialize_recording(&rec) != text {
        failures.push("recording text does not reproduce".into());
    }
    if parse_recording(&serialize_recording(&rec), DEFAULT_FS).unwrap() != rec {
        failures.push("recording values do not reproduce".into());
    }

    let ann_text = std::fs::read_to_string(annotation_path()).unwrap();
    let ann = AnnotationFile::from_text(&ann_text, DEFAULT_FS).unwrap();
    if ann.to_text() != ann_text || AnnotationFile::from_text(&ann.to_text(), DEFAULT_FS).unwrap() != ann {
        failures.push("annotation does not round-trip".into());
    }

    if PipelineConfig::from_text(&cfg.to_text()).unwrap() != cfg {
        failures.push("config does not round-trip".into());
    }

    let run = run_pipeline(&cfg).unwrap().run;
    let csv = trace_csv(&run.e, run.fs);
    if trace_csv(&read_trace_csv(&csv).unwrap(), run.fs) != csv {
        failures.push("trace csv does not reproduce".into());
    }
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    if KeyValueReport::from_text(&report).unwrap().to_text() != report {
        failures.push("key=value report does not reproduce".into());
    }

    verdict(
        8,
        "determinism and round-trip",
        &failures,
        &format!("{files} output files identical across runs; recording, annotation, config, trace and report round-trip"),
    );
}
