mod common;

use fecg_anc::combination::{run_combination, sigmoid, CombinationState, ComboVariant, MixingParams};
use fecg_anc::filters::{run_filter, Filter, FilterConfig, LmsFilter, DEFAULT_RLS_DELTA};
use fecg_anc::recording::DEFAULT_FS;
use fecg_anc::signal::{Regressor, Signal};
use proptest::prelude::*;

use common::*;

/// `d = wᵀu + noise`, with the plant negated from `flip_at` on.
fn flipping_plant(n: usize, flip_at: usize, seed: u64) -> (Signal, Signal) {
    let w = [0.6, -0.4, 0.25, 0.1];
    let x = white(n, seed);
    let noise = white(n, seed + 1);
    let mut u = Regressor::new(w.len()).unwrap();
    let d = (0..n)
        .map(|i| {
            u.push(x[i]).unwrap();
            let sign = if i < flip_at { 1.0 } else { -1.0 };
            sign * u.dot(&w) + 0.01 * noise[i]
        })
        .collect();
    (Signal::new(d, DEFAULT_FS).unwrap(), Signal::new(x, DEFAULT_FS).unwrap())
}

fn crls(fast: f64, slow: f64) -> ComboVariant {
    ComboVariant::Crls {
        lambda_fast: fast,
        lambda_slow: slow,
        delta: DEFAULT_RLS_DELTA,
    }
}

fn window_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn mixing_favours_the_fast_filter_after_a_plant_change() {
    let (d, x) = flipping_plant(6000, 2000, 21);
    let mut state = CombinationState::new(crls(0.995, 1.0), 4, MixingParams::default()).unwrap();
    let run = run_combination(&mut state, &d, &x).unwrap();
    let before = window_mean(&run.eta[1800..2000]);
    let after = window_mean(&run.eta[2100..2500]);
    assert!(after > 0.9, "eta after the flip {after}");
    assert!(after > before, "eta {before} -> {after}");
    // The slow filter eventually catches up and wins back weight.
    let late = window_mean(&run.eta[5500..]);
    assert!(late < after, "eta late {late} vs just after {after}");
}

fn mse(e: &[f64]) -> f64 {
    e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64
}

#[test]
fn steady_state_matches_the_better_component() {
    let (d, x) = flipping_plant(5000, usize::MAX, 31);
    for v in [ComboVariant::clms(), ComboVariant::crls(), ComboVariant::rls_lms()] {
        let mut state = CombinationState::new(v, 4, MixingParams::default()).unwrap();
        let run = run_combination(&mut state, &d, &x).unwrap();
        let tail = 4000..;
        let combo = mse(&run.e[tail.clone()]);
        let best = mse(&run.e1[tail.clone()]).min(mse(&run.e2[tail]));
        assert!(combo <= 1.1 * best, "{}: {combo} vs {best}", v.name());
    }
}

#[test]
fn silent_reference_keeps_the_mixture_neutral() {
    let rec = load_recording();
    let d = channel(&rec, 2);
    let x = Signal::new(vec![0.0; d.len()], DEFAULT_FS).unwrap();
    let mut state = CombinationState::new(ComboVariant::crls(), 10, MixingParams::default()).unwrap();
    let run = run_combination(&mut state, &d, &x).unwrap();
    assert_eq!(run.e, d.samples());
    assert!(run.eta.iter().all(|&e| e == 0.5));
}

#[test]
fn crls_beats_single_rls_on_the_dataset() {
    let rec = load_recording();
    let (d, x) = (channel(&rec, 2), channel(&rec, 8));
    let mut single = FilterConfig::rls().build(10).unwrap();
    let rls = run_filter(&mut single, &d, &x).unwrap();
    let mut state = CombinationState::new(ComboVariant::crls(), 10, MixingParams::default()).unwrap();
    let combo = run_combination(&mut state, &d, &x).unwrap();
    assert!(mse(&combo.e[25..]) < mse(&rls.e[25..]));
}

proptest! {
    #[test]
    fn positive_gradient_raises_a(
        a0 in -3.5f64..3.5,
        w1 in -2.0f64..2.0,
        w2 in -2.0f64..2.0,
        u0 in 0.1f64..3.0,
        d in -5.0f64..5.0,
    ) {
        let y1 = w1 * u0;
        let y2 = w2 * u0;
        let eta = sigmoid(a0);
        let e = d - (eta * y1 + (1.0 - eta) * y2);
        let grad = e * (y1 - y2);
        prop_assume!(grad.abs() > 1e-6);
        let mix = MixingParams { mu_a: 1e-3, a_plus: 4.0, a0 };
        let c1 = Filter::Lms(LmsFilter::with_weights(vec![w1], 0.01).unwrap());
        let c2 = Filter::Lms(LmsFilter::with_weights(vec![w2], 0.01).unwrap());
        let mut state = CombinationState::from_components(c1, c2, mix).unwrap();
        let u = Regressor::from_taps(vec![u0]).unwrap();
        state.step(&u, d).unwrap();
        if grad > 0.0 {
            prop_assert!(state.a() > a0);
        } else {
            prop_assert!(state.a() < a0);
        }
    }
}
