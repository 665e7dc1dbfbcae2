//! Two RLS filters with different memories, mixed by an adaptive convex
//! weight. The plant flips sign at sample 2000; η hands control to the fast
//! filter while the slow one re-converges, after which both agree and the
//! mixture no longer matters.

use fecg_anc::combination::{run_combination, CombinationState, ComboVariant, MixingParams};
use fecg_anc::signal::{Regressor, Signal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> fecg_anc::Result<()> {
    let (n, flip) = (16000, 2000);
    let w = [0.6, -0.4, 0.25, 0.1];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut u = Regressor::new(w.len())?;
    let mut d = Vec::with_capacity(n);
    for (i, &xn) in x.iter().enumerate() {
        u.push(xn)?;
        let sign = if i < flip { 1.0 } else { -1.0 };
        let noise: f64 = StandardNormal.sample(&mut rng);
        d.push(sign * u.dot(&w) + 0.01 * noise);
    }

    let variant = ComboVariant::Crls {
        lambda_fast: 0.995,
        lambda_slow: 0.9995,
        delta: 100.0,
    };
    let mut state = CombinationState::new(variant, w.len(), MixingParams::default())?;
    let run = run_combination(&mut state, &Signal::new(d, 250.0)?, &Signal::new(x, 250.0)?)?;

    println!("{:>11} {:>7} {:>10} {:>10} {:>10}", "samples", "eta", "mse fast", "mse slow", "mse mix");
    let mse = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>() / v.len() as f64;
    for start in (0..n).step_by(1000) {
        let r = start..start + 1000;
        let eta = run.eta[r.clone()].iter().sum::<f64>() / 1000.0;
        println!(
            "{:>5}-{:<5} {eta:>7.3} {:>10.2e} {:>10.2e} {:>10.2e}",
            r.start,
            r.end,
            mse(&run.e1[r.clone()]),
            mse(&run.e2[r.clone()]),
            mse(&run.e[r.clone()])
        );
    }
    Ok(())
}
