//! Identify an unknown 4-tap plant with each single adaptive filter.

use fecg_anc::filters::{run_filter, FilterConfig};
use fecg_anc::signal::{Regressor, Signal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> fecg_anc::Result<()> {
    let plant = [0.5, -0.3, 0.2, 0.1];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();

    let mut u = Regressor::new(plant.len())?;
    let mut d = Vec::with_capacity(x.len());
    for &xn in &x {
        u.push(xn)?;
        let noise: f64 = StandardNormal.sample(&mut rng);
        d.push(u.dot(&plant) + 0.01 * noise);
    }
    let (d, x) = (Signal::new(d, 250.0)?, Signal::new(x, 250.0)?);

    println!("plant   {plant:?}");
    for cfg in [FilterConfig::lms(), FilterConfig::nlms(), FilterConfig::rls()] {
        let mut filter = cfg.build(plant.len())?;
        let run = run_filter(&mut filter, &d, &x)?;
        let w: Vec<String> = run.weights.iter().map(|w| format!("{w:+.4}")).collect();
        let tail = &run.e[4500..];
        let mse = tail.iter().map(|e| e * e).sum::<f64>() / tail.len() as f64;
        println!("{:<7} [{}]  tail mse {mse:.2e}", cfg.name(), w.join(", "));
    }
    Ok(())
}
