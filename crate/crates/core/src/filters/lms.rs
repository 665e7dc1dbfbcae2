use super::{check_finite, check_order, check_step_input, AdaptiveFilter, StepOutput};
use crate::error::{Error, Result};
use crate::signal::Regressor;

/// Least-mean-squares filter: `w ← w + μ·e·u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmsFilter {
    w: Vec<f64>,
    mu: f64,
    steps: usize,
}

impl LmsFilter {
    pub fn new(order: usize, mu: f64) -> Result<Self> {
        check_order(order)?;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Config(format!("LMS step size must be positive, got {mu}")));
        }
        Ok(Self {
            w: vec![0.0; order],
            mu,
            steps: 0,
        })
    }

    pub fn with_weights(w: Vec<f64>, mu: f64) -> Result<Self> {
        let mut f = Self::new(w.len(), mu)?;
        f.w = w;
        Ok(f)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl AdaptiveFilter for LmsFilter {
    fn order(&self) -> usize {
        self.w.len()
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn steps(&self) -> usize {
        self.steps
    }

    fn step(&mut self, u: &Regressor, d: f64) -> Result<StepOutput> {
        check_step_input(self.w.len(), u, d)?;
        let y = u.dot(&self.w);
        let e = d - y;
        let g = self.mu * e;
        for (w, x) in self.w.iter_mut().zip(u.taps()) {
            *w += g * x;
        }
        let step = self.steps;
        self.steps += 1;
        check_finite(&[y, e], step, "output")?;
        check_finite(&self.w, step, "weights")?;
        Ok(StepOutput { y, e })
    }
}
