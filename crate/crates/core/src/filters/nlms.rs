use super::{check_finite, check_order, check_step_input, AdaptiveFilter, StepOutput};
use crate::error::{Error, Result};
use crate::signal::Regressor;

/// Normalized LMS: `w ← w + μ·e·u / (ε + uᵀu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NlmsFilter {
    w: Vec<f64>,
    mu: f64,
    eps: f64,
    steps: usize,
}

impl NlmsFilter {
    /// `eps` may be zero; an all-zero regressor then skips the update.
    pub fn new(order: usize, mu: f64, eps: f64) -> Result<Self> {
        check_order(order)?;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Config(format!("NLMS step size must be positive, got {mu}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::Config(format!("NLMS regularizer must be non-negative, got {eps}")));
        }
        Ok(Self {
            w: vec![0.0; order],
            mu,
            eps,
            steps: 0,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl AdaptiveFilter for NlmsFilter {
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
        let norm = self.eps + u.energy();
        if norm > 0.0 {
            let g = self.mu * e / norm;
            for (w, x) in self.w.iter_mut().zip(u.taps()) {
                *w += g * x;
            }
        }
        let step = self.steps;
        self.steps += 1;
        check_finite(&[y, e], step, "output")?;
        check_finite(&self.w, step, "weights")?;
        Ok(StepOutput { y, e })
    }
}
