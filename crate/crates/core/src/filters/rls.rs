use super::{check_finite, check_order, check_step_input, AdaptiveFilter, StepOutput};
use crate::error::{Error, Result};
use crate::signal::Regressor;

/// Exponentially weighted recursive least squares.
///
/// Per step, with forgetting factor λ and inverse correlation matrix P:
///
/// ```text
/// π  = P·u / λ
/// k  = π / (1 + uᵀπ)
/// w' = w + k·(d − wᵀu)
/// P' = (P − k·uᵀP) / λ
/// ```
///
/// P is re-symmetrized after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsFilter {
    w: Vec<f64>,
    /// Row-major, order × order.
    p: Vec<f64>,
    lambda: f64,
    steps: usize,
    pi: Vec<f64>,
    u_p: Vec<f64>,
}

impl RlsFilter {
    /// Zero weights and `P(0) = delta·I`.
    pub fn new(order: usize, lambda: f64, delta: f64) -> Result<Self> {
        check_order(order)?;
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Config(format!(
                "RLS forgetting factor must lie in (0, 1], got {lambda}"
            )));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!(
                "RLS initial P scale must be positive, got {delta}"
            )));
        }
        let mut p = vec![0.0; order * order];
        for i in 0..order {
            p[i * order + i] = delta;
        }
        Ok(Self {
            w: vec![0.0; order],
            p,
            lambda,
            steps: 0,
            pi: vec![0.0; order],
            u_p: vec![0.0; order],
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Inverse correlation matrix, row-major.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Largest |P_ij − P_ji| relative to the largest |P_ij|.
    pub fn asymmetry(&self) -> f64 {
        let m = self.w.len();
        let scale = self.p.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in (i + 1)..m {
                worst = worst.max((self.p[i * m + j] - self.p[j * m + i]).abs());
            }
        }
        worst / scale
    }
}

impl AdaptiveFilter for RlsFilter {
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
        let m = self.w.len();
        check_step_input(m, u, d)?;
        let step = self.steps;
        let taps = u.taps();
        let inv_lambda = 1.0 / self.lambda;

        for i in 0..m {
            let row = &self.p[i * m..(i + 1) * m];
            self.pi[i] = inv_lambda * row.iter().zip(taps).map(|(p, x)| p * x).sum::<f64>();
        }
        let denominator = 1.0 + u.dot(&self.pi);
        if denominator.is_nan() || denominator <= 0.0 {
            return Err(Error::Conditioning { step, denominator });
        }
        // pi now holds the gain k
        for v in &mut self.pi {
            *v /= denominator;
        }

        let y = u.dot(&self.w);
        let e = d - y;
        for (w, k) in self.w.iter_mut().zip(&self.pi) {
            *w += k * e;
        }

        for j in 0..m {
            self.u_p[j] = (0..m).map(|i| taps[i] * self.p[i * m + j]).sum();
        }
        for i in 0..m {
            let k = self.pi[i];
            for j in 0..m {
                let idx = i * m + j;
                self.p[idx] = inv_lambda * (self.p[idx] - k * self.u_p[j]);
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let avg = 0.5 * (self.p[i * m + j] + self.p[j * m + i]);
                self.p[i * m + j] = avg;
                self.p[j * m + i] = avg;
            }
        }

        self.steps += 1;
        check_finite(&[y, e], step, "output")?;
        check_finite(&self.w, step, "weights")?;
        check_finite(&self.p, step, "inverse correlation matrix")?;
        Ok(StepOutput { y, e })
    }
}
