//! Single adaptive filters driven one sample at a time.
//!
//! Every filter reports the a priori output `y = wᵀu` computed with the
//! weights held *before* the update, and the error `e = d - y`.

mod lms;
mod nlms;
mod rls;

pub use lms::LmsFilter;
pub use nlms::NlmsFilter;
pub use rls::RlsFilter;

use crate::error::{Error, Result};
use crate::signal::{Regressor, Signal};

/// Output of one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub y: f64,
    pub e: f64,
}

pub trait AdaptiveFilter {
    fn order(&self) -> usize;

    fn weights(&self) -> &[f64];

    /// Number of completed steps.
    fn steps(&self) -> usize;

    /// Consumes one regressor/desired pair and adapts the weights.
    fn step(&mut self, u: &Regressor, d: f64) -> Result<StepOutput>;
}

pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_LMS_MU: f64 = 0.01;
pub const DEFAULT_NLMS_MU: f64 = 1.0;
pub const DEFAULT_NLMS_EPS: f64 = 1e-6;
pub const DEFAULT_RLS_LAMBDA: f64 = 0.999;
pub const DEFAULT_RLS_DELTA: f64 = 100.0;

/// Parameters of a single filter, before it is sized to an order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterConfig {
    Lms { mu: f64 },
    Nlms { mu: f64, eps: f64 },
    Rls { lambda: f64, delta: f64 },
}

impl FilterConfig {
    pub fn lms() -> Self {
        FilterConfig::Lms { mu: DEFAULT_LMS_MU }
    }

    pub fn nlms() -> Self {
        FilterConfig::Nlms {
            mu: DEFAULT_NLMS_MU,
            eps: DEFAULT_NLMS_EPS,
        }
    }

    pub fn rls() -> Self {
        FilterConfig::Rls {
            lambda: DEFAULT_RLS_LAMBDA,
            delta: DEFAULT_RLS_DELTA,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterConfig::Lms { .. } => "lms",
            FilterConfig::Nlms { .. } => "nlms",
            FilterConfig::Rls { .. } => "rls",
        }
    }

    pub fn build(&self, order: usize) -> Result<Filter> {
        Ok(match *self {
            FilterConfig::Lms { mu } => Filter::Lms(LmsFilter::new(order, mu)?),
            FilterConfig::Nlms { mu, eps } => Filter::Nlms(NlmsFilter::new(order, mu, eps)?),
            FilterConfig::Rls { lambda, delta } => Filter::Rls(RlsFilter::new(order, lambda, delta)?),
        })
    }
}

/// Any of the single filters, behind one concrete type.
#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Lms(LmsFilter),
    Nlms(NlmsFilter),
    Rls(RlsFilter),
}

impl AdaptiveFilter for Filter {
    fn order(&self) -> usize {
        match self {
            Filter::Lms(f) => f.order(),
            Filter::Nlms(f) => f.order(),
            Filter::Rls(f) => f.order(),
        }
    }

    fn weights(&self) -> &[f64] {
        match self {
            Filter::Lms(f) => f.weights(),
            Filter::Nlms(f) => f.weights(),
            Filter::Rls(f) => f.weights(),
        }
    }

    fn steps(&self) -> usize {
        match self {
            Filter::Lms(f) => f.steps(),
            Filter::Nlms(f) => f.steps(),
            Filter::Rls(f) => f.steps(),
        }
    }

    fn step(&mut self, u: &Regressor, d: f64) -> Result<StepOutput> {
        match self {
            Filter::Lms(f) => f.step(u, d),
            Filter::Nlms(f) => f.step(u, d),
            Filter::Rls(f) => f.step(u, d),
        }
    }
}

/// Per-sample traces of a streaming run.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRunResult {
    pub y: Vec<f64>,
    pub e: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Streams `reference` through a tap-delay line into `filter`, predicting `desired`.
/// The error sequence is the extracted residual.
pub fn run_filter<F: AdaptiveFilter>(
    filter: &mut F,
    desired: &Signal,
    reference: &Signal,
) -> Result<FilterRunResult> {
    check_pair(desired, reference)?;
    let n = desired.len();
    let mut u = Regressor::new(filter.order())?;
    let (mut y, mut e) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, (&d, &x)) in desired.samples().iter().zip(reference.samples()).enumerate() {
        u.push(x).map_err(|err| err.at_sample(i))?;
        let out = filter.step(&u, d).map_err(|err| err.at_sample(i))?;
        y.push(out.y);
        e.push(out.e);
    }
    Ok(FilterRunResult {
        y,
        e,
        weights: filter.weights().to_vec(),
    })
}

pub(crate) fn check_pair(desired: &Signal, reference: &Signal) -> Result<()> {
    if desired.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: desired.len(),
            got: reference.len(),
        });
    }
    if desired.fs() != reference.fs() {
        return Err(Error::InvalidInput(format!(
            "desired and reference sampling rates differ: {} vs {}",
            desired.fs(),
            reference.fs()
        )));
    }
    Ok(())
}

pub(crate) fn check_step_input(order: usize, u: &Regressor, d: f64) -> Result<()> {
    if u.order() != order {
        return Err(Error::DimensionMismatch {
            expected: order,
            got: u.order(),
        });
    }
    if !d.is_finite() {
        return Err(Error::InvalidInput(format!("desired sample {d} is not finite")));
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64], step: usize, what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { step, what })
    }
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        Err(Error::Config("filter order must be positive".into()))
    } else {
        Ok(())
    }
}
