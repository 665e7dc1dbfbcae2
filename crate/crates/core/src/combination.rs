//! Convex combination of two adaptive filters with a sigmoid-mapped,
//! gradient-adapted mixing parameter.
//!
//! Each step runs both components on the same `(u, d)`, mixes their a priori
//! outputs with the mixing coefficient η carried over from the previous step,
//! then adapts the mixing parameter `a` and recomputes η = sigmoid(a).
//! `a` is clamped to `[-a⁺, a⁺]`; when the clamp engages η is pinned to
//! exactly 0 or 1 for the next step.

use crate::error::{Error, Result};
use crate::filters::{
    check_pair, AdaptiveFilter, Filter, FilterConfig, DEFAULT_RLS_DELTA,
};
use crate::signal::{Regressor, Signal};

pub const DEFAULT_MU_A: f64 = 100.0;
pub const DEFAULT_A_PLUS: f64 = 4.0;

pub const DEFAULT_CLMS_MU_FAST: f64 = 0.05;
pub const DEFAULT_CLMS_MU_SLOW: f64 = 0.005;
pub const DEFAULT_CRLS_LAMBDA_FAST: f64 = 0.98;
pub const DEFAULT_CRLS_LAMBDA_SLOW: f64 = 0.9995;
pub const DEFAULT_RLS_LMS_LAMBDA: f64 = 0.999;
pub const DEFAULT_RLS_LMS_MU: f64 = 0.01;

pub fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// Which pair of component filters is combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComboVariant {
    /// Two LMS filters; `mu_fast > mu_slow`.
    Clms { mu_fast: f64, mu_slow: f64 },
    /// Two RLS filters; `lambda_fast < lambda_slow`.
    Crls {
        lambda_fast: f64,
        lambda_slow: f64,
        delta: f64,
    },
    /// RLS as component 1, LMS as component 2.
    RlsLms { lambda: f64, mu: f64, delta: f64 },
}

impl ComboVariant {
    pub fn clms() -> Self {
        ComboVariant::Clms {
            mu_fast: DEFAULT_CLMS_MU_FAST,
            mu_slow: DEFAULT_CLMS_MU_SLOW,
        }
    }

    pub fn crls() -> Self {
        ComboVariant::Crls {
            lambda_fast: DEFAULT_CRLS_LAMBDA_FAST,
            lambda_slow: DEFAULT_CRLS_LAMBDA_SLOW,
            delta: DEFAULT_RLS_DELTA,
        }
    }

    pub fn rls_lms() -> Self {
        ComboVariant::RlsLms {
            lambda: DEFAULT_RLS_LMS_LAMBDA,
            mu: DEFAULT_RLS_LMS_MU,
            delta: DEFAULT_RLS_DELTA,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ComboVariant::Clms { .. } => "clms",
            ComboVariant::Crls { .. } => "crls",
            ComboVariant::RlsLms { .. } => "rls-lms",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ComboVariant::Clms { mu_fast, mu_slow } => {
                if !(mu_slow > 0.0 && mu_fast > mu_slow) {
                    return Err(Error::Config(format!(
                        "CLMS needs mu_fast > mu_slow > 0, got {mu_fast} and {mu_slow}"
                    )));
                }
            }
            ComboVariant::Crls {
                lambda_fast,
                lambda_slow,
                ..
            } => {
                if !(lambda_fast > 0.0 && lambda_fast < lambda_slow && lambda_slow <= 1.0) {
                    return Err(Error::Config(format!(
                        "CRLS needs 0 < lambda_fast < lambda_slow <= 1, got {lambda_fast} and {lambda_slow}"
                    )));
                }
            }
            ComboVariant::RlsLms { lambda, mu, .. } => {
                if !(lambda > 0.0 && lambda <= 1.0 && mu > 0.0) {
                    return Err(Error::Config(format!(
                        "RLS-LMS needs lambda in (0, 1] and mu > 0, got {lambda} and {mu}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn component_configs(&self) -> (FilterConfig, FilterConfig) {
        match *self {
            ComboVariant::Clms { mu_fast, mu_slow } => (
                FilterConfig::Lms { mu: mu_fast },
                FilterConfig::Lms { mu: mu_slow },
            ),
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
}

/// Mixing-layer parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingParams {
    pub mu_a: f64,
    pub a_plus: f64,
    pub a0: f64,
}

impl Default for MixingParams {
    fn default() -> Self {
        Self {
            mu_a: DEFAULT_MU_A,
            a_plus: DEFAULT_A_PLUS,
            a0: 0.0,
        }
    }
}

impl MixingParams {
    fn validate(&self) -> Result<()> {
        if !(self.a_plus.is_finite() && self.a_plus > 0.0) {
            return Err(Error::Config(format!("a_plus must be positive, got {}", self.a_plus)));
        }
        if !(self.mu_a.is_finite() && self.mu_a >= 0.0) {
            return Err(Error::Config(format!("mu_a must be non-negative, got {}", self.mu_a)));
        }
        if !(self.a0.is_finite() && self.a0.abs() <= self.a_plus) {
            return Err(Error::Config(format!(
                "initial mixing parameter {} lies outside [-{a}, {a}]",
                self.a0,
                a = self.a_plus
            )));
        }
        Ok(())
    }
}

/// Everything produced by one combination step.
#[derive(Debug, Clone, PartialEq)]
pub struct ComboStepOutput {
    pub y: f64,
    pub e: f64,
    pub y1: f64,
    pub y2: f64,
    pub e1: f64,
    pub e2: f64,
    /// η applied to this step's mix.
    pub eta_used: f64,
    /// η·w₁ + (1−η)·w₂ with the post-update weights and η.
    pub w_combined: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinationState {
    comp1: Filter,
    comp2: Filter,
    a: f64,
    eta: f64,
    a_plus: f64,
    mu_a: f64,
    steps: usize,
}

impl CombinationState {
    /// Builds a combination of zero-initialized components for `variant`.
    pub fn new(variant: ComboVariant, order: usize, mixing: MixingParams) -> Result<Self> {
        variant.validate()?;
        let (c1, c2) = variant.component_configs();
        Self::from_components(c1.build(order)?, c2.build(order)?, mixing)
    }

    /// Combines two arbitrary filters of the same order. No fast/slow ordering is enforced.
    pub fn from_components(comp1: Filter, comp2: Filter, mixing: MixingParams) -> Result<Self> {
        mixing.validate()?;
        if comp1.order() != comp2.order() {
            return Err(Error::DimensionMismatch {
                expected: comp1.order(),
                got: comp2.order(),
            });
        }
        let MixingParams { mu_a, a_plus, a0 } = mixing;
        let eta = if a0 >= a_plus {
            1.0
        } else if a0 <= -a_plus {
            0.0
        } else {
            sigmoid(a0)
        };
        Ok(Self {
            comp1,
            comp2,
            a: a0,
            eta,
            a_plus,
            mu_a,
            steps: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.comp1.order()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }

    pub fn mu_a(&self) -> f64 {
        self.mu_a
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn components(&self) -> (&Filter, &Filter) {
        (&self.comp1, &self.comp2)
    }

    pub fn combined_weights(&self) -> Vec<f64> {
        let eta = self.eta;
        self.comp1
            .weights()
            .iter()
            .zip(self.comp2.weights())
            .map(|(w1, w2)| eta * w1 + (1.0 - eta) * w2)
            .collect()
    }

    pub fn step(&mut self, u: &Regressor, d: f64) -> Result<ComboStepOutput> {
        if !d.is_finite() {
            return Err(Error::InvalidInput(format!("desired sample {d} is not finite")));
        }
        let step = self.steps;
        let eta = self.eta;

        // Components report a priori outputs, so updating them here is
        // equivalent to mixing first and updating afterwards.
        let out1 = self.comp1.step(u, d)?;
        let out2 = self.comp2.step(u, d)?;
        let (y1, y2) = (out1.y, out2.y);

        let y = eta * y1 + (1.0 - eta) * y2;
        let e = d - y;

        // mu_a == 0 freezes the mixing layer, including an initially pinned η.
        if self.mu_a != 0.0 {
            let e_alpha = e * (y1 - y2);
            let a = self.a + self.mu_a * e_alpha * eta * (1.0 - eta);
            if !a.is_finite() {
                self.steps += 1;
                return Err(Error::Divergence {
                    step,
                    what: "mixing parameter",
                });
            }
            if a < -self.a_plus {
                self.a = -self.a_plus;
                self.eta = 0.0;
            } else if a > self.a_plus {
                self.a = self.a_plus;
                self.eta = 1.0;
            } else {
                self.a = a;
                self.eta = sigmoid(a);
            }
        }
        self.steps += 1;
        if !(y.is_finite() && e.is_finite()) {
            return Err(Error::Divergence {
                step,
                what: "combined output",
            });
        }

        Ok(ComboStepOutput {
            y,
            e,
            y1,
            y2,
            e1: out1.e,
            e2: out2.e,
            eta_used: eta,
            w_combined: self.combined_weights(),
        })
    }
}

/// Per-sample traces of a combination run.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationRunResult {
    pub y: Vec<f64>,
    pub e: Vec<f64>,
    /// η applied at each sample.
    pub eta: Vec<f64>,
    /// Mixing parameter after each sample's update.
    pub a: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn run_combination(
    state: &mut CombinationState,
    desired: &Signal,
    reference: &Signal,
) -> Result<CombinationRunResult> {
    check_pair(desired, reference)?;
    let n = desired.len();
    let mut u = Regressor::new(state.order())?;
    let mut out = CombinationRunResult {
        y: Vec::with_capacity(n),
        e: Vec::with_capacity(n),
        eta: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        e1: Vec::with_capacity(n),
        e2: Vec::with_capacity(n),
        weights: Vec::new(),
    };
    for (i, (&d, &x)) in desired.samples().iter().zip(reference.samples()).enumerate() {
        u.push(x).map_err(|err| err.at_sample(i))?;
        let s = state.step(&u, d).map_err(|err| err.at_sample(i))?;
        out.y.push(s.y);
        out.e.push(s.e);
        out.eta.push(s.eta_used);
        out.a.push(state.a());
        out.e1.push(s.e1);
        out.e2.push(s.e2);
    }
    out.weights = state.combined_weights();
    Ok(out)
}
