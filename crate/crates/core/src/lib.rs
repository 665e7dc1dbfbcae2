//! Adaptive noise cancellation for fetal ECG extraction.
//!
//! The crate provides streaming LMS, NLMS and RLS filters, convex
//! combinations of two filters (CLMS, CRLS, RLS-LMS), a Pan-Tompkins QRS
//! detector, evaluation metrics, and a pipeline that reads a multichannel
//! abdominal/thoracic recording and writes traces, peak files, reports and
//! SVG plots.

pub mod combination;
pub mod config;
pub mod error;
pub mod fetch;
pub mod filters;
pub mod metrics;
pub mod output;
pub mod pipeline;
pub mod plot;
pub mod qrs;
pub mod recording;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
