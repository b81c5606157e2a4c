//! Experiment harness for the `pcf-core` sensor model: TOML configuration,
//! parallel sweeps with deterministic CSV output, calibration files, SVG ray
//! diagrams and the command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod cli;
pub mod config;
pub mod diagram;
pub mod formats;
pub mod optimize;
pub mod oracle;
pub mod pipeline;
pub mod sweep;
