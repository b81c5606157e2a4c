//! Arc geometry search with parallel grid evaluation.

use std::io::Write;

use anyhow::Result;
use pcf_core::optimizer::{evaluate_arc, optimize_arc_with, Evaluation, OptimResult};
use rayon::prelude::*;

use crate::config::ExperimentConfig;

pub const TRACE_HEADER: [&str; 5] = [
    "radius_mm",
    "thickness_mm",
    "crosstalk",
    "sensitivity",
    "objective",
];

pub fn run_optimize(config: &ExperimentConfig) -> Result<OptimResult> {
    let spec = config.objective();
    let template = config.scene(crate::config::ConfigKind::Arc);
    let result = optimize_arc_with(&spec, |points| {
        points
            .par_iter()
            .map(|&(r, t)| evaluate_arc(&spec, &template, r, t))
            .collect::<Result<Vec<Evaluation>, _>>()
    })?;
    Ok(result)
}

pub fn write_trace<W: Write>(out: W, trace: &[Evaluation]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(TRACE_HEADER)?;
    for e in trace {
        writer.write_record([
            format!("{}", e.radius),
            format!("{}", e.thickness),
            format!("{}", e.crosstalk),
            e.sensitivity
                .map_or_else(|| "NaN".to_owned(), |s| format!("{s}")),
            format!("{}", e.objective),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
