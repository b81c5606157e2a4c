//! Calibration runs against simulated targets of known reflectivity.

use anyhow::{Context, Result};
use pcf_core::calibration::{
    check_depth_grid, fit_intensity, CalibratedFit, ForceKnot, ForceTable,
};
use pcf_core::elastomer::SpringModel;

use crate::config::{Abscissa, ConfigKind, ExperimentConfig, Grid};
use crate::formats::FitFile;
use crate::sweep::{force_reading, proximity_reading, run_ordered, Row};

/// Proximity readings of `kind` over the fit grid for one reflectivity.
pub fn calibration_rows(config: &ExperimentConfig, kind: ConfigKind, rho: f64) -> Result<Vec<Row>> {
    let distances = config.fit.distance.values();
    run_ordered(&distances, |&d| proximity_reading(config, kind, d, rho))
}

/// `(abscissa, intensity)` fit samples from calibration rows, skipping rows
/// without a range when the range is the abscissa.
pub fn fit_samples(rows: &[Row], abscissa: Abscissa) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| match abscissa {
            Abscissa::Range => r.range.map(|x| (x, r.intensity)),
            Abscissa::Distance => Some((r.distance, r.intensity)),
        })
        .collect()
}

/// Fits the intensity law at every sweep reflectivity.
pub fn fit_family(config: &ExperimentConfig) -> Result<FitFile> {
    let kind = config.fit.config;
    let mut members = Vec::new();
    for &rho in &config.sweep.reflectivities {
        let rows = calibration_rows(config, kind, rho)?;
        let samples = fit_samples(&rows, config.fit.abscissa);
        let fit = fit_intensity(&samples)
            .with_context(|| format!("fitting {} at rho {rho}", kind.name()))?;
        members.push(CalibratedFit {
            reflectivity: rho,
            fit,
        });
    }
    Ok(FitFile {
        config: kind,
        abscissa: config.fit.abscissa,
        members,
    })
}

/// Depths for a force table covering the whole spring range.
pub fn table_depths(spring: &SpringModel, points: usize) -> Vec<f64> {
    Grid::new(0.0, spring.max_depth(), points).values()
}

/// Force table for the arc cover at reflectivity `rho`, simulated in parallel.
pub fn force_table(config: &ExperimentConfig, rho: f64) -> Result<ForceTable> {
    let spring = config.spring()?;
    let depths = table_depths(&spring, config.pipeline.table_points);
    check_depth_grid(&depths, &spring)?;
    let rows = run_ordered(&depths, |&delta| {
        force_reading(config, ConfigKind::Arc, delta, rho)
    })?;
    let samples: Vec<ForceKnot> = rows
        .iter()
        .map(|r| ForceKnot {
            intensity: r.intensity,
            force: r.force,
        })
        .collect();
    Ok(ForceTable::from_samples(rho, &samples)?)
}
