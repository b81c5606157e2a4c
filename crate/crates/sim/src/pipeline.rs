//! End-to-end proximity → reflectivity → contact → force run against the
//! simulator's own ground truth.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use pcf_core::calibration::{
    characterize_reflectivity_series, infer_force, ForceTable, ReflectivityProfile,
};
use pcf_core::elastomer::depth_from_force;

use crate::calibrate::{fit_family, force_table};
use crate::config::{ConfigKind, ExperimentConfig, Grid};
use crate::formats::FitFile;
use crate::sweep::{force_reading, proximity_reading, run_ordered, Row};

pub const REPORT_HEADER: &str = "pcf-sim pipeline v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ContactEvent {
    /// Range read at the moment of contact during calibration.
    pub reference_range: f64,
    /// Indentation at the first reading past the threshold; true contact is
    /// at zero depth.
    pub detected_depth: f64,
    pub detected_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceCheck {
    pub truth: f64,
    pub depth: f64,
    pub intensity: f64,
    pub inferred: f64,
    pub saturated: bool,
}

impl ForceCheck {
    pub fn relative_error(&self) -> f64 {
        if self.truth == 0.0 {
            self.inferred.abs()
        } else {
            (self.inferred - self.truth).abs() / self.truth
        }
    }
}

/// Outcome of every stage; a failed stage records its error and later stages
/// that depend on it are skipped.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub config: ConfigKind,
    pub truth_reflectivity: f64,
    pub calibration: Result<FitFile, String>,
    pub approach: Vec<Row>,
    pub no_signal: bool,
    pub reflectivity: Result<ReflectivityProfile, String>,
    pub contact: Result<ContactEvent, String>,
    pub table: Result<ForceTable, String>,
    pub forces: Vec<ForceCheck>,
}

fn skipped<T>(why: &str) -> Result<T, String> {
    Err(format!("skipped: {why}"))
}

/// Calibrates in-run, then runs every stage.
pub fn run_full_pipeline(config: &ExperimentConfig) -> Result<PipelineReport> {
    run_stages(config, fit_family(config).map_err(|e| format!("{e:#}")))
}

/// Runs every stage against a previously saved fit family.
pub fn run_full_pipeline_from(
    config: &ExperimentConfig,
    family: FitFile,
) -> Result<PipelineReport> {
    if family.config != config.fit.config {
        bail!(
            "fit family was calibrated on '{}' but the pipeline uses '{}'",
            family.config.name(),
            config.fit.config.name()
        );
    }
    run_stages(config, Ok(family))
}

fn run_stages(
    config: &ExperimentConfig,
    calibration: Result<FitFile, String>,
) -> Result<PipelineReport> {
    let kind = config.fit.config;
    if kind == ConfigKind::Bare {
        bail!("the pipeline needs a covered configuration to press into");
    }
    let rho = config.pipeline.reflectivity;
    let mut report = PipelineReport {
        config: kind,
        truth_reflectivity: rho,
        calibration,
        approach: Vec::new(),
        no_signal: false,
        reflectivity: skipped("no calibration"),
        contact: skipped("no calibration"),
        table: skipped("no reflectivity estimate"),
        forces: Vec::new(),
    };

    let Ok(family) = &report.calibration else {
        return Ok(report);
    };

    let mut distances = config.fit.distance.values();
    distances.reverse();
    report.approach = run_ordered(&distances, |&d| proximity_reading(config, kind, d, rho))?;
    let pairs: Vec<(f64, f64)> = report
        .approach
        .iter()
        .filter(|r| r.intensity > 0.0)
        .filter_map(|r| r.range.map(|range| (range, r.intensity)))
        .collect();
    report.no_signal = pairs.is_empty();
    if report.no_signal {
        report.reflectivity = Err("no signal during approach".into());
        report.contact = skipped("no signal");
        return Ok(report);
    }
    report.reflectivity =
        characterize_reflectivity_series(&pairs, &family.members).map_err(|e| e.to_string());

    report.contact = detect_contact(config, kind, rho);

    let Ok(profile) = &report.reflectivity else {
        return Ok(report);
    };
    report.table = force_table(config, profile.reflectivity).map_err(|e| format!("{e:#}"));
    let Ok(table) = &report.table else {
        return Ok(report);
    };
    let spring = config.spring()?;
    for &force in &config.pipeline.force_levels_n {
        let depth = depth_from_force(&spring, force)?;
        let row = force_reading(config, kind, depth, rho)?;
        let estimate = infer_force(table, row.intensity);
        report.forces.push(ForceCheck {
            truth: force,
            depth,
            intensity: row.intensity,
            inferred: estimate.force,
            saturated: estimate.saturated,
        });
    }
    Ok(report)
}

/// Presses in steps of `press_step_mm` until the range drops below the
/// calibrated contact reading by more than the threshold.
fn detect_contact(
    config: &ExperimentConfig,
    kind: ConfigKind,
    rho: f64,
) -> Result<ContactEvent, String> {
    let calibration_rho = config.sweep.reflectivities[config.sweep.reflectivities.len() / 2];
    let reference = force_reading(config, kind, 0.0, calibration_rho)
        .map_err(|e| format!("{e:#}"))?
        .range
        .ok_or("no range at contact during calibration")?;
    let spring = config.spring().map_err(|e| e.to_string())?;
    let max_depth = spring.max_depth();
    let step = config.pipeline.press_step_mm;
    let points = (max_depth / step).round() as usize + 1;
    let depths = Grid::new(0.0, max_depth, points.max(2)).values();
    let rows = run_ordered(&depths, |&delta| force_reading(config, kind, delta, rho))
        .map_err(|e| format!("{e:#}"))?;
    let threshold = config.pipeline.contact_threshold_mm;
    rows.iter()
        .find_map(|r| {
            let range = r.range?;
            (range < reference - threshold).then_some(ContactEvent {
                reference_range: reference,
                detected_depth: r.depth,
                detected_range: range,
            })
        })
        .ok_or_else(|| "range never dropped below the contact threshold".to_owned())
}

fn stage<T>(
    out: &mut String,
    name: &str,
    result: &Result<T, String>,
    ok: impl FnOnce(&T) -> String,
) {
    match result {
        Ok(v) => writeln!(out, "{name} status=ok {}", ok(v)),
        Err(e) => writeln!(out, "{name} status=failed error={e:?}"),
    }
    .expect("writing to a string");
}

pub fn write_report(report: &PipelineReport) -> String {
    let mut out = String::new();
    writeln!(out, "{REPORT_HEADER}").unwrap();
    writeln!(out, "config={}", report.config.name()).unwrap();
    writeln!(out, "truth_reflectivity={}", report.truth_reflectivity).unwrap();
    stage(&mut out, "calibration", &report.calibration, |f| {
        let mut s = format!("members={}", f.members.len());
        for m in &f.members {
            let p = m.fit.params;
            write!(
                s,
                " fit[{}]=gain:{};offset_mm:{};floor:{};rms:{}",
                m.reflectivity, p.gain, p.offset, p.floor, m.fit.rms
            )
            .unwrap();
        }
        s
    });
    for r in &report.approach {
        writeln!(
            out,
            "approach d_mm={} range_mm={} intensity={}",
            r.distance,
            r.range.map_or("NaN".to_owned(), |x| x.to_string()),
            r.intensity
        )
        .unwrap();
    }
    writeln!(out, "no_signal={}", report.no_signal).unwrap();
    stage(&mut out, "reflectivity", &report.reflectivity, |p| {
        format!(
            "estimate={} truth={} error={} extrapolated={}",
            p.reflectivity,
            report.truth_reflectivity,
            (p.reflectivity - report.truth_reflectivity).abs(),
            p.extrapolated
        )
    });
    stage(&mut out, "contact", &report.contact, |c| {
        format!(
            "reference_range_mm={} detected_depth_mm={} detected_range_mm={} truth_depth_mm=0",
            c.reference_range, c.detected_depth, c.detected_range
        )
    });
    stage(&mut out, "force_table", &report.table, |t| {
        format!("reflectivity={} knots={}", t.reflectivity, t.knots().len())
    });
    for f in &report.forces {
        writeln!(
            out,
            "force truth_N={} depth_mm={} intensity={} inferred_N={} relative_error={} saturated={}",
            f.truth,
            f.depth,
            f.intensity,
            f.inferred,
            f.relative_error(),
            f.saturated
        )
        .unwrap();
    }
    out
}
