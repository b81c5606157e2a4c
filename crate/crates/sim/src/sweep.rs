//! Proximity and force sweeps and their CSV form.

use std::io::Write;

use anyhow::{Context, Result};
use pcf_core::elastomer::force_from_depth;
use pcf_core::sensor::{simulate, Reading};
use rayon::prelude::*;

use crate::config::{ConfigKind, ExperimentConfig};

pub const READINGS_VERSION: &str = "# pcf-sim readings v1";
pub const READINGS_HEADER: [&str; 8] = [
    "config_kind",
    "d_mm",
    "rho",
    "delta_mm",
    "force_N",
    "range_mm",
    "intensity",
    "crosstalk",
];

/// One synthesized reading with the scene coordinates that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub config: ConfigKind,
    /// Target distance from the sensor plane.
    pub distance: f64,
    pub reflectivity: f64,
    pub depth: f64,
    pub force: f64,
    pub range: Option<f64>,
    pub intensity: f64,
    pub crosstalk: f64,
}

impl Row {
    fn new(
        config: ConfigKind,
        distance: f64,
        reflectivity: f64,
        depth: f64,
        force: f64,
        r: &Reading,
    ) -> Self {
        Row {
            config,
            distance,
            reflectivity,
            depth,
            force,
            range: r.range,
            intensity: r.intensity,
            crosstalk: r.crosstalk,
        }
    }
}

/// Reading of `kind` with the target at `distance` and no indentation.
pub fn proximity_reading(
    config: &ExperimentConfig,
    kind: ConfigKind,
    distance: f64,
    rho: f64,
) -> Result<Row> {
    let scene = config.scene(kind).with_target(distance, rho);
    let reading =
        simulate(&scene).with_context(|| format!("{} at {distance} mm, rho {rho}", kind.name()))?;
    Ok(Row::new(kind, distance, rho, 0.0, 0.0, &reading))
}

/// Reading of `kind` pressed `depth` millimeters by a target of reflectivity `rho`.
pub fn force_reading(
    config: &ExperimentConfig,
    kind: ConfigKind,
    depth: f64,
    rho: f64,
) -> Result<Row> {
    let scene = config.scene(kind).pressed(depth, rho)?;
    let distance = scene.target.map_or(f64::NAN, |t| t.distance);
    let reading = simulate(&scene)
        .with_context(|| format!("{} pressed {depth} mm, rho {rho}", kind.name()))?;
    let force = force_from_depth(&config.spring()?, depth);
    Ok(Row::new(kind, distance, rho, depth, force, &reading))
}

/// Runs `jobs` in parallel, returning results in job order.
pub fn run_ordered<J, T, F>(jobs: &[J], f: F) -> Result<Vec<T>>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T> + Send + Sync,
{
    jobs.par_iter().map(f).collect()
}

/// Every configuration at every grid distance and reflectivity, ordered by
/// configuration, then distance, then reflectivity.
pub fn run_proximity_sweep(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut jobs = Vec::new();
    for kind in ConfigKind::ALL {
        for d in config.sweep.distance.values() {
            for &rho in &config.sweep.reflectivities {
                jobs.push((kind, d, rho));
            }
        }
    }
    run_ordered(&jobs, |&(kind, d, rho)| {
        proximity_reading(config, kind, d, rho)
    })
}

/// Every covered configuration at every grid depth and reflectivity.
pub fn run_force_sweep(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut jobs = Vec::new();
    for kind in ConfigKind::COVERED {
        for delta in config.sweep.depth.values() {
            for &rho in &config.sweep.reflectivities {
                jobs.push((kind, delta, rho));
            }
        }
    }
    run_ordered(&jobs, |&(kind, delta, rho)| {
        force_reading(config, kind, delta, rho)
    })
}

fn number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x}")
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[Row]) -> Result<()> {
    writeln!(out, "{READINGS_VERSION}")?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(READINGS_HEADER)?;
    for r in rows {
        writer.write_record([
            r.config.name().to_owned(),
            number(r.distance),
            number(r.reflectivity),
            number(r.depth),
            number(r.force),
            number(r.range.unwrap_or(f64::NAN)),
            number(r.intensity),
            number(r.crosstalk),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Parses the output of [`write_rows`].
pub fn read_rows(text: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    anyhow::ensure!(
        header.iter().eq(READINGS_HEADER.iter().copied()),
        "unexpected readings header"
    );
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .with_context(|| format!("bad number in column {}", READINGS_HEADER[i]))
        };
        let range = field(5)?;
        rows.push(Row {
            config: record[0].parse()?,
            distance: field(1)?,
            reflectivity: field(2)?,
            depth: field(3)?,
            force: field(4)?,
            range: (!range.is_nan()).then_some(range),
            intensity: field(6)?,
            crosstalk: field(7)?,
        });
    }
    Ok(rows)
}
