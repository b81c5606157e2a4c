//! Versioned plain-text formats for intensity fits and force tables: one
//! header line, `key=value` lines, then comma-separated rows.

use anyhow::{bail, ensure, Context, Result};
use pcf_core::calibration::{CalibratedFit, ForceKnot, ForceTable, IntensityFit};
use pcf_core::sensor::IntensityParams;

use crate::config::{Abscissa, ConfigKind};

pub const FIT_HEADER: &str = "pcf-fit v1";
pub const FORCE_TABLE_HEADER: &str = "pcf-force-table v1";

/// A family of intensity fits, one per calibration reflectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct FitFile {
    pub config: ConfigKind,
    pub abscissa: Abscissa,
    pub members: Vec<CalibratedFit>,
}

const FIT_COLUMNS: &str = "reflectivity,gain,offset_mm,floor,rms,iterations,converged";

pub fn write_fits(file: &FitFile) -> String {
    let abscissa = match file.abscissa {
        Abscissa::Range => "range",
        Abscissa::Distance => "distance",
    };
    let mut out = format!(
        "{FIT_HEADER}\nconfig={}\nabscissa={abscissa}\nmembers={}\ncolumns={FIT_COLUMNS}\n",
        file.config.name(),
        file.members.len()
    );
    for m in &file.members {
        let f = &m.fit;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.reflectivity,
            f.params.gain,
            f.params.offset,
            f.params.floor,
            f.rms,
            f.iterations,
            f.converged
        ));
    }
    out
}

type Sections<'a> = (Vec<(&'a str, &'a str)>, Vec<&'a str>);

/// Splits a document into its `key=value` block and its data rows.
fn sections<'a>(text: &'a str, header: &str) -> Result<Sections<'a>> {
    let mut lines = text.lines();
    let first = lines.next().unwrap_or_default();
    ensure!(
        first == header,
        "expected header '{header}', found '{first}'"
    );
    let mut keys = Vec::new();
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        match line.split_once('=') {
            Some((k, v)) if rows.is_empty() => keys.push((k.trim(), v.trim())),
            Some(_) => bail!("key=value line after data rows: '{line}'"),
            None => rows.push(line),
        }
    }
    Ok((keys, rows))
}

fn lookup<'a>(keys: &[(&'a str, &'a str)], name: &str) -> Result<&'a str> {
    keys.iter()
        .find(|(k, _)| *k == name)
        .map(|(_, v)| *v)
        .with_context(|| format!("missing key '{name}'"))
}

fn parse_fields(row: &str, expected: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = row.split(',').map(str::trim).collect();
    ensure!(
        fields.len() == expected,
        "expected {expected} fields in '{row}'"
    );
    Ok(fields)
}

pub fn read_fits(text: &str) -> Result<FitFile> {
    let (keys, rows) = sections(text, FIT_HEADER)?;
    let config = lookup(&keys, "config")?.parse()?;
    let abscissa = match lookup(&keys, "abscissa")? {
        "range" => Abscissa::Range,
        "distance" => Abscissa::Distance,
        other => bail!("unknown abscissa '{other}'"),
    };
    let count: usize = lookup(&keys, "members")?.parse()?;
    ensure!(
        count == rows.len(),
        "members={count} but {} rows",
        rows.len()
    );
    let members = rows
        .iter()
        .map(|row| {
            let f = parse_fields(row, 7)?;
            Ok(CalibratedFit {
                reflectivity: f[0].parse()?,
                fit: IntensityFit {
                    params: IntensityParams::new(f[1].parse()?, f[2].parse()?, f[3].parse()?),
                    rms: f[4].parse()?,
                    iterations: f[5].parse()?,
                    converged: f[6].parse()?,
                    gradient_norm: f64::NAN,
                    history: Vec::new(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FitFile {
        config,
        abscissa,
        members,
    })
}

pub fn write_force_table(table: &ForceTable) -> String {
    let mut out = format!(
        "{FORCE_TABLE_HEADER}\nreflectivity={}\nknots={}\ncolumns=intensity,force_N\n",
        table.reflectivity,
        table.knots().len()
    );
    for k in table.knots() {
        out.push_str(&format!("{},{}\n", k.intensity, k.force));
    }
    out
}

pub fn read_force_table(text: &str) -> Result<ForceTable> {
    let (keys, rows) = sections(text, FORCE_TABLE_HEADER)?;
    let reflectivity: f64 = lookup(&keys, "reflectivity")?.parse()?;
    let count: usize = lookup(&keys, "knots")?.parse()?;
    ensure!(count == rows.len(), "knots={count} but {} rows", rows.len());
    let knots = rows
        .iter()
        .map(|row| {
            let f = parse_fields(row, 2)?;
            Ok(ForceKnot {
                intensity: f[0].parse()?,
                force: f[1].parse()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = ForceTable::from_samples(reflectivity, &knots)?;
    ensure!(
        table.knots().len() == knots.len(),
        "force table knots are not monotone"
    );
    Ok(table)
}
