//! Command-line front end.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use pcf_core::sensor::simulate;

use crate::calibrate::{fit_family, force_table};
use crate::config::ExperimentConfig;
use crate::diagram::{diagram_scene, render};
use crate::formats::{read_fits, write_fits, write_force_table};
use crate::optimize::{run_optimize, write_trace};
use crate::oracle::{compare_areas, default_pairs, write_comparison};
use crate::pipeline::{run_full_pipeline, write_report};
use crate::sweep::{rows_to_string, run_force_sweep, run_proximity_sweep, Row};

#[derive(Debug, Parser)]
#[command(
    name = "pcf-sim",
    version,
    about = "Elastomer-covered time-of-flight sensor simulator"
)]
pub struct Cli {
    /// TOML experiment configuration; defaults apply to anything left out.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a single reading.
    Simulate(OutputArg),
    /// Range and intensity of every configuration over target distance.
    SweepProximity(OutputArg),
    /// Range and intensity of every covered configuration over indentation.
    SweepForce(OutputArg),
    /// Draw the traced rays of one scene as SVG.
    TraceDiagram(OutputArg),
    /// Fit the intensity law per reflectivity and build a force table.
    Fit {
        #[command(flatten)]
        output: OutputArg,
        /// Where to write the force table.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Search arc radius and thickness.
    Optimize(OutputArg),
    /// Proximity, reflectivity, contact and force inference end to end.
    Pipeline {
        #[command(flatten)]
        output: OutputArg,
        /// Use a saved fit family instead of calibrating in-run.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Print the effective configuration.
    ShowConfig,
    /// Compare the intensity law's viewing area with the exact and Monte
    /// Carlo disc overlap.
    ViewArea {
        #[command(flatten)]
        output: OutputArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, clap::Args)]
pub struct OutputArg {
    /// Output path, `-` for standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// An error tagged with a machine-readable category.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = format!("{:#}", self.error).replace(['\n', '\r'], " ");
        write!(f, "error kind={} message={:?}", self.kind, message)
    }
}

trait Tag<T> {
    fn tag(self, kind: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Tag<T> for Result<T, E> {
    fn tag(self, kind: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            kind,
            error: e.into(),
        })
    }
}

fn emit(path: &Path, content: &str) -> Result<(), Failure> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(content.as_bytes()).tag("io")?;
        return out.flush().tag("io");
    }
    std::fs::write(path, content)
        .with_context(|| format!("cannot write {}", path.display()))
        .tag("io")
}

fn target(arg: &OutputArg, default: &Path) -> PathBuf {
    arg.output.clone().unwrap_or_else(|| default.to_path_buf())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path).tag("config")?,
        None => ExperimentConfig::default(),
    };
    let out = &config.output;
    match &cli.command {
        Command::Simulate(arg) => {
            let s = &config.simulate;
            let scene = config.scene(s.config);
            let scene = if !s.target {
                scene
            } else if s.depth_mm > 0.0 {
                scene.pressed(s.depth_mm, s.reflectivity).tag("model")?
            } else {
                scene.with_target(s.distance_mm, s.reflectivity)
            };
            let reading = simulate(&scene).tag("model")?;
            let force = pcf_core::elastomer::force_from_depth(
                &config.spring().tag("config")?,
                if s.target { s.depth_mm } else { 0.0 },
            );
            let row = Row {
                config: s.config,
                distance: scene.target.map_or(f64::NAN, |t| t.distance),
                reflectivity: scene.target.map_or(f64::NAN, |t| t.reflectivity),
                depth: scene.cover.map_or(0.0, |c| c.indentation.depth),
                force,
                range: reading.range,
                intensity: reading.intensity,
                crosstalk: reading.crosstalk,
            };
            emit(&target(arg, &out.simulate), &rows_to_string(&[row]))
        }
        Command::SweepProximity(arg) => {
            let rows = run_proximity_sweep(&config).tag("model")?;
            emit(&target(arg, &out.proximity), &rows_to_string(&rows))
        }
        Command::SweepForce(arg) => {
            let rows = run_force_sweep(&config).tag("model")?;
            emit(&target(arg, &out.force), &rows_to_string(&rows))
        }
        Command::TraceDiagram(arg) => {
            let scene = diagram_scene(&config).tag("model")?;
            let svg = render(&scene, config.diagram.reflected_only).tag("model")?;
            emit(&target(arg, &out.diagram), &svg)
        }
        Command::Fit { output, table } => {
            let family = fit_family(&config).tag("model")?;
            emit(&target(output, &out.fit), &write_fits(&family))?;
            let table_path = table.clone().unwrap_or_else(|| out.force_table.clone());
            let table = force_table(&config, config.fit.table_reflectivity).tag("model")?;
            emit(&table_path, &write_force_table(&table))
        }
        Command::Optimize(arg) => {
            let result = run_optimize(&config).tag("model")?;
            let mut buf = Vec::new();
            write_trace(&mut buf, &result.trace).tag("io")?;
            emit(
                &target(arg, &out.optimize),
                &String::from_utf8(buf).tag("io")?,
            )?;
            let b = result.best;
            let summary = format!(
                "best radius_mm={} thickness_mm={} crosstalk={} objective={} evaluations={}\n",
                b.radius,
                b.thickness,
                b.crosstalk,
                b.objective,
                result.evaluations()
            );
            if target(arg, &out.optimize) != Path::new("-") {
                emit(Path::new("-"), &summary)?;
            }
            Ok(())
        }
        Command::Pipeline { output, fits } => {
            let report = run_full_pipeline_with(&config, fits.as_deref())?;
            emit(&target(output, &out.pipeline), &write_report(&report))
        }
        Command::ShowConfig => emit(Path::new("-"), &config.to_toml()),
        Command::ViewArea {
            output,
            samples,
            seed,
        } => {
            let rows = compare_areas(&default_pairs(), *samples, *seed);
            let path = output.output.clone().unwrap_or_else(|| "-".into());
            emit(&path, &write_comparison(&rows))
        }
    }
}

fn run_full_pipeline_with(
    config: &ExperimentConfig,
    fits: Option<&Path>,
) -> Result<crate::pipeline::PipelineReport, Failure> {
    match fits {
        None => run_full_pipeline(config).tag("model"),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .tag("io")?;
            let family = read_fits(&text).tag("format")?;
            crate::pipeline::run_full_pipeline_from(config, family).tag("model")
        }
    }
}

/// Parses `args` and runs them, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            let message = first.trim_start_matches("error: ");
            eprintln!("error kind=usage message={message:?}");
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("{failure}");
            1
        }
    }
}
