//! Experiment configuration, read from and printed as TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pcf_core::elastomer::{BoundaryConfig, BoundaryKind, SpringModel};
use pcf_core::geometry::Vec2;
use pcf_core::optics::Medium;
use pcf_core::optimizer::ObjectiveSpec;
use pcf_core::sensor::{Cover, ScatterMode, Scene, SensorHead, TraceSettings};
use serde::{Deserialize, Serialize};

/// One of the four sensor configurations compared in the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigKind {
    Bare,
    Flat,
    Blocker,
    Arc,
}

impl ConfigKind {
    pub const ALL: [ConfigKind; 4] = [
        ConfigKind::Bare,
        ConfigKind::Flat,
        ConfigKind::Blocker,
        ConfigKind::Arc,
    ];
    pub const COVERED: [ConfigKind; 3] = [ConfigKind::Flat, ConfigKind::Blocker, ConfigKind::Arc];

    pub fn name(self) -> &'static str {
        match self {
            ConfigKind::Bare => "bare",
            ConfigKind::Flat => "flat",
            ConfigKind::Blocker => "blocker",
            ConfigKind::Arc => "arc",
        }
    }
}

impl std::str::FromStr for ConfigKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bare" => ConfigKind::Bare,
            "flat" => ConfigKind::Flat,
            "blocker" => ConfigKind::Blocker,
            "arc" => ConfigKind::Arc,
            other => bail!("unknown configuration '{other}' (expected bare, flat, blocker or arc)"),
        })
    }
}

/// Evenly spaced inclusive grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Grid {
            start,
            stop,
            points,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.points == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            bail!("{name}: grid needs finite bounds and at least one point");
        }
        if self.points > 1 && !(self.stop > self.start) {
            bail!("{name}: grid must be strictly increasing (stop > start)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSection {
    pub separation_mm: f64,
    /// Half field of view in air, shared by emitter and receiver.
    pub half_fov_deg: f64,
    pub emitter_rays: usize,
    pub aperture_half_width_mm: f64,
}

impl Default for SensorSection {
    fn default() -> Self {
        let head = SensorHead::default();
        SensorSection {
            separation_mm: head.separation(),
            half_fov_deg: head.half_fov.to_degrees(),
            emitter_rays: head.fan_size,
            aperture_half_width_mm: head.aperture_half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterKind {
    Stratified,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    pub power_floor: f64,
    pub bounce_cap: u32,
    pub scatter_rays: usize,
    pub scatter: ScatterKind,
    /// Only used with sampled scattering.
    pub seed: u64,
}

impl Default for TraceSection {
    fn default() -> Self {
        let s = TraceSettings::default();
        TraceSection {
            power_floor: s.power_floor,
            bounce_cap: s.bounce_cap,
            scatter_rays: s.scatter_fan,
            scatter: ScatterKind::Stratified,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElastomerSection {
    pub refractive_index: f64,
    pub air_index: f64,
    /// Thickness of the flat and arc covers.
    pub thickness_mm: f64,
    pub blocker_thickness_mm: f64,
    pub arc_radius_mm: f64,
    pub span_mm: f64,
    pub blocker_height_mm: f64,
    pub blocker_width_mm: f64,
    pub blocker_x_mm: f64,
}

impl Default for ElastomerSection {
    fn default() -> Self {
        let blocker = BoundaryConfig::blocker(pcf_core::elastomer::BLOCKER_THICKNESS);
        let BoundaryKind::Blocker {
            height,
            width,
            center_x,
        } = blocker.kind
        else {
            unreachable!()
        };
        ElastomerSection {
            refractive_index: Medium::PDMS.refractive_index,
            air_index: Medium::AIR.refractive_index,
            thickness_mm: pcf_core::elastomer::DEFAULT_THICKNESS,
            blocker_thickness_mm: blocker.thickness,
            arc_radius_mm: pcf_core::elastomer::DEFAULT_THICKNESS,
            span_mm: blocker.span_width,
            blocker_height_mm: height,
            blocker_width_mm: width,
            blocker_x_mm: center_x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpringSection {
    pub stiffness_n_per_mm: f64,
    pub max_force_n: f64,
}

impl Default for SpringSection {
    fn default() -> Self {
        let s = SpringModel::default();
        SpringSection {
            stiffness_n_per_mm: s.stiffness,
            max_force_n: s.max_force,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub reflectivities: Vec<f64>,
    /// Target distances for the proximity sweep, from contact out to 50 mm.
    pub distance: Grid,
    /// Indentation depths for the force sweep.
    pub depth: Grid,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            reflectivities: vec![0.17, 0.5, 0.85],
            distance: Grid::new(pcf_core::elastomer::BLOCKER_THICKNESS, 50.0, 54),
            depth: Grid::new(0.0, 5.0, 11),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub config: ConfigKind,
    /// Without a target only boundary crosstalk is collected.
    pub target: bool,
    pub distance_mm: f64,
    /// Indentation; when positive the target sits at thickness - depth.
    pub depth_mm: f64,
    pub reflectivity: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            config: ConfigKind::Arc,
            target: true,
            distance_mm: 30.0,
            depth_mm: 0.0,
            reflectivity: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagramSection {
    pub config: ConfigKind,
    pub target: bool,
    pub distance_mm: f64,
    pub depth_mm: f64,
    pub reflectivity: f64,
    pub emitter_rays: usize,
    pub scatter_rays: usize,
    /// Draw only legs that have reflected at least once.
    pub reflected_only: bool,
}

impl Default for DiagramSection {
    fn default() -> Self {
        DiagramSection {
            config: ConfigKind::Arc,
            target: false,
            distance_mm: 30.0,
            depth_mm: 0.0,
            reflectivity: 0.5,
            emitter_rays: 21,
            scatter_rays: 9,
            reflected_only: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Abscissa {
    /// Fit intensity against the simulated range reading.
    Range,
    /// Fit against the true target distance.
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub config: ConfigKind,
    pub abscissa: Abscissa,
    pub distance: Grid,
    /// Reflectivity of the force table written alongside the fits.
    pub table_reflectivity: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            config: ConfigKind::Arc,
            abscissa: Abscissa::Range,
            distance: Grid::new(18.0, 50.0, 65),
            table_reflectivity: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub crosstalk_weight: f64,
    pub sensitivity_weight: f64,
    pub focus_weight: f64,
    pub radius_min_mm: f64,
    pub radius_max_mm: f64,
    pub thickness_min_mm: f64,
    pub thickness_max_mm: f64,
    pub grid: usize,
    pub sweeps: usize,
    pub sensitivity_depths_mm: Vec<f64>,
    pub sensitivity_reflectivity: f64,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        let s = ObjectiveSpec::default();
        OptimizeSection {
            crosstalk_weight: s.crosstalk_weight,
            sensitivity_weight: s.sensitivity_weight,
            focus_weight: s.focus_weight,
            radius_min_mm: s.radius.0,
            radius_max_mm: s.radius.1,
            thickness_min_mm: s.thickness.0,
            thickness_max_mm: s.thickness.1,
            grid: s.grid,
            sweeps: s.sweeps,
            sensitivity_depths_mm: s.sensitivity_depths,
            sensitivity_reflectivity: s.sensitivity_reflectivity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    /// Ground-truth reflectivity of the probed target.
    pub reflectivity: f64,
    pub force_levels_n: Vec<f64>,
    /// Contact is declared once the range drops this far below the range
    /// read at the moment of contact during calibration.
    pub contact_threshold_mm: f64,
    /// Indenter travel per reading while pressing.
    pub press_step_mm: f64,
    /// Depth samples in the force table, spread over the spring's range.
    pub table_points: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            reflectivity: 0.5,
            force_levels_n: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            contact_threshold_mm: 0.5,
            press_step_mm: 0.1,
            table_points: 51,
        }
    }
}

/// Output paths; `-` writes to standard output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub simulate: PathBuf,
    pub proximity: PathBuf,
    pub force: PathBuf,
    pub diagram: PathBuf,
    pub fit: PathBuf,
    pub force_table: PathBuf,
    pub optimize: PathBuf,
    pub pipeline: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            simulate: "-".into(),
            proximity: "proximity.csv".into(),
            force: "force.csv".into(),
            diagram: "diagram.svg".into(),
            fit: "fit.txt".into(),
            force_table: "force_table.txt".into(),
            optimize: "optimize.csv".into(),
            pipeline: "pipeline.txt".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sensor: SensorSection,
    pub trace: TraceSection,
    pub elastomer: ElastomerSection,
    pub spring: SpringSection,
    pub sweep: SweepSection,
    pub simulate: SimulateSection,
    pub diagram: DiagramSection,
    pub fit: FitSection,
    pub optimize: OptimizeSection,
    pub pipeline: PipelineSection,
    pub output: OutputSection,
}

fn check_reflectivity(name: &str, rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        bail!("{name}: reflectivity {rho} is outside [0, 1]");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| anyhow::anyhow!(e.to_string().lines().collect::<Vec<_>>().join(" ")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.head().validate()?;
        self.spring()?;
        Medium::new(self.elastomer.refractive_index)?;
        Medium::new(self.elastomer.air_index)?;
        for kind in ConfigKind::COVERED {
            self.boundary(kind).expect("covered").validate()?;
        }
        self.trace_settings();
        if self.trace.scatter_rays == 0 {
            bail!("trace.scatter_rays must be at least 1");
        }
        if self.sweep.reflectivities.is_empty() {
            bail!("sweep.reflectivities must not be empty");
        }
        for &rho in &self.sweep.reflectivities {
            check_reflectivity("sweep.reflectivities", rho)?;
        }
        if self.sweep.reflectivities.windows(2).any(|w| !(w[1] > w[0])) {
            bail!("sweep.reflectivities must be strictly increasing");
        }
        self.sweep.distance.validate("sweep.distance")?;
        self.sweep.depth.validate("sweep.depth")?;
        let contact = self.max_thickness();
        if self.sweep.distance.start < contact {
            bail!("sweep.distance must start at or beyond the thickest cover ({contact} mm)");
        }
        if self.sweep.depth.start < 0.0 {
            bail!("sweep.depth must not be negative");
        }
        if self.sweep.depth.stop >= self.min_thickness() {
            bail!("sweep.depth must stay below the thinnest cover");
        }
        check_reflectivity("simulate.reflectivity", self.simulate.reflectivity)?;
        check_reflectivity("diagram.reflectivity", self.diagram.reflectivity)?;
        check_reflectivity("pipeline.reflectivity", self.pipeline.reflectivity)?;
        check_reflectivity("fit.table_reflectivity", self.fit.table_reflectivity)?;
        if self.diagram.emitter_rays < 3 || self.diagram.scatter_rays == 0 {
            bail!("diagram needs at least 3 emitter rays and 1 scatter ray");
        }
        self.fit.distance.validate("fit.distance")?;
        if self.fit.distance.points < 4 {
            bail!("fit.distance needs at least 4 points");
        }
        if let Some(b) = self.boundary(self.fit.config) {
            if self.fit.distance.start < b.thickness {
                bail!("fit.distance must start at or beyond the cover thickness");
            }
        }
        self.objective().validate()?;
        let p = &self.pipeline;
        if p.force_levels_n
            .iter()
            .any(|&f| !(f >= 0.0) || f > self.spring.max_force_n)
        {
            bail!("pipeline.force_levels_n must lie in [0, max force]");
        }
        if !(p.contact_threshold_mm > 0.0) || !(p.press_step_mm > 0.0) {
            bail!("pipeline thresholds and steps must be positive");
        }
        if p.table_points < 2 {
            bail!("pipeline.table_points must be at least 2");
        }
        if self.spring()?.max_depth() >= self.elastomer.thickness_mm {
            bail!("spring range must stay below the cover thickness");
        }
        Ok(())
    }

    pub fn head(&self) -> SensorHead {
        let s = &self.sensor;
        SensorHead {
            emitter: Vec2::ZERO,
            receiver: Vec2::new(s.separation_mm, 0.0),
            half_fov: s.half_fov_deg.to_radians(),
            fan_size: s.emitter_rays,
            aperture_half_width: s.aperture_half_width_mm,
        }
    }

    pub fn trace_settings(&self) -> TraceSettings {
        let t = &self.trace;
        TraceSettings {
            power_floor: t.power_floor,
            bounce_cap: t.bounce_cap,
            scatter_fan: t.scatter_rays,
            scatter: match t.scatter {
                ScatterKind::Stratified => ScatterMode::Stratified,
                ScatterKind::Sampled => ScatterMode::Sampled { seed: t.seed },
            },
        }
    }

    pub fn spring(&self) -> Result<SpringModel> {
        Ok(SpringModel::new(
            self.spring.stiffness_n_per_mm,
            self.spring.max_force_n,
        )?)
    }

    /// Boundary of a covered configuration; `None` for the bare sensor.
    pub fn boundary(&self, kind: ConfigKind) -> Option<BoundaryConfig> {
        let e = &self.elastomer;
        let span_center = 0.5 * self.sensor.separation_mm;
        let (thickness, kind) = match kind {
            ConfigKind::Bare => return None,
            ConfigKind::Flat => (e.thickness_mm, BoundaryKind::Flat),
            ConfigKind::Blocker => (
                e.blocker_thickness_mm,
                BoundaryKind::Blocker {
                    height: e.blocker_height_mm,
                    width: e.blocker_width_mm,
                    center_x: e.blocker_x_mm,
                },
            ),
            ConfigKind::Arc => (
                e.thickness_mm,
                BoundaryKind::Arc {
                    radius: e.arc_radius_mm,
                    axis_x: 0.0,
                },
            ),
        };
        Some(BoundaryConfig {
            kind,
            thickness,
            span_center,
            span_width: e.span_mm,
        })
    }

    fn max_thickness(&self) -> f64 {
        self.elastomer
            .thickness_mm
            .max(self.elastomer.blocker_thickness_mm)
    }

    fn min_thickness(&self) -> f64 {
        self.elastomer
            .thickness_mm
            .min(self.elastomer.blocker_thickness_mm)
    }

    /// Scene for `kind` with no target.
    pub fn scene(&self, kind: ConfigKind) -> Scene {
        let mut scene = Scene::bare(self.head());
        scene.air = Medium {
            refractive_index: self.elastomer.air_index,
        };
        scene.settings = self.trace_settings();
        scene.cover = self.boundary(kind).map(|boundary| Cover {
            boundary,
            indentation: pcf_core::elastomer::Indentation::NONE,
            medium: Medium {
                refractive_index: self.elastomer.refractive_index,
            },
        });
        scene
    }

    pub fn objective(&self) -> ObjectiveSpec {
        let o = &self.optimize;
        ObjectiveSpec {
            crosstalk_weight: o.crosstalk_weight,
            sensitivity_weight: o.sensitivity_weight,
            focus_weight: o.focus_weight,
            radius: (o.radius_min_mm, o.radius_max_mm),
            thickness: (o.thickness_min_mm, o.thickness_max_mm),
            grid: o.grid,
            sweeps: o.sweeps,
            sensitivity_depths: o.sensitivity_depths_mm.clone(),
            sensitivity_reflectivity: o.sensitivity_reflectivity,
        }
    }
}
