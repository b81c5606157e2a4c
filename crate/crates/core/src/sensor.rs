//! Sensor forward model.
//!
//! A fan of rays leaves the emitter, is split at every elastomer-air
//! interface into Fresnel-weighted reflected and refracted branches, scatters
//! once off a Lambertian target and is collected by the receiver aperture.
//! The collected photon records are reduced to the two outputs of a
//! time-of-flight ranging module: a range from the power-weighted mean
//! optical path and an intensity from the received power fraction.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::elastomer::{build_boundary, BoundaryConfig, Indentation, SurfaceClass};
use crate::geometry::{Curve, Hit, Point2, Vec2, HIT_EPSILON};
use crate::math;
use crate::optics::{
    fresnel_unpolarized, lambertian_scatter_phased, lambertian_scatter_sampled, reflect, refract,
    Medium, Ray2, ScatterSite,
};
use crate::{Error, Result};

/// Length of the stub drawn for rays that leave the scene.
pub const ESCAPE_LENGTH: f64 = 60.0;

const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorHead {
    pub emitter: Point2,
    pub receiver: Point2,
    /// Half field-of-view in radians, shared by emission and reception and
    /// specified in air.
    pub half_fov: f64,
    /// Number of rays in the emitter fan. At the default, doubling it moves
    /// intensity by under 1%.
    pub fan_size: usize,
    pub aperture_half_width: f64,
}

impl Default for SensorHead {
    fn default() -> Self {
        SensorHead {
            emitter: Vec2::ZERO,
            receiver: Vec2::new(crate::elastomer::DEFAULT_SEPARATION, 0.0),
            half_fov: 12.5 * PI / 180.0,
            fan_size: 362,
            aperture_half_width: 0.5,
        }
    }
}

impl SensorHead {
    pub fn validate(&self) -> Result<()> {
        if !(self.separation() > 0.0) {
            return Err(Error::invalid(
                "sensor head",
                "emitter and receiver coincide",
            ));
        }
        if self.emitter.y != 0.0 || self.receiver.y != 0.0 {
            return Err(Error::invalid(
                "sensor head",
                "emitter and receiver must lie on y = 0",
            ));
        }
        if !(self.half_fov > 0.0 && self.half_fov < 0.5 * PI) {
            return Err(Error::invalid("half field of view", "must lie in (0, π/2)"));
        }
        if self.fan_size < 3 {
            return Err(Error::invalid("emitter fan size", "must be at least 3"));
        }
        if !(self.aperture_half_width > 0.0) {
            return Err(Error::invalid("aperture half width", "must be positive"));
        }
        Ok(())
    }

    pub fn separation(&self) -> f64 {
        self.emitter.distance(self.receiver)
    }

    /// Half-angle of the emission and acceptance cones once the head is
    /// embedded in a medium of the given index.
    pub fn half_fov_in(&self, medium: Medium) -> f64 {
        math::asin(math::sin(self.half_fov) / medium.refractive_index)
    }

    /// The same head with its cones refracted into `medium`.
    pub fn in_medium(&self, medium: Medium) -> SensorHead {
        SensorHead {
            half_fov: self.half_fov_in(medium),
            ..*self
        }
    }
}

/// Emitter fan: `N` rays stratified endpoint-inclusively over `[-θ, +θ]`
/// about `+y`, each with power `1/N`.
pub fn emit_fan(head: &SensorHead) -> Vec<Ray2> {
    let n = head.fan_size;
    let power = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let a = if n == 1 {
                0.0
            } else {
                -head.half_fov + 2.0 * head.half_fov * i as f64 / (n - 1) as f64
            };
            Ray2::new(head.emitter, Vec2::new(math::sin(a), math::cos(a)), power)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Height of the target plane above the sensor plane, in millimeters.
    pub distance: f64,
    /// Lambertian reflectivity in `[0, 1]`.
    pub reflectivity: f64,
}

/// Elastomer covering the sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cover {
    pub boundary: BoundaryConfig,
    pub indentation: Indentation,
    pub medium: Medium,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterMode {
    /// Equal-power strata; successive target hits rotate the stratum phase by
    /// the golden fraction so the fans interleave.
    Stratified,
    /// Seeded Monte Carlo cosine sampling.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSettings {
    /// Branches attenuated below this fraction of their quadrature weight are
    /// dropped. The weight is the power the branch would carry had every
    /// interface transmitted or reflected losslessly, so which paths survive
    /// does not depend on the fan sizes or the reflectivity.
    pub power_floor: f64,
    pub bounce_cap: u32,
    /// Rays per Lambertian scatter event. Each received ray carries a fixed
    /// share of the scattered power, so this sets the intensity resolution.
    pub scatter_fan: usize,
    pub scatter: ScatterMode,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            power_floor: 1e-6,
            bounce_cap: 8,
            scatter_fan: 513,
            scatter: ScatterMode::Stratified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    pub head: SensorHead,
    pub cover: Option<Cover>,
    pub air: Medium,
    pub target: Option<Target>,
    pub settings: TraceSettings,
}

impl Scene {
    /// Sensor without elastomer.
    pub fn bare(head: SensorHead) -> Self {
        Scene {
            head,
            cover: None,
            air: Medium::AIR,
            target: None,
            settings: TraceSettings::default(),
        }
    }

    /// Sensor under an undeformed PDMS cover.
    pub fn covered(head: SensorHead, boundary: BoundaryConfig) -> Self {
        Scene {
            cover: Some(Cover {
                boundary,
                indentation: Indentation::NONE,
                medium: Medium::PDMS,
            }),
            ..Scene::bare(head)
        }
    }

    /// Target plane at `distance` with no indentation.
    pub fn with_target(mut self, distance: f64, reflectivity: f64) -> Self {
        if let Some(cover) = self.cover.as_mut() {
            cover.indentation = Indentation::NONE;
        }
        self.target = Some(Target {
            distance,
            reflectivity,
        });
        self
    }

    /// Target pressed `depth` millimeters into the cover.
    pub fn pressed(mut self, depth: f64, reflectivity: f64) -> Result<Self> {
        let cover = self
            .cover
            .as_mut()
            .ok_or(Error::InvalidScene("a bare sensor cannot be indented"))?;
        cover.indentation = Indentation::new(depth)?;
        if depth >= cover.boundary.thickness {
            return Err(Error::IndentationTooDeep {
                depth,
                limit: cover.boundary.thickness,
            });
        }
        self.target = Some(Target {
            distance: cover.boundary.thickness - depth,
            reflectivity,
        });
        Ok(self)
    }

    pub fn without_target(mut self) -> Self {
        if let Some(cover) = self.cover.as_mut() {
            cover.indentation = Indentation::NONE;
        }
        self.target = None;
        self
    }

    /// Medium the sensor head looks into.
    pub fn sensor_medium(&self) -> Medium {
        self.cover.map_or(self.air, |c| c.medium)
    }

    pub fn validate(&self) -> Result<()> {
        self.head.validate()?;
        Medium::new(self.air.refractive_index)?;
        if self.settings.scatter_fan == 0 {
            return Err(Error::invalid("scatter fan size", "must be at least 1"));
        }
        if let Some(t) = self.target {
            if !(t.distance > 0.0) || !t.distance.is_finite() {
                return Err(Error::invalid("target distance", "must be positive"));
            }
            if !(0.0..=1.0).contains(&t.reflectivity) {
                return Err(Error::invalid("reflectivity", "must lie in [0, 1]"));
            }
        }
        if let Some(cover) = self.cover {
            Medium::new(cover.medium.refractive_index)?;
            cover.boundary.validate()?;
            let depth = cover.indentation.depth;
            let apex = cover.boundary.thickness - depth;
            match self.target {
                Some(t) if depth > 0.0 && (t.distance - apex).abs() > 1e-9 => {
                    return Err(Error::InvalidScene(
                        "an indented cover needs the target at thickness - depth",
                    ))
                }
                None if depth > 0.0 => {
                    return Err(Error::InvalidScene("indentation requires a target"))
                }
                Some(t) if t.distance < apex - 1e-9 => {
                    return Err(Error::InvalidScene("target lies inside the elastomer"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonTag {
    /// Reached the receiver without touching the target.
    BoundaryCrosstalk,
    TargetReturn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonRecord {
    pub power: f64,
    pub optical_path: f64,
    pub bounce_count: u32,
    pub tag: PhotonTag,
}

/// Where the emitted power ended up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBudget {
    pub received: f64,
    pub absorbed: f64,
    pub escaped: f64,
    /// Power held by branches cut by the power floor or bounce cap.
    pub terminated: f64,
}

impl PowerBudget {
    pub fn total(&self) -> f64 {
        self.received + self.absorbed + self.escaped + self.terminated
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub records: Vec<PhotonRecord>,
    pub budget: PowerBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentEnd {
    Interface,
    Target,
    Absorbed,
    Received,
    /// Hit the sensor plane outside the receiver or its acceptance cone.
    SensorPlane,
    Escaped,
    Terminated,
}

/// One straight leg of a traced branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub from: Point2,
    pub to: Point2,
    pub power: f64,
    pub bounce_count: u32,
    pub inside_elastomer: bool,
    pub scattered: bool,
    pub end: SegmentEnd,
}

/// Receives every leg of every branch in trace order.
pub trait TraceObserver {
    fn segment(&mut self, segment: &PathSegment);
}

impl<F: FnMut(&PathSegment)> TraceObserver for F {
    fn segment(&mut self, segment: &PathSegment) {
        self(segment)
    }
}

struct NoObserver;

impl TraceObserver for NoObserver {
    fn segment(&mut self, _: &PathSegment) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Interface,
    Absorber,
    /// Flat cap pressed against the target.
    Contact,
}

struct Surface {
    curve: Curve,
    role: Role,
}

/// Scene geometry resolved into surfaces the tracer can query.
struct World {
    surfaces: Vec<Surface>,
    inside_index: f64,
    outside_index: f64,
    target: Option<Target>,
    receiver: Point2,
    aperture: f64,
    accept_cos: f64,
}

impl World {
    fn new(scene: &Scene) -> Result<Self> {
        scene.validate()?;
        let mut surfaces = Vec::new();
        if let Some(cover) = scene.cover {
            let boundary = build_boundary(&cover.boundary, cover.indentation)?;
            for piece in &boundary.pieces {
                let role = match piece.class {
                    SurfaceClass::Blocker => Role::Absorber,
                    SurfaceClass::Interface => match (piece.curve, scene.target) {
                        (Curve::Segment(s), Some(t))
                            if (s.a.y - t.distance).abs() <= 1e-9
                                && (s.b.y - t.distance).abs() <= 1e-9 =>
                        {
                            Role::Contact
                        }
                        _ => Role::Interface,
                    },
                };
                surfaces.push(Surface {
                    curve: piece.curve,
                    role,
                });
            }
            // Case walls close the elastomer at both ends of the span.
            let (left, right) = boundary.interface_ends();
            for end in [left, right] {
                if end.y > 0.0 {
                    surfaces.push(Surface {
                        curve: Curve::Segment(crate::geometry::Segment2::new(
                            Vec2::new(end.x, 0.0),
                            end,
                        )?),
                        role: Role::Absorber,
                    });
                }
            }
        }
        let medium = scene.sensor_medium();
        Ok(World {
            surfaces,
            inside_index: medium.refractive_index,
            outside_index: scene.air.refractive_index,
            target: scene.target,
            receiver: scene.head.receiver,
            aperture: scene.head.aperture_half_width,
            accept_cos: math::cos(scene.head.half_fov_in(medium)),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    ray: Ray2,
    /// Quadrature weight of the path: the emitted ray's power, times the
    /// scatter fan share after a target hit.
    weight: f64,
    inside: bool,
    scattered: bool,
}

enum Event {
    Surface(Hit, Role),
    SensorPlane(Point2),
    TargetPlane(Point2),
}

fn next_event(world: &World, branch: &Branch) -> Option<(f64, Event)> {
    let ray = &branch.ray;
    let mut best: Option<(f64, Event)> = None;
    let mut consider = |t: f64, event: Event| {
        if t > HIT_EPSILON && best.as_ref().is_none_or(|(bt, _)| t < *bt) {
            best = Some((t, event));
        }
    };
    for surface in &world.surfaces {
        if surface.role == Role::Contact && !branch.inside {
            continue;
        }
        if let Some(hit) = surface.curve.intersect(ray) {
            consider(hit.t, Event::Surface(hit, surface.role));
        }
    }
    if ray.direction.y < 0.0 {
        let t = -ray.origin.y / ray.direction.y;
        consider(t, Event::SensorPlane(ray.at(t)));
    }
    if let Some(target) = world.target {
        if !branch.inside && ray.direction.y > 0.0 && ray.origin.y < target.distance {
            let t = (target.distance - ray.origin.y) / ray.direction.y;
            consider(t, Event::TargetPlane(ray.at(t)));
        }
    }
    best
}

/// Traces `rays` (all starting on the sensor side of the cover) through the
/// scene and returns the receiver records plus the power budget.
pub fn trace(scene: &Scene, rays: &[Ray2]) -> Result<TraceResult> {
    trace_observed(scene, rays, &mut NoObserver)
}

pub fn trace_observed(
    scene: &Scene,
    rays: &[Ray2],
    observer: &mut dyn TraceObserver,
) -> Result<TraceResult> {
    let world = World::new(scene)?;
    let settings = scene.settings;
    let reflectivity = scene.target.map_or(0.0, |t| t.reflectivity);
    let mut rng = match settings.scatter {
        ScatterMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        ScatterMode::Stratified => None,
    };
    let mut scatter_events = 0usize;
    let mut records = Vec::new();
    let mut budget = PowerBudget::default();
    let mut stack: Vec<Branch> = Vec::new();

    for ray in rays {
        stack.push(Branch {
            ray: *ray,
            weight: ray.power,
            inside: scene.cover.is_some(),
            scattered: false,
        });
        while let Some(branch) = stack.pop() {
            let ray = branch.ray;
            if ray.power < settings.power_floor * branch.weight
                || ray.bounce_count > settings.bounce_cap
            {
                budget.terminated += ray.power;
                observer.segment(&PathSegment {
                    from: ray.origin,
                    to: ray.origin,
                    power: ray.power,
                    bounce_count: ray.bounce_count,
                    inside_elastomer: branch.inside,
                    scattered: branch.scattered,
                    end: SegmentEnd::Terminated,
                });
                continue;
            }
            let index = if branch.inside {
                world.inside_index
            } else {
                world.outside_index
            };
            let Some((t, event)) = next_event(&world, &branch) else {
                budget.escaped += ray.power;
                observer.segment(&PathSegment {
                    from: ray.origin,
                    to: ray.at(ESCAPE_LENGTH),
                    power: ray.power,
                    bounce_count: ray.bounce_count,
                    inside_elastomer: branch.inside,
                    scattered: branch.scattered,
                    end: SegmentEnd::Escaped,
                });
                continue;
            };
            let path = ray.optical_path + index * t;
            let bounces = ray.bounce_count + 1;
            let child = |origin: Point2,
                         direction: Vec2,
                         power: f64,
                         weight: f64,
                         inside: bool,
                         scattered| {
                Branch {
                    weight,
                    ray: Ray2 {
                        origin,
                        direction,
                        power,
                        optical_path: path,
                        bounce_count: bounces,
                    },
                    inside,
                    scattered,
                }
            };
            let mut leg = PathSegment {
                from: ray.origin,
                to: ray.at(t),
                power: ray.power,
                bounce_count: ray.bounce_count,
                inside_elastomer: branch.inside,
                scattered: branch.scattered,
                end: SegmentEnd::Absorbed,
            };
            let mut scatter_site = None;

            match event {
                Event::SensorPlane(point) => {
                    let in_aperture = (point.x - world.receiver.x).abs() <= world.aperture;
                    if in_aperture && -ray.direction.y >= world.accept_cos {
                        budget.received += ray.power;
                        records.push(PhotonRecord {
                            power: ray.power,
                            optical_path: path,
                            bounce_count: ray.bounce_count,
                            tag: if branch.scattered {
                                PhotonTag::TargetReturn
                            } else {
                                PhotonTag::BoundaryCrosstalk
                            },
                        });
                        leg.end = SegmentEnd::Received;
                    } else {
                        budget.absorbed += ray.power;
                        leg.end = SegmentEnd::SensorPlane;
                    }
                }
                Event::Surface(_, Role::Absorber) => {
                    budget.absorbed += ray.power;
                }
                Event::Surface(hit, Role::Interface) => {
                    leg.end = SegmentEnd::Interface;
                    let (n1, n2) = if branch.inside {
                        (world.inside_index, world.outside_index)
                    } else {
                        (world.outside_index, world.inside_index)
                    };
                    let cos_i = -ray.direction.dot(hit.normal);
                    let (r, tr) = fresnel_unpolarized(cos_i, n1, n2);
                    let transmitted = if tr > 0.0 {
                        refract(ray.direction, hit.normal, n1, n2)
                    } else {
                        None
                    };
                    let (r, tr) = if transmitted.is_some() {
                        (r, tr)
                    } else {
                        (1.0, 0.0)
                    };
                    if let Some(dir) = transmitted {
                        stack.push(child(
                            hit.point,
                            dir,
                            ray.power * tr,
                            branch.weight,
                            !branch.inside,
                            branch.scattered,
                        ));
                    }
                    if r > 0.0 {
                        stack.push(child(
                            hit.point,
                            reflect(ray.direction, hit.normal),
                            ray.power * r,
                            branch.weight,
                            branch.inside,
                            branch.scattered,
                        ));
                    }
                }
                Event::Surface(Hit { point, normal, .. }, Role::Contact) => {
                    scatter_site = Some((point, normal));
                }
                Event::TargetPlane(point) => {
                    scatter_site = Some((point, Vec2::new(0.0, -1.0)));
                }
            }

            if let Some((point, normal)) = scatter_site {
                leg.end = SegmentEnd::Target;
                if branch.scattered {
                    // Single-scatter model: a second target hit is absorbed.
                    budget.absorbed += ray.power;
                } else {
                    let site = ScatterSite {
                        point,
                        normal,
                        power: ray.power,
                    };
                    let fan = match rng.as_mut() {
                        Some(rng) => lambertian_scatter_sampled(
                            &site,
                            reflectivity,
                            settings.scatter_fan,
                            rng,
                        ),
                        None => {
                            let phase = math::fract(0.5 + scatter_events as f64 * GOLDEN_FRACTION);
                            lambertian_scatter_phased(
                                &site,
                                reflectivity,
                                settings.scatter_fan,
                                phase,
                            )
                        }
                    };
                    scatter_events += 1;
                    let scattered: f64 = fan.iter().map(|r| r.power).sum();
                    budget.absorbed += ray.power - scattered;
                    for r in fan.into_iter().rev() {
                        let weight = branch.weight * r.power / ray.power;
                        stack.push(child(
                            r.origin,
                            r.direction,
                            r.power,
                            weight,
                            branch.inside,
                            true,
                        ));
                    }
                }
            }
            observer.segment(&leg);
        }
    }
    Ok(TraceResult { records, budget })
}

/// Synthesized sensor output.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    /// Range estimate in millimeters; `None` when nothing reached the
    /// receiver.
    pub range: Option<f64>,
    /// Received fraction of emitted power.
    pub intensity: f64,
    /// Received power that never touched the target.
    pub crosstalk: f64,
    pub records: Vec<PhotonRecord>,
}

impl Reading {
    /// Received power that came back from the target.
    pub fn signal(&self) -> f64 {
        self.intensity - self.crosstalk
    }

    /// Target return over boundary crosstalk; infinite without crosstalk.
    pub fn signal_to_noise(&self) -> f64 {
        if self.crosstalk > 0.0 {
            self.signal() / self.crosstalk
        } else {
            f64::INFINITY
        }
    }
}

/// Reduces photon records to a reading, assuming unit emitted power.
///
/// The range is half the power-weighted mean optical path over all records,
/// crosstalk included.
pub fn synthesize_reading(records: Vec<PhotonRecord>) -> Reading {
    let mut intensity = 0.0;
    let mut crosstalk = 0.0;
    let mut weighted_path = 0.0;
    for r in &records {
        intensity += r.power;
        weighted_path += r.power * r.optical_path;
        if r.tag == PhotonTag::BoundaryCrosstalk {
            crosstalk += r.power;
        }
    }
    let range = (intensity > 0.0).then(|| weighted_path / (2.0 * intensity));
    Reading {
        range,
        intensity: intensity.clamp(0.0, 1.0),
        crosstalk: crosstalk.clamp(0.0, 1.0),
        records,
    }
}

/// Emits the default fan for `scene` (cones refracted into the medium that
/// covers the head) and traces it.
pub fn trace_scene(scene: &Scene) -> Result<TraceResult> {
    trace_scene_observed(scene, &mut NoObserver)
}

pub fn trace_scene_observed(
    scene: &Scene,
    observer: &mut dyn TraceObserver,
) -> Result<TraceResult> {
    let head = scene.head.in_medium(scene.sensor_medium());
    trace_observed(scene, &emit_fan(&head), observer)
}

/// One complete sensor reading of `scene`.
pub fn simulate(scene: &Scene) -> Result<Reading> {
    Ok(synthesize_reading(trace_scene(scene)?.records))
}

/// Closed-form viewing area used by the intensity law, `(s/2)·√(4r² − s²)`.
///
/// Returns 0 once the cones no longer overlap (`s >= 2r`).
pub fn analytic_view_area(separation: f64, radius: f64) -> Result<f64> {
    if !(separation > 0.0) {
        return Err(Error::invalid("separation", "must be positive"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("cone radius", "must be positive"));
    }
    if separation >= 2.0 * radius {
        return Ok(0.0);
    }
    Ok(0.5 * separation * math::sqrt(4.0 * radius * radius - separation * separation))
}

/// Exact area of the lens where two discs of radius `r` with centers `s`
/// apart overlap.
pub fn disc_overlap_area(separation: f64, radius: f64) -> f64 {
    if separation >= 2.0 * radius {
        return 0.0;
    }
    let s = separation.max(0.0);
    2.0 * radius * radius * libm::acos(s / (2.0 * radius))
        - 0.5 * s * math::sqrt(4.0 * radius * radius - s * s)
}

/// Parameters of the intensity law `I(d) = κ·√(d² − ζ²)/d² + χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityParams {
    /// κ, dimensionless gain.
    pub gain: f64,
    /// ζ in millimeters.
    pub offset: f64,
    /// χ, dimensionless floor.
    pub floor: f64,
}

impl IntensityParams {
    pub fn new(gain: f64, offset: f64, floor: f64) -> Self {
        IntensityParams {
            gain,
            offset,
            floor,
        }
    }

    /// Evaluates the law; the radicand is clamped at zero so `d <= ζ`
    /// yields the floor.
    pub fn eval(&self, distance: f64) -> f64 {
        let radicand = distance * distance - self.offset * self.offset;
        if radicand <= 0.0 {
            return self.floor;
        }
        self.gain * math::sqrt(radicand) / (distance * distance) + self.floor
    }

    /// Partial derivatives with respect to `(κ, ζ, χ)`; the ζ-column is zero
    /// where the radicand is clamped.
    pub fn gradient(&self, distance: f64) -> [f64; 3] {
        let d2 = distance * distance;
        let radicand = d2 - self.offset * self.offset;
        if radicand <= 0.0 {
            return [0.0, 0.0, 1.0];
        }
        let root = math::sqrt(radicand);
        [root / d2, -self.gain * self.offset / (d2 * root), 1.0]
    }

    /// Distance of the intensity peak, `ζ·√2`.
    pub fn peak_distance(&self) -> f64 {
        self.offset.abs() * core::f64::consts::SQRT_2
    }
}

pub fn analytic_intensity(distance: f64, params: &IntensityParams) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::invalid("distance", "must be positive"));
    }
    Ok(params.eval(distance))
}
