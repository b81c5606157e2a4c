//! Search over circular-arc boundaries for low receiver crosstalk and high
//! force-regime sensitivity.
//!
//! The objective is `w_c·(crosstalk + η·spread) − w_s·sensitivity`, where
//! `spread` is the power-weighted RMS distance from the emitter at which
//! boundary reflections land on the sensor plane. Crosstalk alone is exactly
//! zero over a wide band of radii once the reflections miss the receiver, so
//! the spread term (with a small `η`) breaks that plateau toward the focused
//! arc.

use alloc::vec::Vec;

use crate::elastomer::{BoundaryConfig, BoundaryKind, DEFAULT_SPAN};
use crate::math;
use crate::sensor::{simulate, trace_scene, trace_scene_observed, PathSegment, Scene, SegmentEnd};
use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const GOLDEN_ITERATIONS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub crosstalk_weight: f64,
    pub sensitivity_weight: f64,
    /// η, weight of the reflection spread in units of crosstalk per mm.
    pub focus_weight: f64,
    /// Arc radius bounds in millimeters.
    pub radius: (f64, f64),
    /// Thickness bounds in millimeters.
    pub thickness: (f64, f64),
    /// Grid points per free coordinate.
    pub grid: usize,
    /// Golden-section passes over the coordinates after the grid scan.
    pub sweeps: usize,
    /// Indentation depths for the sensitivity proxy, strictly increasing.
    pub sensitivity_depths: Vec<f64>,
    pub sensitivity_reflectivity: f64,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        ObjectiveSpec {
            crosstalk_weight: 1.0,
            sensitivity_weight: 0.0,
            focus_weight: 1e-3,
            radius: (10.0, 30.0),
            thickness: (17.75, 17.75),
            grid: 25,
            sweeps: 3,
            sensitivity_depths: alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0],
            sensitivity_reflectivity: 0.5,
        }
    }
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.crosstalk_weight,
            self.sensitivity_weight,
            self.focus_weight,
        ];
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(
                "objective weights",
                "must be finite and non-negative",
            ));
        }
        if self.crosstalk_weight == 0.0 && self.sensitivity_weight == 0.0 {
            return Err(Error::invalid(
                "objective weights",
                "w_c and w_s cannot both be zero",
            ));
        }
        for (lo, hi) in [self.radius, self.thickness] {
            if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
                return Err(Error::invalid(
                    "parameter box",
                    "bounds must satisfy 0 < min <= max",
                ));
            }
        }
        if self.grid == 0 {
            return Err(Error::invalid("grid", "needs at least one point"));
        }
        if self.sensitivity_weight > 0.0 {
            let depths = &self.sensitivity_depths;
            if depths.len() < 2 || depths.windows(2).any(|w| !(w[1] > w[0])) || !(depths[0] >= 0.0)
            {
                return Err(Error::invalid(
                    "sensitivity depths",
                    "need at least two strictly increasing non-negative depths",
                ));
            }
            if depths[depths.len() - 1] >= self.thickness.0 {
                return Err(Error::invalid(
                    "sensitivity depths",
                    "deepest indentation must stay below the minimum thickness",
                ));
            }
            if !(0.0..=1.0).contains(&self.sensitivity_reflectivity) {
                return Err(Error::invalid("reflectivity", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub radius: f64,
    pub thickness: f64,
    pub crosstalk: f64,
    /// RMS landing distance of boundary reflections from the emitter, mm.
    pub spread: f64,
    /// Mean |ΔI/Δδ| over the depth grid; `None` when not weighted.
    pub sensitivity: Option<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best: Evaluation,
    /// Every evaluation in the order performed.
    pub trace: Vec<Evaluation>,
    /// Incumbent objective after the grid scan and after each sweep.
    pub incumbents: Vec<f64>,
}

impl OptimResult {
    pub fn evaluations(&self) -> usize {
        self.trace.len()
    }
}

/// Arc boundary of the given shape, keeping the template's span and placing
/// the arc axis over the emitter.
pub fn arc_config(template: &Scene, radius: f64, thickness: f64) -> BoundaryConfig {
    let base = template.cover.map_or_else(
        || BoundaryConfig {
            span_width: DEFAULT_SPAN,
            ..BoundaryConfig::flat(thickness)
        },
        |c| c.boundary,
    );
    BoundaryConfig {
        kind: BoundaryKind::Arc {
            radius,
            axis_x: template.head.emitter.x,
        },
        thickness,
        ..base
    }
}

fn with_boundary(template: &Scene, config: BoundaryConfig) -> Scene {
    let medium = template
        .cover
        .map_or(crate::optics::Medium::PDMS, |c| c.medium);
    let mut scene = Scene::covered(template.head, config);
    scene.air = template.air;
    scene.settings = template.settings;
    if let Some(cover) = scene.cover.as_mut() {
        cover.medium = medium;
    }
    scene
}

/// Crosstalk fraction of `config` with no target in front of the sensor.
pub fn crosstalk_objective(config: &BoundaryConfig, template: &Scene) -> Result<f64> {
    let scene = with_boundary(template, *config);
    let result = trace_scene(&scene)?;
    Ok(result
        .records
        .iter()
        .fold(0.0, |acc, r| acc + r.power)
        .clamp(0.0, 1.0))
}

/// Power-weighted RMS distance from the emitter at which light reflected by
/// the boundary returns to the sensor plane, with no target present.
pub fn reflection_spread(config: &BoundaryConfig, template: &Scene) -> Result<f64> {
    let scene = with_boundary(template, *config);
    let emitter = scene.head.emitter.x;
    let mut weight = 0.0;
    let mut moment = 0.0;
    let mut observe = |leg: &PathSegment| {
        if leg.bounce_count > 0 && matches!(leg.end, SegmentEnd::SensorPlane | SegmentEnd::Received)
        {
            let dx = leg.to.x - emitter;
            weight += leg.power;
            moment += leg.power * dx * dx;
        }
    };
    trace_scene_observed(&scene, &mut observe)?;
    Ok(if weight > 0.0 {
        math::sqrt(moment / weight)
    } else {
        0.0
    })
}

/// Mean absolute intensity slope of `config` over the indentation grid.
pub fn force_sensitivity(
    config: &BoundaryConfig,
    template: &Scene,
    depths: &[f64],
    reflectivity: f64,
) -> Result<f64> {
    let scene = with_boundary(template, *config);
    let mut intensities = Vec::with_capacity(depths.len());
    for &depth in depths {
        intensities.push(simulate(&scene.pressed(depth, reflectivity)?)?.intensity);
    }
    let slopes = depths
        .windows(2)
        .zip(intensities.windows(2))
        .map(|(d, i)| ((i[1] - i[0]) / (d[1] - d[0])).abs());
    Ok(slopes.sum::<f64>() / (depths.len() - 1) as f64)
}

/// Evaluates the composite objective at one arc shape.
pub fn evaluate_arc(
    spec: &ObjectiveSpec,
    template: &Scene,
    radius: f64,
    thickness: f64,
) -> Result<Evaluation> {
    let config = arc_config(template, radius, thickness);
    config.validate()?;
    let crosstalk = crosstalk_objective(&config, template)?;
    let spread = if spec.focus_weight > 0.0 && spec.crosstalk_weight > 0.0 {
        reflection_spread(&config, template)?
    } else {
        0.0
    };
    let sensitivity = if spec.sensitivity_weight > 0.0 {
        Some(force_sensitivity(
            &config,
            template,
            &spec.sensitivity_depths,
            spec.sensitivity_reflectivity,
        )?)
    } else {
        None
    };
    let objective = spec.crosstalk_weight * (crosstalk + spec.focus_weight * spread)
        - spec.sensitivity_weight * sensitivity.unwrap_or(0.0);
    Ok(Evaluation {
        radius,
        thickness,
        crosstalk,
        spread,
        sensitivity,
        objective,
    })
}

fn axis(bounds: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = bounds;
    if lo == hi || n == 1 {
        return alloc::vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// `a` beats `b`: lower objective, ties going to the smaller radius and then
/// the smaller thickness.
fn better(a: &Evaluation, b: &Evaluation) -> bool {
    (a.objective, a.radius, a.thickness) < (b.objective, b.radius, b.thickness)
}

/// Grid scan plus coordinate-wise golden-section refinement, evaluating
/// points through `evaluate`, which receives batches of `(radius, thickness)`
/// and must return one evaluation per point in order.
pub fn optimize_arc_with<F>(spec: &ObjectiveSpec, mut evaluate: F) -> Result<OptimResult>
where
    F: FnMut(&[(f64, f64)]) -> Result<Vec<Evaluation>>,
{
    spec.validate()?;
    let radii = axis(spec.radius, spec.grid);
    let thicknesses = axis(spec.thickness, spec.grid);
    let mut points = Vec::with_capacity(radii.len() * thicknesses.len());
    for &t in &thicknesses {
        for &r in &radii {
            points.push((r, t));
        }
    }
    let mut trace = evaluate(&points)?;
    if trace.len() != points.len() {
        return Err(Error::invalid(
            "evaluator",
            "must return one evaluation per point",
        ));
    }
    let mut best = trace[0];
    for e in &trace[1..] {
        if better(e, &best) {
            best = *e;
        }
    }
    let mut incumbents = alloc::vec![best.objective];

    let steps = [
        step(spec.radius, radii.len()),
        step(spec.thickness, thicknesses.len()),
    ];
    for _ in 0..spec.sweeps {
        for (coordinate, &h) in steps.iter().enumerate() {
            let Some(h) = h else { continue };
            let bounds = if coordinate == 0 {
                spec.radius
            } else {
                spec.thickness
            };
            let centre = if coordinate == 0 {
                best.radius
            } else {
                best.thickness
            };
            let lo = (centre - h).max(bounds.0);
            let hi = (centre + h).min(bounds.1);
            let fixed = best;
            let mut probe = |x: f64| -> Result<Evaluation> {
                let point = if coordinate == 0 {
                    (x, fixed.thickness)
                } else {
                    (fixed.radius, x)
                };
                let e = evaluate(&[point])?
                    .pop()
                    .ok_or(Error::invalid("evaluator", "returned nothing"))?;
                trace.push(e);
                Ok(e)
            };
            let found = golden_section(lo, hi, &mut probe)?;
            if better(&found, &best) {
                best = found;
            }
        }
        incumbents.push(best.objective);
    }
    Ok(OptimResult {
        best,
        trace,
        incumbents,
    })
}

fn step(bounds: (f64, f64), n: usize) -> Option<f64> {
    (n > 1 && bounds.1 > bounds.0).then(|| (bounds.1 - bounds.0) / (n - 1) as f64)
}

/// Golden-section search on `[lo, hi]`, returning the best point probed.
/// Ties keep the lower sub-interval.
fn golden_section(
    mut lo: f64,
    mut hi: f64,
    probe: &mut dyn FnMut(f64) -> Result<Evaluation>,
) -> Result<Evaluation> {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = probe(c)?;
    let mut fd = probe(d)?;
    let mut best = if better(&fd, &fc) { fd } else { fc };
    for _ in 0..GOLDEN_ITERATIONS {
        if fc.objective <= fd.objective {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = probe(c)?;
            if better(&fc, &best) {
                best = fc;
            }
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = probe(d)?;
            if better(&fd, &best) {
                best = fd;
            }
        }
    }
    Ok(best)
}

/// [`optimize_arc_with`] evaluating sequentially against `template`.
pub fn optimize_arc(spec: &ObjectiveSpec, template: &Scene) -> Result<OptimResult> {
    optimize_arc_with(spec, |points| {
        points
            .iter()
            .map(|&(r, t)| evaluate_arc(spec, template, r, t))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::SensorHead;

    fn template() -> Scene {
        Scene::bare(SensorHead::default())
    }

    #[test]
    fn single_point_box_takes_one_evaluation() {
        let spec = ObjectiveSpec {
            radius: (17.75, 17.75),
            ..ObjectiveSpec::default()
        };
        let result = optimize_arc(&spec, &template()).unwrap();
        assert_eq!(result.evaluations(), 1);
        assert_eq!(result.best.radius, 17.75);
        assert_eq!(result.best.thickness, 17.75);
    }

    #[test]
    fn focused_arc_has_no_crosstalk_and_no_spread() {
        let config = BoundaryConfig::focused_arc(17.75);
        assert!(crosstalk_objective(&config, &template()).unwrap() < 1e-3);
        assert!(reflection_spread(&config, &template()).unwrap() < 1e-9);
        let flat = BoundaryConfig::flat(17.75);
        assert!(
            crosstalk_objective(&flat, &template()).unwrap()
                > crosstalk_objective(&config, &template()).unwrap()
        );
    }

    #[test]
    fn objective_is_bit_reproducible() {
        let spec = ObjectiveSpec::default();
        let a = evaluate_arc(&spec, &template(), 14.0, 17.75).unwrap();
        let b = evaluate_arc(&spec, &template(), 14.0, 17.75).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn spec_validation() {
        let spec = ObjectiveSpec {
            crosstalk_weight: 0.0,
            ..ObjectiveSpec::default()
        };
        assert!(spec.validate().is_err());
        let spec = ObjectiveSpec {
            radius: (20.0, 10.0),
            ..ObjectiveSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn golden_section_finds_a_parabola_minimum() {
        let mut probe = |x: f64| {
            Ok(Evaluation {
                radius: x,
                thickness: 1.0,
                crosstalk: 0.0,
                spread: 0.0,
                sensitivity: None,
                objective: (x - 2.3) * (x - 2.3),
            })
        };
        let best = golden_section(0.0, 5.0, &mut probe).unwrap();
        assert!((best.radius - 2.3).abs() < 1e-6);
    }
}
