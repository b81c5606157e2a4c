//! Elastomer cover geometry: the flat, blocker and circular-arc boundaries,
//! flat-indenter deformation and the linear spring force model.

use alloc::vec::Vec;

use crate::geometry::{Arc2, Curve, Point2, Segment2, Vec2};
use crate::math;
use crate::{Error, Result};

/// Thickness the flat and arc covers are molded at, in millimeters.
pub const DEFAULT_THICKNESS: f64 = 17.75;
/// Thickness of the blocker cover, raised so light still clears the wall.
pub const BLOCKER_THICKNESS: f64 = 23.5;
/// Lateral extent of the cover.
pub const DEFAULT_SPAN: f64 = 12.0;
/// Clearance between the blocker wall top and the undeformed boundary.
pub const BLOCKER_CLEARANCE: f64 = 6.0;
pub const DEFAULT_BLOCKER_WIDTH: f64 = 1.0;
/// Default emitter-receiver separation; the span and blocker are centered
/// halfway between them.
pub const DEFAULT_SEPARATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Flat,
    /// Flat boundary plus an opaque wall standing on the sensor plane.
    Blocker {
        height: f64,
        width: f64,
        center_x: f64,
    },
    /// Circular arc whose apex sits at the cover thickness above `axis_x`.
    Arc {
        radius: f64,
        axis_x: f64,
    },
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryKind::Flat => "flat",
            BoundaryKind::Blocker { .. } => "blocker",
            BoundaryKind::Arc { .. } => "arc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConfig {
    pub kind: BoundaryKind,
    /// Sensor plane to undeformed boundary apex, in millimeters.
    pub thickness: f64,
    pub span_center: f64,
    pub span_width: f64,
}

impl BoundaryConfig {
    pub fn flat(thickness: f64) -> Self {
        BoundaryConfig {
            kind: BoundaryKind::Flat,
            thickness,
            span_center: DEFAULT_SEPARATION / 2.0,
            span_width: DEFAULT_SPAN,
        }
    }

    pub fn blocker(thickness: f64) -> Self {
        BoundaryConfig {
            kind: BoundaryKind::Blocker {
                height: thickness - BLOCKER_CLEARANCE,
                width: DEFAULT_BLOCKER_WIDTH,
                center_x: DEFAULT_SEPARATION / 2.0,
            },
            ..Self::flat(thickness)
        }
    }

    /// Arc centered over the emitter at the origin.
    pub fn arc(thickness: f64, radius: f64) -> Self {
        BoundaryConfig {
            kind: BoundaryKind::Arc {
                radius,
                axis_x: 0.0,
            },
            ..Self::flat(thickness)
        }
    }

    /// Arc with the emitter at its center of curvature.
    pub fn focused_arc(thickness: f64) -> Self {
        Self::arc(thickness, thickness)
    }

    pub fn span(&self) -> (f64, f64) {
        let half = 0.5 * self.span_width;
        (self.span_center - half, self.span_center + half)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.thickness > 0.0) || !self.thickness.is_finite() {
            return Err(Error::invalid("thickness", "must be positive"));
        }
        if !(self.span_width > 0.0) || !self.span_width.is_finite() {
            return Err(Error::invalid("span width", "must be positive"));
        }
        match self.kind {
            BoundaryKind::Flat => {}
            BoundaryKind::Blocker { height, width, .. } => {
                if !(height > 0.0) || height >= self.thickness {
                    return Err(Error::invalid(
                        "blocker height",
                        "must be positive and below the thickness",
                    ));
                }
                if !(width >= 0.0) {
                    return Err(Error::invalid("blocker width", "must be non-negative"));
                }
            }
            BoundaryKind::Arc { radius, axis_x } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(Error::invalid("arc radius", "must be positive"));
                }
                let (x0, x1) = self.span();
                if radius <= (x0 - axis_x).abs().max((x1 - axis_x).abs()) {
                    return Err(Error::invalid(
                        "arc radius",
                        "must exceed the lateral reach of the span",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Indentation by a rigid flat plane parallel to the sensor plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Indentation {
    pub depth: f64,
}

impl Indentation {
    pub const NONE: Indentation = Indentation { depth: 0.0 };

    pub fn new(depth: f64) -> Result<Self> {
        if !(depth >= 0.0) || !depth.is_finite() {
            return Err(Error::invalid("indentation depth", "must be non-negative"));
        }
        Ok(Indentation { depth })
    }
}

/// What a boundary piece does to light.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceClass {
    /// Elastomer-air interface.
    Interface,
    /// Opaque absorber.
    Blocker,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPiece {
    pub curve: Curve,
    pub class: SurfaceClass,
}

/// Constructed cover boundary.
///
/// Interface pieces come first, ordered left to right with neighbours sharing
/// an endpoint (arcs keep their own counter-clockwise orientation); blocker
/// pieces follow.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub pieces: Vec<BoundaryPiece>,
    pub apex_height: f64,
}

impl Boundary {
    pub fn interface(&self) -> impl Iterator<Item = &Curve> {
        self.pieces
            .iter()
            .filter(|p| p.class == SurfaceClass::Interface)
            .map(|p| &p.curve)
    }

    /// Left and right ends of the interface curve.
    pub fn interface_ends(&self) -> (Point2, Point2) {
        let mut left = Vec2::new(f64::INFINITY, 0.0);
        let mut right = Vec2::new(f64::NEG_INFINITY, 0.0);
        for curve in self.interface() {
            let (a, b) = curve.endpoints();
            for p in [a, b] {
                if p.x < left.x {
                    left = p;
                }
                if p.x > right.x {
                    right = p;
                }
            }
        }
        (left, right)
    }
}

pub fn build_boundary(config: &BoundaryConfig, indentation: Indentation) -> Result<Boundary> {
    config.validate()?;
    let depth = indentation.depth;
    if !(depth >= 0.0) {
        return Err(Error::invalid("indentation depth", "must be non-negative"));
    }
    if depth >= config.thickness {
        return Err(Error::IndentationTooDeep {
            depth,
            limit: config.thickness,
        });
    }
    let (x0, x1) = config.span();
    let cap = config.thickness - depth;
    let mut pieces = Vec::new();
    let mut interface = |curve: Curve| {
        pieces.push(BoundaryPiece {
            curve,
            class: SurfaceClass::Interface,
        })
    };

    match config.kind {
        BoundaryKind::Flat | BoundaryKind::Blocker { .. } => {
            interface(Curve::Segment(Segment2::new(
                Vec2::new(x0, cap),
                Vec2::new(x1, cap),
            )?));
        }
        BoundaryKind::Arc { radius, axis_x } => {
            if depth >= radius {
                return Err(Error::IndentationTooDeep {
                    depth,
                    limit: radius,
                });
            }
            let center = Vec2::new(axis_x, config.thickness - radius);
            let angle_at = |x: f64| {
                let dx = x - axis_x;
                math::atan2(math::sqrt(radius * radius - dx * dx), dx)
            };
            if depth == 0.0 {
                interface(Curve::Arc(Arc2::new(
                    center,
                    radius,
                    angle_at(x1),
                    angle_at(x0),
                )?));
            } else {
                let rise = cap - center.y;
                let half = math::sqrt(radius * radius - rise * rise);
                let left = axis_x - half;
                let right = axis_x + half;
                if left > x0 {
                    let a = math::atan2(rise, -half);
                    interface(Curve::Arc(Arc2::new(center, radius, a, angle_at(x0))?));
                }
                interface(Curve::Segment(Segment2::new(
                    Vec2::new(left.max(x0), cap),
                    Vec2::new(right.min(x1), cap),
                )?));
                if right < x1 {
                    let a = math::atan2(rise, half);
                    interface(Curve::Arc(Arc2::new(center, radius, angle_at(x1), a)?));
                }
            }
        }
    }

    if let BoundaryKind::Blocker {
        height,
        width,
        center_x,
    } = config.kind
    {
        if height >= cap {
            return Err(Error::IndentationTooDeep {
                depth,
                limit: config.thickness - height,
            });
        }
        let l = center_x - 0.5 * width;
        let r = center_x + 0.5 * width;
        let mut wall = |a: Point2, b: Point2| -> Result<()> {
            pieces.push(BoundaryPiece {
                curve: Curve::Segment(Segment2::new(a, b)?),
                class: SurfaceClass::Blocker,
            });
            Ok(())
        };
        if width > 0.0 {
            wall(Vec2::new(l, 0.0), Vec2::new(l, height))?;
            wall(Vec2::new(l, height), Vec2::new(r, height))?;
            wall(Vec2::new(r, height), Vec2::new(r, 0.0))?;
        } else {
            wall(Vec2::new(center_x, 0.0), Vec2::new(center_x, height))?;
        }
    }

    Ok(Boundary {
        pieces,
        apex_height: cap,
    })
}

/// Linear spring relating indentation depth to contact force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringModel {
    /// Newtons per millimeter.
    pub stiffness: f64,
    /// Newtons.
    pub max_force: f64,
}

impl Default for SpringModel {
    fn default() -> Self {
        SpringModel {
            stiffness: 2.0,
            max_force: 10.0,
        }
    }
}

impl SpringModel {
    pub fn new(stiffness: f64, max_force: f64) -> Result<Self> {
        if !(stiffness > 0.0) || !stiffness.is_finite() {
            return Err(Error::invalid("spring stiffness", "must be positive"));
        }
        if !(max_force > 0.0) {
            return Err(Error::invalid("spring max force", "must be positive"));
        }
        Ok(SpringModel {
            stiffness,
            max_force,
        })
    }

    /// Depth at which the force saturates.
    pub fn max_depth(&self) -> f64 {
        self.max_force / self.stiffness
    }
}

pub fn force_from_depth(spring: &SpringModel, depth: f64) -> f64 {
    (spring.stiffness * depth.max(0.0)).min(spring.max_force)
}

pub fn depth_from_force(spring: &SpringModel, force: f64) -> Result<f64> {
    if !(force >= 0.0) {
        return Err(Error::invalid("force", "must be non-negative"));
    }
    if force > spring.max_force {
        return Err(Error::ForceOutOfRange {
            force,
            max: spring.max_force,
        });
    }
    Ok(force / spring.stiffness)
}
