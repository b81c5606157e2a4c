//! SVG ray diagrams in millimeter user units.

use anyhow::Result;
use pcf_core::elastomer::{build_boundary, SurfaceClass};
use pcf_core::geometry::{Curve, Point2};
use pcf_core::sensor::{trace_scene_observed, PathSegment, Scene, SegmentEnd};
use svg::node::element::path::Data;
use svg::node::element::{Group, Line, Path, Polyline, Rectangle};
use svg::Document;

use crate::config::ExperimentConfig;

pub const EMITTER_COLOR: &str = "red";
pub const RECEIVER_COLOR: &str = "blue";
pub const BOUNDARY_COLOR: &str = "black";
pub const BLOCKER_COLOR: &str = "brown";
pub const TARGET_COLOR: &str = "green";
const RAY_COLOR: &str = "darkorange";
const GRID_COLOR: &str = "#d0d0d0";

/// Scene described by the `[diagram]` section, with its reduced ray counts.
pub fn diagram_scene(config: &ExperimentConfig) -> Result<Scene> {
    let d = &config.diagram;
    let mut scene = config.scene(d.config);
    scene.head.fan_size = d.emitter_rays;
    scene.settings.scatter_fan = d.scatter_rays;
    Ok(if !d.target {
        scene
    } else if d.depth_mm > 0.0 {
        scene.pressed(d.depth_mm, d.reflectivity)?
    } else {
        scene.with_target(d.distance_mm, d.reflectivity)
    })
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_owned()
    } else {
        s
    }
}

/// Rounds to 0.1 µm for compact, platform-independent path data.
fn r4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4 + 0.0
}

/// Maps scene coordinates (y up) to SVG coordinates (y down).
fn point(p: Point2) -> (f64, f64) {
    (p.x, -p.y)
}

fn line(a: Point2, b: Point2, color: &str, width: f64) -> Line {
    let (x1, y1) = point(a);
    let (x2, y2) = point(b);
    Line::new()
        .set("x1", fmt(x1))
        .set("y1", fmt(y1))
        .set("x2", fmt(x2))
        .set("y2", fmt(y2))
        .set("stroke", color)
        .set("stroke-width", fmt(width))
}

fn curve(c: &Curve, color: &str, width: f64) -> Path {
    let data = match c {
        Curve::Segment(s) => {
            let (ax, ay) = point(s.a);
            let (bx, by) = point(s.b);
            Data::new()
                .move_to((r4(ax), r4(ay)))
                .line_to((r4(bx), r4(by)))
        }
        Curve::Arc(arc) => {
            // Sampled as a polyline so the drawing needs no arc flags.
            let n = 64;
            let (sx, sy) = point(arc.start_point());
            let mut data = Data::new().move_to((r4(sx), r4(sy)));
            for k in 1..=n {
                let a = arc.start + arc.extent() * k as f64 / n as f64;
                let (x, y) = point(arc.point_at(a));
                data = data.line_to((r4(x), r4(y)));
            }
            data
        }
    };
    Path::new()
        .set("d", data)
        .set("fill", "none")
        .set("stroke", color)
        .set("stroke-width", fmt(width))
}

/// Renders `scene` with every traced leg drawn at opacity proportional to
/// its power.
pub fn render(scene: &Scene, reflected_only: bool) -> Result<String> {
    let mut legs: Vec<PathSegment> = Vec::new();
    let mut observe = |leg: &PathSegment| {
        if leg.end != SegmentEnd::Terminated && (!reflected_only || leg.bounce_count > 0) {
            legs.push(*leg);
        }
    };
    trace_scene_observed(scene, &mut observe)?;

    let head = scene.head;
    let boundary = match scene.cover {
        Some(c) => Some((c.boundary, build_boundary(&c.boundary, c.indentation)?)),
        None => None,
    };
    let (mut x0, mut x1) = (
        head.emitter.x.min(head.receiver.x) - 6.0,
        head.emitter.x.max(head.receiver.x) + 6.0,
    );
    let mut top: f64 = 10.0;
    if let Some((config, b)) = &boundary {
        let (l, r) = config.span();
        x0 = x0.min(l - 2.0);
        x1 = x1.max(r + 2.0);
        top = top.max(b.apex_height + 3.0);
    }
    if let Some(t) = scene.target {
        top = top.max(t.distance + 3.0);
    }
    let (x0, x1, bottom, top) = (x0.floor(), x1.ceil(), -2.0, top.ceil());

    let mut grid = Group::new()
        .set("id", "grid")
        .set("stroke", GRID_COLOR)
        .set("stroke-width", "0.03");
    for i in 0..=((x1 - x0) as i64) {
        let x = x0 + i as f64;
        grid = grid.add(
            Line::new()
                .set("x1", fmt(x))
                .set("y1", fmt(-top))
                .set("x2", fmt(x))
                .set("y2", fmt(-bottom)),
        );
    }
    for j in 0..=((top - bottom) as i64) {
        let y = bottom + j as f64;
        grid = grid.add(
            Line::new()
                .set("x1", fmt(x0))
                .set("y1", fmt(-y))
                .set("x2", fmt(x1))
                .set("y2", fmt(-y)),
        );
    }

    let max_power = legs.iter().map(|l| l.power).fold(0.0, f64::max);
    let mut rays = Group::new()
        .set("id", "rays")
        .set("stroke", RAY_COLOR)
        .set("stroke-width", "0.05")
        .set("fill", "none");
    for leg in &legs {
        let (ax, ay) = point(leg.from);
        let (bx, by) = point(leg.to);
        let opacity = if max_power > 0.0 {
            leg.power / max_power
        } else {
            0.0
        };
        rays = rays.add(
            Polyline::new()
                .set(
                    "points",
                    format!("{},{} {},{}", fmt(ax), fmt(ay), fmt(bx), fmt(by)),
                )
                .set("stroke-opacity", format!("{opacity:.6}")),
        );
    }

    let mut parts = Group::new().set("id", "geometry");
    if let Some((_, b)) = &boundary {
        for piece in &b.pieces {
            let color = match piece.class {
                SurfaceClass::Interface => BOUNDARY_COLOR,
                SurfaceClass::Blocker => BLOCKER_COLOR,
            };
            parts = parts.add(curve(&piece.curve, color, 0.12));
        }
        let (l, r) = b.interface_ends();
        for end in [l, r] {
            parts = parts.add(line(Point2::new(end.x, 0.0), end, BOUNDARY_COLOR, 0.12));
        }
    }
    if let Some(t) = scene.target {
        parts = parts.add(
            line(
                Point2::new(x0, t.distance),
                Point2::new(x1, t.distance),
                TARGET_COLOR,
                0.2,
            )
            .set("id", "target"),
        );
    }
    let half = head.aperture_half_width;
    parts = parts
        .add(
            line(
                Point2::new(head.emitter.x - half, 0.0),
                Point2::new(head.emitter.x + half, 0.0),
                EMITTER_COLOR,
                0.3,
            )
            .set("id", "emitter"),
        )
        .add(
            line(
                Point2::new(head.receiver.x - half, 0.0),
                Point2::new(head.receiver.x + half, 0.0),
                RECEIVER_COLOR,
                0.3,
            )
            .set("id", "receiver"),
        );

    let width = x1 - x0;
    let height = top - bottom;
    let document = Document::new()
        .set("viewBox", (fmt(x0), fmt(-top), fmt(width), fmt(height)))
        .set("width", format!("{}mm", fmt(width)))
        .set("height", format!("{}mm", fmt(height)))
        .add(
            Rectangle::new()
                .set("x", fmt(x0))
                .set("y", fmt(-top))
                .set("width", fmt(width))
                .set("height", fmt(height))
                .set("fill", "white"),
        )
        .add(grid)
        .add(rays)
        .add(parts);
    Ok(document.to_string())
}
