//! Planar primitives and exact ray/curve intersection.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::math;
use crate::optics::Ray2;
use crate::{Error, Result};

/// Self-intersection guard applied after every bounce, in millimeters.
pub const HIT_EPSILON: f64 = 1e-9;

/// Discriminant magnitude below which a ray is considered to graze an arc.
pub const GRAZING_DISCRIMINANT: f64 = 1e-12;

/// A 2D vector in millimeters (or dimensionless when used as a direction).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// Points and vectors share one representation.
pub type Point2 = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians measured counter-clockwise from `+x`.
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(math::cos(angle), math::sin(angle))
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if a == b {
            return Err(Error::invalid("segment", "endpoints coincide"));
        }
        Ok(Segment2 { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn point_at(&self, u: f64) -> Point2 {
        self.a + (self.b - self.a) * u
    }
}

/// Counter-clockwise circular arc from `start` to `end` (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc2 {
    pub center: Point2,
    pub radius: f64,
    pub start: f64,
    pub end: f64,
}

impl Arc2 {
    pub fn new(center: Point2, radius: f64, start: f64, end: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("arc radius", "must be positive"));
        }
        let extent = end - start;
        if !(extent > 0.0) || extent > core::f64::consts::TAU {
            return Err(Error::invalid("arc extent", "must lie in (0, 2π]"));
        }
        Ok(Arc2 {
            center,
            radius,
            start,
            end,
        })
    }

    pub fn extent(&self) -> f64 {
        self.end - self.start
    }

    pub fn point_at(&self, angle: f64) -> Point2 {
        self.center + Vec2::from_angle(angle) * self.radius
    }

    pub fn start_point(&self) -> Point2 {
        self.point_at(self.start)
    }

    pub fn end_point(&self) -> Point2 {
        self.point_at(self.end)
    }

    pub fn contains_angle(&self, angle: f64) -> bool {
        let offset = math::wrap_angle(angle - self.start);
        offset <= self.extent() + 1e-12 || (self.extent() >= core::f64::consts::TAU - 1e-12)
    }
}

/// A boundary curve: either a straight segment or a circular arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Segment(Segment2),
    Arc(Arc2),
}

impl Curve {
    pub fn intersect(&self, ray: &Ray2) -> Option<Hit> {
        match self {
            Curve::Segment(s) => intersect_ray_segment(ray, s),
            Curve::Arc(a) => intersect_ray_arc(ray, a),
        }
    }

    /// Endpoints in construction order.
    pub fn endpoints(&self) -> (Point2, Point2) {
        match self {
            Curve::Segment(s) => (s.a, s.b),
            Curve::Arc(a) => (a.start_point(), a.end_point()),
        }
    }
}

/// Where a ray meets a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Distance along the ray in millimeters.
    pub t: f64,
    pub point: Point2,
    /// Unit surface normal facing the incoming ray.
    pub normal: Vec2,
}

fn facing(normal: Vec2, direction: Vec2) -> Vec2 {
    if normal.dot(direction) > 0.0 {
        -normal
    } else {
        normal
    }
}

pub fn intersect_ray_segment(ray: &Ray2, seg: &Segment2) -> Option<Hit> {
    let edge = seg.b - seg.a;
    let denom = ray.direction.cross(edge);
    if denom.abs() < 1e-15 * edge.norm() {
        return None;
    }
    let rel = seg.a - ray.origin;
    let t = rel.cross(edge) / denom;
    let u = rel.cross(ray.direction) / denom;
    if t <= HIT_EPSILON || !(0.0..=1.0).contains(&u) {
        return None;
    }
    let normal = facing(edge.perp().normalized(), ray.direction);
    Some(Hit {
        t,
        point: ray.origin + ray.direction * t,
        normal,
    })
}

pub fn intersect_ray_arc(ray: &Ray2, arc: &Arc2) -> Option<Hit> {
    let rel = ray.origin - arc.center;
    let b = ray.direction.dot(rel);
    let c = rel.dot(rel) - arc.radius * arc.radius;
    let disc = b * b - c;
    if disc <= GRAZING_DISCRIMINANT {
        return None;
    }
    let root = math::sqrt(disc);
    for t in [-b - root, -b + root] {
        if t <= HIT_EPSILON {
            continue;
        }
        let point = ray.origin + ray.direction * t;
        let radial = point - arc.center;
        if !arc.contains_angle(math::atan2(radial.y, radial.x)) {
            continue;
        }
        let normal = facing(radial * (1.0 / arc.radius), ray.direction);
        return Some(Hit {
            t,
            point,
            normal: normal.normalized(),
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn ray(origin: Point2, direction: Vec2) -> Ray2 {
        Ray2::new(origin, direction.normalized(), 1.0)
    }

    #[test]
    fn axis_aligned_segment_hit() {
        let seg = Segment2::new(Vec2::new(-1.0, 5.0), Vec2::new(1.0, 5.0)).unwrap();
        let hit = intersect_ray_segment(&ray(Vec2::ZERO, Vec2::new(0.0, 1.0)), &seg).unwrap();
        assert_eq!(hit.t, 5.0);
        assert_eq!(hit.point, Vec2::new(0.0, 5.0));
        assert_eq!(hit.normal, Vec2::new(0.0, -1.0));
    }

    #[test]
    fn parallel_segment_miss() {
        let seg = Segment2::new(Vec2::new(-1.0, 5.0), Vec2::new(1.0, 5.0)).unwrap();
        assert!(intersect_ray_segment(&ray(Vec2::ZERO, Vec2::new(1.0, 0.0)), &seg).is_none());
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(Segment2::new(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn radial_ray_hits_arc_at_normal_incidence() {
        let arc = Arc2::new(Vec2::new(2.0, -1.0), 7.0, 0.3, 2.5).unwrap();
        for k in 0..50 {
            let angle = 0.3 + 2.2 * (k as f64 + 0.5) / 50.0;
            let dir = Vec2::from_angle(angle);
            let hit = intersect_ray_arc(&ray(arc.center, dir), &arc).unwrap();
            assert!((hit.t - 7.0).abs() < 1e-12);
            assert!((hit.normal.dot(-dir) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_ray_outside_extent_misses() {
        let arc = Arc2::new(Vec2::ZERO, 3.0, 0.0, FRAC_PI_2).unwrap();
        assert!(intersect_ray_arc(&ray(Vec2::ZERO, Vec2::from_angle(PI)), &arc).is_none());
        assert!(intersect_ray_arc(&ray(Vec2::ZERO, Vec2::from_angle(-0.2)), &arc).is_none());
    }

    #[test]
    fn tangent_ray_is_a_miss() {
        let arc = Arc2::new(Vec2::ZERO, 2.0, 0.0, PI).unwrap();
        let r = ray(Vec2::new(-5.0, 2.0), Vec2::new(1.0, 0.0));
        assert!(intersect_ray_arc(&r, &arc).is_none());
    }

    #[test]
    fn arc_hit_from_outside_takes_near_root() {
        let arc = Arc2::new(Vec2::ZERO, 2.0, 0.0, core::f64::consts::TAU).unwrap();
        let hit = intersect_ray_arc(&ray(Vec2::new(-5.0, 0.0), Vec2::new(1.0, 0.0)), &arc).unwrap();
        assert!((hit.t - 3.0).abs() < 1e-12);
        assert_eq!(hit.normal, Vec2::new(-1.0, 0.0));
    }

    #[test]
    fn self_intersection_guard() {
        let seg = Segment2::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!(intersect_ray_segment(&ray(Vec2::ZERO, Vec2::new(0.0, 1.0)), &seg).is_none());
    }
}
