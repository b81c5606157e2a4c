//! Interface optics: Snell refraction, unpolarized Fresnel splitting,
//! mirror reflection and Lambertian target scattering.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::geometry::{Point2, Vec2};
use crate::math;
use crate::{Error, Result};

/// A power-weighted directed ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray2 {
    pub origin: Point2,
    /// Unit direction.
    pub direction: Vec2,
    /// Fraction of the emitted power carried by this ray, in `[0, 1]`.
    pub power: f64,
    /// Accumulated geometric length times refractive index, in millimeters.
    pub optical_path: f64,
    pub bounce_count: u32,
}

impl Ray2 {
    pub fn new(origin: Point2, direction: Vec2, power: f64) -> Self {
        Ray2 {
            origin,
            direction,
            power,
            optical_path: 0.0,
            bounce_count: 0,
        }
    }

    pub fn at(&self, t: f64) -> Point2 {
        self.origin + self.direction * t
    }
}

/// A homogeneous optical medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub refractive_index: f64,
}

impl Medium {
    pub const AIR: Medium = Medium {
        refractive_index: 1.0,
    };

    /// Commonly quoted index of cured PDMS.
    pub const PDMS: Medium = Medium {
        refractive_index: 1.41,
    };

    pub fn new(refractive_index: f64) -> Result<Self> {
        if !(refractive_index >= 1.0) || !refractive_index.is_finite() {
            return Err(Error::invalid(
                "refractive index",
                "must be finite and >= 1",
            ));
        }
        Ok(Medium { refractive_index })
    }
}

/// Mirror reflection of `incident` about the line with unit `normal`.
pub fn reflect(incident: Vec2, normal: Vec2) -> Vec2 {
    incident - normal * (2.0 * incident.dot(normal))
}

/// Snell refraction from index `n1` into `n2`.
///
/// `normal` must face the incident ray. Returns `None` under total internal
/// reflection.
pub fn refract(incident: Vec2, normal: Vec2, n1: f64, n2: f64) -> Option<Vec2> {
    let eta = n1 / n2;
    let cos_i = -incident.dot(normal);
    let sin2_t = eta * eta * (1.0 - cos_i * cos_i).max(0.0);
    if sin2_t > 1.0 {
        return None;
    }
    let cos_t = math::sqrt(1.0 - sin2_t);
    Some((incident * eta + normal * (eta * cos_i - cos_t)).normalized())
}

/// Unpolarized Fresnel reflectance and transmittance `(R, T)` for light
/// arriving at `cos_i` from index `n1` onto index `n2`.
pub fn fresnel_unpolarized(cos_i: f64, n1: f64, n2: f64) -> (f64, f64) {
    let cos_i = cos_i.clamp(0.0, 1.0);
    let sin_t = n1 / n2 * math::sqrt((1.0 - cos_i * cos_i).max(0.0));
    if sin_t >= 1.0 {
        return (1.0, 0.0);
    }
    let cos_t = math::sqrt(1.0 - sin_t * sin_t);
    let rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    let rp = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
    let r = 0.5 * (rs * rs + rp * rp);
    (r, 1.0 - r)
}

/// Critical angle in radians for light leaving index `n1` into `n2 < n1`.
pub fn critical_angle(n1: f64, n2: f64) -> Option<f64> {
    (n1 > n2).then(|| math::asin(n2 / n1))
}

/// A point on a diffuse surface receiving `power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterSite {
    pub point: Point2,
    /// Unit normal pointing into the half-plane the light scatters into.
    pub normal: Vec2,
    pub power: f64,
}

/// Scatters `site.power * reflectivity` into `fan_size` rays following the
/// 2D cosine law, using equal-power strata centered in each stratum.
pub fn lambertian_scatter(site: &ScatterSite, reflectivity: f64, fan_size: usize) -> Vec<Ray2> {
    lambertian_scatter_phased(site, reflectivity, fan_size, 0.5)
}

/// As [`lambertian_scatter`], with every direction placed at fraction
/// `phase` of its stratum instead of the midpoint.
///
/// The 2D cosine law has CDF `(1 + sin θ) / 2`, so stratum `i` of `M` covers
/// `sin θ ∈ [-1 + 2i/M, -1 + 2(i+1)/M]` and carries weight `1/M`.
pub fn lambertian_scatter_phased(
    site: &ScatterSite,
    reflectivity: f64,
    fan_size: usize,
    phase: f64,
) -> Vec<Ray2> {
    let phase = phase.clamp(0.0, 1.0);
    scatter_with(site, reflectivity, fan_size, |i| {
        -1.0 + 2.0 * (i as f64 + phase) / fan_size as f64
    })
}

/// Monte Carlo variant of [`lambertian_scatter`] drawing each direction from
/// the cosine law.
pub fn lambertian_scatter_sampled<R: RngCore>(
    site: &ScatterSite,
    reflectivity: f64,
    fan_size: usize,
    rng: &mut R,
) -> Vec<Ray2> {
    scatter_with(site, reflectivity, fan_size, |_| {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * u - 1.0
    })
}

fn scatter_with(
    site: &ScatterSite,
    reflectivity: f64,
    fan_size: usize,
    mut sine: impl FnMut(usize) -> f64,
) -> Vec<Ray2> {
    if reflectivity <= 0.0 || fan_size == 0 || site.power <= 0.0 {
        return Vec::new();
    }
    let weight = 1.0 / fan_size as f64;
    let tangent = site.normal.perp();
    (0..fan_size)
        .map(|i| {
            let s = sine(i).clamp(-1.0, 1.0);
            let c = math::sqrt(1.0 - s * s);
            let direction = (site.normal * c + tangent * s).normalized();
            Ray2::new(site.point, direction, site.power * reflectivity * weight)
        })
        .collect()
}
