//! `f64` helpers backed by `libm` so results do not depend on the platform
//! math library.

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub(crate) fn asin(x: f64) -> f64 {
    libm::asin(x)
}

pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

pub(crate) fn fract(x: f64) -> f64 {
    x - libm::floor(x)
}

/// Wraps an angle into `[0, 2π)`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let tau = core::f64::consts::TAU;
    let w = a - tau * libm::floor(a / tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}
