//! Two-dimensional optical model of an elastomer-covered time-of-flight
//! proximity/contact/force sensor.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//! ray/curve intersection, interface optics, boundary construction for the
//! flat, blocker and circular-arc elastomer covers, the branching ray tracer
//! that synthesizes range and intensity readings, intensity-law calibration,
//! force lookup tables and the arc geometry search. File formats, sweeps and
//! the command line live in the `pcf-sim` crate.
//!
//! Coordinates are millimeters in the sensor cross-section. The sensor plane
//! is `y = 0`, the emitter sits at the origin looking along `+y` and the
//! receiver lies on the `+x` axis.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calibration;
pub mod elastomer;
mod error;
pub mod geometry;
mod math;
pub mod optics;
pub mod optimizer;
pub mod sensor;

pub use error::{Error, Result};
