//! Calibration: fitting the intensity law, recovering target reflectivity
//! from a (range, intensity) pair, and the intensity to force lookup used
//! once the target is in contact.

use alloc::vec::Vec;

use crate::elastomer::{force_from_depth, SpringModel};
use crate::math;
use crate::sensor::{simulate, IntensityParams, Scene};
use crate::{Error, Result};

/// Fits stop once the gradient of the half sum of squares drops below this.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e16;

/// Reflectivity estimates beyond this factor of the family envelope are
/// flagged as extrapolated.
pub const ENVELOPE_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityFit {
    pub params: IntensityParams,
    /// Root mean square residual at `params`.
    pub rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Sum of squared residuals after the initial guess and each accepted step.
    pub history: Vec<f64>,
}

fn sum_of_squares(samples: &[(f64, f64)], p: &IntensityParams) -> f64 {
    samples
        .iter()
        .map(|&(d, y)| {
            let r = y - p.eval(d);
            r * r
        })
        .sum()
}

/// Returns `(JᵀJ, Jᵀr)` for residuals `r = y − f(d)`.
fn normal_equations(samples: &[(f64, f64)], p: &IntensityParams) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for &(d, y) in samples {
        let g = p.gradient(d);
        let r = y - p.eval(d);
        for i in 0..3 {
            jtr[i] += g[i] * r;
            for j in 0..3 {
                jtj[i][j] += g[i] * g[j];
            }
        }
    }
    (jtj, jtr)
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn initial_guess(samples: &[(f64, f64)]) -> IntensityParams {
    let floor = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let offset = 0.9 * samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let &(d_peak, i_peak) = samples
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("samples checked non-empty");
    let root = math::sqrt(d_peak * d_peak - offset * offset);
    let gain = if root > 0.0 {
        (i_peak - floor) * d_peak * d_peak / root
    } else {
        0.0
    };
    IntensityParams::new(gain, offset, floor)
}

fn project(p: IntensityParams) -> IntensityParams {
    IntensityParams::new(p.gain.max(0.0), p.offset.max(0.0), p.floor)
}

fn norm3(v: &[f64; 3]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// Least-squares fit of `I(d) = κ·√(d² − ζ²)/d² + χ` to `(d, I)` samples by
/// Levenberg-damped Gauss–Newton.
///
/// A fit that runs out of iterations is returned with `converged = false`
/// and the best iterate found.
pub fn fit_intensity(samples: &[(f64, f64)]) -> Result<IntensityFit> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            got: samples.len(),
        });
    }
    if samples
        .iter()
        .any(|&(d, i)| !(d > 0.0) || !d.is_finite() || !i.is_finite())
    {
        return Err(Error::invalid(
            "samples",
            "distances must be positive and values finite",
        ));
    }
    let first = samples[0].0;
    if samples.iter().all(|s| s.0 == first) {
        return Err(Error::DegenerateSamples("all sample distances are equal"));
    }

    let mut params = initial_guess(samples);
    let mut cost = sum_of_squares(samples, &params);
    let mut history = alloc::vec![cost];
    let mut damping = INITIAL_DAMPING;
    let mut iterations = 0;
    let (mut jtj, mut jtr) = normal_equations(samples, &params);
    let mut gradient_norm = norm3(&jtr);

    while gradient_norm >= GRADIENT_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut accepted = false;
        while damping <= MAX_DAMPING {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += damping * (jtj[i][i] + 1e-12);
            }
            let Some(step) = solve3(a, jtr) else {
                damping *= 10.0;
                continue;
            };
            let candidate = project(IntensityParams::new(
                params.gain + step[0],
                params.offset + step[1],
                params.floor + step[2],
            ));
            let candidate_cost = sum_of_squares(samples, &candidate);
            if candidate_cost < cost {
                params = candidate;
                cost = candidate_cost;
                history.push(cost);
                damping = (damping / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            break;
        }
        (jtj, jtr) = normal_equations(samples, &params);
        gradient_norm = norm3(&jtr);
    }

    Ok(IntensityFit {
        params,
        rms: math::sqrt(cost / samples.len() as f64),
        iterations,
        converged: gradient_norm < GRADIENT_TOLERANCE,
        gradient_norm,
        history,
    })
}

/// An intensity fit taken against a target of known reflectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedFit {
    pub reflectivity: f64,
    pub fit: IntensityFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectivityProfile {
    /// Estimated reflectivity, clamped to `[0, 1]`.
    pub reflectivity: f64,
    pub range: f64,
    pub intensity: f64,
    /// Relative distance of the measured intensity outside the family's
    /// predicted envelope; zero inside it.
    pub residual: f64,
    pub extrapolated: bool,
}

fn sorted_family(family: &[CalibratedFit]) -> Result<Vec<(f64, &IntensityParams)>> {
    let mut members: Vec<(f64, &IntensityParams)> = family
        .iter()
        .map(|m| (m.reflectivity, &m.fit.params))
        .collect();
    members.sort_by(|a, b| a.0.total_cmp(&b.0));
    members.dedup_by(|a, b| a.0 == b.0);
    if members.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: members.len(),
        });
    }
    Ok(members)
}

/// Estimates target reflectivity from a proximity reading by interpolating
/// linearly in ρ between the family members whose predicted intensities at
/// `range` bracket the measurement.
pub fn characterize_reflectivity(
    range: f64,
    intensity: f64,
    family: &[CalibratedFit],
) -> Result<ReflectivityProfile> {
    let members = sorted_family(family)?;
    if !(range > 0.0) {
        return Err(Error::invalid("range", "must be positive"));
    }
    let predictions: Vec<(f64, f64)> = members
        .iter()
        .map(|(rho, p)| (*rho, p.eval(range)))
        .collect();
    let last = predictions.len() - 1;
    let pair = (0..last)
        .find(|&k| {
            let (lo, hi) = (predictions[k].1, predictions[k + 1].1);
            (lo.min(hi)..=lo.max(hi)).contains(&intensity)
        })
        .unwrap_or_else(|| {
            let nearest_low = (intensity - predictions[0].1).abs();
            let nearest_high = (intensity - predictions[last].1).abs();
            if nearest_low <= nearest_high {
                0
            } else {
                last - 1
            }
        });
    let (rho_a, i_a) = predictions[pair];
    let (rho_b, i_b) = predictions[pair + 1];
    if i_a == i_b {
        return Err(Error::DegenerateSamples(
            "family predictions coincide at this range",
        ));
    }
    let rho = rho_a + (intensity - i_a) * (rho_b - rho_a) / (i_b - i_a);

    let brightest = predictions
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let darkest = predictions
        .iter()
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min);
    let residual = if intensity > brightest {
        (intensity - brightest) / brightest.abs().max(f64::MIN_POSITIVE)
    } else if intensity < darkest {
        (darkest - intensity) / darkest.abs().max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    Ok(ReflectivityProfile {
        reflectivity: rho.clamp(0.0, 1.0),
        range,
        intensity,
        residual,
        extrapolated: intensity > brightest * (1.0 + ENVELOPE_MARGIN)
            || intensity < darkest * (1.0 - ENVELOPE_MARGIN),
    })
}

/// Combines several proximity readings of the same target.
///
/// Each reading is characterized on its own and the estimates are averaged
/// with weights equal to the squared mean family prediction at that range.
/// When the family is linear in ρ this is the least-squares scale of the
/// family shape through all readings.
pub fn characterize_reflectivity_series(
    readings: &[(f64, f64)],
    family: &[CalibratedFit],
) -> Result<ReflectivityProfile> {
    let members = sorted_family(family)?;
    let mut weighted = 0.0;
    let mut total = 0.0;
    let mut best: Option<(f64, ReflectivityProfile)> = None;
    for &(range, intensity) in readings {
        let profile = characterize_reflectivity(range, intensity, family)?;
        let mean = members.iter().map(|(_, p)| p.eval(range)).sum::<f64>() / members.len() as f64;
        let w = mean * mean;
        weighted += w * profile.reflectivity;
        total += w;
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, profile));
        }
    }
    let (_, brightest) = best.ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    if !(total > 0.0) {
        return Err(Error::DegenerateSamples(
            "family predicts no intensity at these ranges",
        ));
    }
    Ok(ReflectivityProfile {
        reflectivity: (weighted / total).clamp(0.0, 1.0),
        ..brightest
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceKnot {
    pub intensity: f64,
    /// Newtons.
    pub force: f64,
}

/// Monotone intensity to force map for one target reflectivity.
///
/// Knots are ordered by increasing force and strictly decreasing intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTable {
    pub reflectivity: f64,
    knots: Vec<ForceKnot>,
}

impl ForceTable {
    /// Builds a table from `(intensity, force)` samples ordered by force,
    /// dropping every sample whose intensity is not strictly below the last
    /// kept one.
    pub fn from_samples(reflectivity: f64, samples: &[ForceKnot]) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].force > w[0].force)) {
            return Err(Error::invalid(
                "force samples",
                "forces must be strictly increasing",
            ));
        }
        let mut knots: Vec<ForceKnot> = Vec::with_capacity(samples.len());
        for s in samples {
            if !s.intensity.is_finite() {
                continue;
            }
            if knots.last().is_none_or(|k| s.intensity < k.intensity) {
                knots.push(*s);
            }
        }
        if knots.len() < 2 {
            return Err(Error::TooFewKnots(knots.len()));
        }
        Ok(ForceTable {
            reflectivity,
            knots,
        })
    }

    pub fn knots(&self) -> &[ForceKnot] {
        &self.knots
    }
}

/// Simulates `template` pressed to each depth at `reflectivity` and pairs the
/// intensities with the spring force.
pub fn build_force_table(
    template: &Scene,
    reflectivity: f64,
    depths: &[f64],
    spring: &SpringModel,
) -> Result<ForceTable> {
    check_depth_grid(depths, spring)?;
    let mut samples = Vec::with_capacity(depths.len());
    for &depth in depths {
        let reading = simulate(&template.pressed(depth, reflectivity)?)?;
        samples.push(ForceKnot {
            intensity: reading.intensity,
            force: force_from_depth(spring, depth),
        });
    }
    ForceTable::from_samples(reflectivity, &samples)
}

/// Checks that `depths` is strictly increasing within `[0, max depth]`.
pub fn check_depth_grid(depths: &[f64], spring: &SpringModel) -> Result<()> {
    if depths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("depth grid", "must be strictly increasing"));
    }
    if depths
        .iter()
        .any(|&d| !(d >= 0.0) || d > spring.max_depth() + 1e-12)
    {
        return Err(Error::invalid(
            "depth grid",
            "must lie within [0, max depth]",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceEstimate {
    /// Newtons.
    pub force: f64,
    /// The intensity fell outside the table and the force was clamped.
    pub saturated: bool,
}

/// Piecewise-linear inverse lookup of force from contact intensity.
pub fn infer_force(table: &ForceTable, intensity: f64) -> ForceEstimate {
    let knots = &table.knots;
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if intensity >= first.intensity {
        return ForceEstimate {
            force: first.force,
            saturated: intensity > first.intensity,
        };
    }
    if intensity <= last.intensity {
        return ForceEstimate {
            force: last.force,
            saturated: intensity < last.intensity,
        };
    }
    // First knot whose intensity is below the query; its predecessor is at or
    // above it.
    let upper = knots.partition_point(|k| k.intensity >= intensity);
    let a = knots[upper - 1];
    let b = knots[upper];
    let u = (a.intensity - intensity) / (a.intensity - b.intensity);
    ForceEstimate {
        force: a.force + u * (b.force - a.force),
        saturated: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: &IntensityParams, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let d = 6.0 + 44.0 * i as f64 / (n - 1) as f64;
                (d, p.eval(d))
            })
            .collect()
    }

    #[test]
    fn noiseless_round_trip() {
        let truth = IntensityParams::new(0.8, 4.0, 0.01);
        let fit = fit_intensity(&synthetic(&truth, 40)).unwrap();
        assert!(fit.converged);
        assert!((fit.params.gain / 0.8 - 1.0).abs() < 1e-6);
        assert!((fit.params.offset / 4.0 - 1.0).abs() < 1e-6);
        assert!((fit.params.floor / 0.01 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn accepted_steps_never_increase_the_objective() {
        let truth = IntensityParams::new(0.3, 9.0, 0.002);
        let fit = fit_intensity(&synthetic(&truth, 25)).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn constant_data_has_no_gain() {
        let samples: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64 * 3.0, 0.25)).collect();
        let fit = fit_intensity(&samples).unwrap();
        assert!(!fit.converged || fit.params.gain < 1e-9);
        assert!((fit.params.floor - 0.25).abs() < 1e-9);
    }

    #[test]
    fn fit_input_checks() {
        assert!(matches!(
            fit_intensity(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(matches!(
            fit_intensity(&[(5.0, 1.0), (5.0, 0.9), (5.0, 1.1), (5.0, 1.0)]),
            Err(Error::DegenerateSamples(_))
        ));
        assert!(fit_intensity(&[(0.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    fn family() -> Vec<CalibratedFit> {
        [0.17, 0.5, 0.85]
            .into_iter()
            .map(|rho| CalibratedFit {
                reflectivity: rho,
                fit: IntensityFit {
                    params: IntensityParams::new(0.8 * rho, 4.0, 0.02 * rho),
                    rms: 0.0,
                    iterations: 0,
                    converged: true,
                    gradient_norm: 0.0,
                    history: Vec::new(),
                },
            })
            .collect()
    }

    #[test]
    fn reflectivity_on_a_member_curve() {
        let fam = family();
        let i = fam[1].fit.params.eval(30.0);
        let p = characterize_reflectivity(30.0, i, &fam).unwrap();
        assert!((p.reflectivity - 0.5).abs() < 1e-12);
        assert!(!p.extrapolated);
    }

    #[test]
    fn reflectivity_midway_between_extremes() {
        let fam = family();
        let lo = fam[0].fit.params.eval(30.0);
        let hi = fam[2].fit.params.eval(30.0);
        let p = characterize_reflectivity(30.0, 0.5 * (lo + hi), &fam).unwrap();
        assert!((p.reflectivity - 0.51).abs() < 1e-9);
    }

    #[test]
    fn reflectivity_far_outside_envelope_is_flagged() {
        let fam = family();
        let hi = fam[2].fit.params.eval(30.0);
        let p = characterize_reflectivity(30.0, 3.0 * hi, &fam).unwrap();
        assert!(p.extrapolated);
        assert_eq!(p.reflectivity, 1.0);
        let q = characterize_reflectivity(30.0, 1.1 * hi, &fam).unwrap();
        assert!(!q.extrapolated);
    }

    #[test]
    fn reflectivity_needs_two_members() {
        let fam = family();
        assert!(characterize_reflectivity(30.0, 0.01, &fam[..1]).is_err());
    }

    fn table() -> ForceTable {
        let samples: Vec<ForceKnot> = (0..=10)
            .map(|k| ForceKnot {
                intensity: 0.01 - 0.0005 * k as f64,
                force: k as f64,
            })
            .collect();
        ForceTable::from_samples(0.5, &samples).unwrap()
    }

    #[test]
    fn lookup_is_exact_at_knots() {
        let t = table();
        for k in t.knots() {
            let e = infer_force(&t, k.intensity);
            assert!((e.force - k.force).abs() < 1e-9);
            assert!(!e.saturated);
        }
    }

    #[test]
    fn lookup_between_knots_and_beyond() {
        let t = table();
        let mid = infer_force(&t, 0.5 * (t.knots()[3].intensity + t.knots()[4].intensity));
        assert!(mid.force > 3.0 && mid.force < 4.0);
        let low = infer_force(&t, 0.0);
        assert_eq!(low.force, 10.0);
        assert!(low.saturated);
        let high = infer_force(&t, 1.0);
        assert_eq!(high.force, 0.0);
        assert!(high.saturated);
    }

    #[test]
    fn violating_knots_are_dropped() {
        let samples = [
            ForceKnot {
                intensity: 1.0,
                force: 0.0,
            },
            ForceKnot {
                intensity: 0.8,
                force: 1.0,
            },
            ForceKnot {
                intensity: 0.85,
                force: 2.0,
            },
            ForceKnot {
                intensity: 0.8,
                force: 3.0,
            },
            ForceKnot {
                intensity: 0.5,
                force: 4.0,
            },
        ];
        let t = ForceTable::from_samples(0.5, &samples).unwrap();
        let forces: Vec<f64> = t.knots().iter().map(|k| k.force).collect();
        assert_eq!(forces, [0.0, 1.0, 4.0]);
    }

    #[test]
    fn flat_table_is_rejected() {
        let samples = [
            ForceKnot {
                intensity: 0.3,
                force: 0.0,
            },
            ForceKnot {
                intensity: 0.3,
                force: 1.0,
            },
        ];
        assert!(matches!(
            ForceTable::from_samples(0.5, &samples),
            Err(Error::TooFewKnots(1))
        ));
    }
}
