//! Monte Carlo estimate of the two-disc overlap, reported next to the closed
//! form used by the intensity law.

use pcf_core::sensor::{analytic_view_area, disc_overlap_area};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Overlap area of two radius-`r` discs with centers `s` apart, estimated by
/// uniform sampling of the first disc's bounding square.
pub fn monte_carlo_overlap(s: f64, r: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = r * r;
    let mut inside = 0usize;
    for _ in 0..samples {
        let x: f64 = rng.gen_range(-r..r);
        let y: f64 = rng.gen_range(-r..r);
        if x * x + y * y <= r2 && (x - s) * (x - s) + y * y <= r2 {
            inside += 1;
        }
    }
    4.0 * r2 * inside as f64 / samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaComparison {
    pub separation: f64,
    pub radius: f64,
    /// `(s/2)·√(4r² − s²)` as used by the intensity law.
    pub view_area: f64,
    /// Exact lens area.
    pub exact: f64,
    pub monte_carlo: f64,
}

/// The default set of 20 `(s, r)` pairs: four cone radii, five separations
/// each, spanning nearly coincident to nearly tangent cones.
pub fn default_pairs() -> Vec<(f64, f64)> {
    let mut pairs = Vec::new();
    for r in [2.0, 4.0, 6.0, 8.0] {
        for frac in [0.1, 0.5, 1.0, 1.5, 1.9] {
            pairs.push((frac * r, r));
        }
    }
    pairs
}

pub fn compare_areas(pairs: &[(f64, f64)], samples: usize, seed: u64) -> Vec<AreaComparison> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(s, r))| AreaComparison {
            separation: s,
            radius: r,
            view_area: analytic_view_area(s, r).unwrap_or(f64::NAN),
            exact: disc_overlap_area(s, r),
            monte_carlo: monte_carlo_overlap(s, r, samples, seed.wrapping_add(i as u64)),
        })
        .collect()
}

pub fn write_comparison(rows: &[AreaComparison]) -> String {
    let mut out = String::from("s_mm,r_mm,view_area_mm2,exact_overlap_mm2,monte_carlo_mm2\n");
    for c in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.separation, c.radius, c.view_area, c.exact, c.monte_carlo
        ));
    }
    out
}
