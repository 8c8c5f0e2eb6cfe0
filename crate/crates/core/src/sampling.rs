//! Seeded point samplers for the identity sweeps.
//!
//! Regime sampling regions for the base plane:
//! `c < 0` the disk `|x| ≤ 2.5`; `c = 0` the annulus `0.5 ≤ |x| ≤ 2.5`;
//! `c > 0` the annulus `2c + 0.3 ≤ |x|² ≤ max(9, 2c + 3)`. The fiber angle is
//! uniform on `[0, 2π)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inner and outer squared radii of the base sampling region for `c`.
pub fn regime_radii_sq(c: f64) -> (f64, f64) {
    if c < 0.0 {
        (0.0, 6.25)
    } else if c == 0.0 {
        (0.25, 6.25)
    } else {
        (2.0 * c + 0.3, (2.0 * c + 3.0).max(9.0))
    }
}

/// Area-uniform sample of the annulus `r2_lo ≤ |x|² ≤ r2_hi`.
pub fn annulus_point<R: Rng>(rng: &mut R, r2_lo: f64, r2_hi: f64) -> [f64; 2] {
    let r = rng.random_range(r2_lo..=r2_hi).sqrt();
    let t = rng.random_range(0.0..TAU);
    [r * t.cos(), r * t.sin()]
}

pub fn annulus_points(r_lo: f64, r_hi: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    (0..n).map(|_| annulus_point(&mut g, r_lo * r_lo, r_hi * r_hi).to_vec()).collect()
}

/// Base points of regime `c`.
pub fn base_points(c: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let (lo, hi) = regime_radii_sq(c);
    let mut g = rng(seed);
    (0..n).map(|_| annulus_point(&mut g, lo, hi).to_vec()).collect()
}

/// Bundle points `(x₁, x₂, α)` of regime `c`.
pub fn bundle_points(c: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let (lo, hi) = regime_radii_sq(c);
    let mut g = rng(seed);
    (0..n)
        .map(|_| {
            let x = annulus_point(&mut g, lo, hi);
            vec![x[0], x[1], g.random_range(0.0..TAU)]
        })
        .collect()
}

/// Uniform samples of the box `lo ≤ x ≤ hi` (componentwise).
pub fn box_points(lo: &[f64], hi: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    (0..n).map(|_| lo.iter().zip(hi).map(|(a, b)| g.random_range(*a..=*b)).collect()).collect()
}
