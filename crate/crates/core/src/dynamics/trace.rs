//! Position-space traces, arc-length resampling and Hausdorff distances.

use super::integrator::hermite;
use super::trajectory::Trajectory;
use rayon::prelude::*;
use rstar::primitives::GeomWithData;
use rstar::RTree;

/// Number of points both traces are resampled to before comparison.
pub const RESAMPLE_POINTS: usize = 2000;
/// Target spacing of the Hermite densification in position space.
pub const DENSE_SPACING: f64 = 5e-5;
/// Cap on sub-points per integration step.
const MAX_SUBDIVISION: usize = 20_000;

pub type Point2 = [f64; 2];

/// Maps every state through `map`, subdividing each step with Hermite
/// interpolation so that consecutive points are at most about `spacing`
/// apart.
pub fn dense_trace(traj: &Trajectory, spacing: f64, map: &dyn Fn(&[f64]) -> Point2) -> Vec<Point2> {
    let s = &traj.samples;
    let mut out = Vec::with_capacity(s.len());
    if let Some(first) = s.first() {
        out.push(map(&first.state));
    }
    for w in s.windows(2) {
        let (a, b) = (map(&w[0].state), map(&w[1].state));
        let mid = map(&hermite(&w[0], &w[1], 0.5 * (w[0].t + w[1].t)));
        let len = dist(&a, &mid) + dist(&mid, &b);
        let k = ((len / spacing).ceil() as usize).clamp(1, MAX_SUBDIVISION);
        for j in 1..k {
            let t = w[0].t + (w[1].t - w[0].t) * j as f64 / k as f64;
            out.push(map(&hermite(&w[0], &w[1], t)));
        }
        out.push(b);
    }
    out
}

pub fn arc_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

fn dist(a: &Point2, b: &Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `n` points equally spaced in arc length along the polyline.
pub fn resample_arc_length(points: &[Point2], n: usize) -> Vec<Point2> {
    if points.len() < 2 || n < 2 {
        return points.to_vec();
    }
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        cum.push(cum.last().unwrap() + dist(&w[0], &w[1]));
    }
    let total = *cum.last().unwrap();
    if total == 0.0 {
        return vec![points[0]; n];
    }
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let s = total * i as f64 / (n - 1) as f64;
        while j + 2 < cum.len() && cum[j + 1] < s {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let u = if seg > 0.0 { ((s - cum[j]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (points[j], points[j + 1]);
        out.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
    }
    out
}

fn point_segment(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let u = if l2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - u * dx).hypot(p[1] - a[1] - u * dy)
}

fn directed(a: &[Point2], b: &[Point2]) -> f64 {
    a.par_iter()
        .map(|p| {
            if b.len() == 1 {
                return dist(p, &b[0]);
            }
            b.windows(2).map(|w| point_segment(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest distance from the points of `a` to the polyline `b`, using an
/// R-tree over the vertices of `b`. The nearest point of a segment lies
/// within half its length of one endpoint, so checking the segments at every
/// vertex within `nearest vertex + longest half segment` is exact.
fn directed_indexed(a: &[Point2], b: &[Point2]) -> f64 {
    if b.len() < 2 {
        return directed(a, b);
    }
    let tree = RTree::bulk_load(b.iter().enumerate().map(|(i, p)| GeomWithData::new(*p, i)).collect::<Vec<_>>());
    let half = b.windows(2).map(|w| dist(&w[0], &w[1])).fold(0.0, f64::max) / 2.0;
    a.par_iter()
        .map(|p| {
            let nearest = tree.nearest_neighbor(*p).expect("nonempty tree");
            let r = dist(p, nearest.geom()) + half;
            tree.locate_within_distance(*p, r * r)
                .flat_map(|v| {
                    let i = v.data;
                    let lo = i.saturating_sub(1);
                    let hi = (i + 1).min(b.len() - 1);
                    (lo..hi).map(|k| point_segment(p, &b[k], &b[k + 1]))
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polylines (points of one against
/// segments of the other).
pub fn hausdorff(a: &[Point2], b: &[Point2]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed(a, b).max(directed(b, a))
}

/// Hausdorff distance of two dense traces: the arc-length resampled points
/// of each are measured against the full polyline of the other.
pub fn trace_distance(a: &[Point2], b: &[Point2]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let (ra, rb) = (resample_arc_length(a, RESAMPLE_POINTS), resample_arc_length(b, RESAMPLE_POINTS));
    directed_indexed(&ra, b).max(directed_indexed(&rb, a))
}

/// Hausdorff distance between the projections of two trajectories onto the
/// given pair of state components.
pub fn hausdorff_positions(a: &Trajectory, b: &Trajectory, comps: &[usize]) -> f64 {
    let (i, j) = (comps[0], comps[1]);
    let map = move |z: &[f64]| [z[i], z[j]];
    trace_distance(&dense_trace(a, DENSE_SPACING, &map), &dense_trace(b, DENSE_SPACING, &map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resampling_is_uniform() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 3.0]];
        let r = resample_arc_length(&pts, 5);
        assert_eq!(r.len(), 5);
        assert_eq!(r[0], [0.0, 0.0]);
        assert_eq!(r[4], [1.0, 3.0]);
        assert!((r[1][0] - 1.0).abs() < 1e-15 && r[1][1].abs() < 1e-15);
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![[0.0, 0.0], [1.0, 0.0]];
        let b = vec![[0.0, 0.5], [1.0, 0.5]];
        assert!((hausdorff(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a), 0.0);
        let c = vec![[0.0, 0.0], [2.0, 0.0]];
        assert!((hausdorff(&a, &c) - 1.0).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &c), hausdorff(&c, &a));
    }

    #[test]
    fn indexed_distance_matches_brute_force() {
        let b: Vec<Point2> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.013;
                [t.cos() * (1.0 + 0.1 * t), t.sin()]
            })
            .collect();
        let a: Vec<Point2> = (0..300).map(|i| [-1.5 + 0.01 * i as f64, 0.3 - 0.002 * i as f64]).collect();
        assert_eq!(directed_indexed(&a, &b), directed(&a, &b));
    }
}
