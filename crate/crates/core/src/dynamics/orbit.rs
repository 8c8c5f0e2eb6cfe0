//! First-return detection, escape heuristics and energy drift.

use super::integrator::hermite;
use super::trajectory::Trajectory;
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::hamiltonian::{bundle_to_phase, Hamiltonian, HamiltonianLabel};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrbitClass {
    Periodic { period: f64 },
    Escape { direction: String },
    Collision { time: f64 },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub classification: OrbitClass,
    /// Smallest refined distance to the initial state after departure.
    pub return_residual: f64,
}

fn circular(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    r.min(TAU - r)
}

fn sq_distance(a: &[f64], b: &[f64], angles: &[usize]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let d = if angles.contains(&i) { circular(x - y) } else { x - y };
            d * d
        })
        .sum()
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Index from which `values` is monotone to the end, if the monotone tail
/// covers at least the last quarter and changes by more than 10%. Returns
/// the index and whether the tail increases.
pub fn eventually_monotone(values: &[f64]) -> Option<(usize, bool)> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let inc = values[n - 1] > values[n - 2];
    let mut start = n - 1;
    while start > 0 {
        let step = values[start] - values[start - 1];
        if (inc && step > 0.0) || (!inc && step < 0.0) {
            start -= 1;
        } else {
            break;
        }
    }
    let covers = n - start >= n / 4;
    let (a, b) = (values[start], values[n - 1]);
    let change = (b - a).abs() > 0.1 * a.abs().max(b.abs());
    (covers && change).then_some((start, inc))
}

/// Finds the first return of the trajectory to its initial state within
/// `tol` (angle coordinates compared on the circle); otherwise classifies the
/// tail as an escape when a monotone trend is visible.
pub fn detect_periodicity(traj: &Trajectory, tol: f64) -> Result<OrbitReport> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::TooSparse(format!("{n} samples")));
    }
    let angles = traj.chart.angle_components();
    let z0 = traj.first().state.clone();
    let dim = traj.chart.dim().min(z0.len());
    let d2 = |z: &[f64]| sq_distance(&z[..dim], &z0[..dim], &angles);
    let d: Vec<f64> = traj.samples.iter().map(|s| d2(&s.state)).collect();
    let depart = (100.0 * tol * tol).max(1e-12);
    let mut best = f64::INFINITY;
    if let Some(i0) = d.iter().position(|&v| v > depart) {
        for i in (i0 + 1).max(1)..n - 1 {
            if d[i] <= d[i - 1] && d[i] <= d[i + 1] {
                let s = &traj.samples;
                let f = |t: f64| {
                    let k = if t <= s[i].t { i } else { i + 1 };
                    d2(&hermite(&s[k - 1], &s[k], t))
                };
                let (t, v) = golden_section(f, s[i - 1].t, s[i + 1].t, 120);
                let r = v.max(0.0).sqrt();
                best = best.min(r);
                if r < tol {
                    return Ok(OrbitReport { classification: OrbitClass::Periodic { period: t - traj.first().t }, return_residual: r });
                }
            }
        }
    }
    let (series, label): (Vec<f64>, fn(bool) -> String) = match traj.chart {
        Chart::Bundle(ref b) if matches!(**b, Chart::HalfPlane(_)) => {
            (traj.samples.iter().map(|s| s.state[1]).collect(), |inc| if inc { "y -> +inf".to_string() } else { "y -> 0".to_string() })
        }
        _ => {
            let base: Vec<usize> = (0..dim).filter(|i| !angles.contains(i)).collect();
            (traj.samples.iter().map(|s| base.iter().map(|&i| s.state[i] * s.state[i]).sum::<f64>().sqrt()).collect(), |inc| {
                if inc {
                    "outward".to_string()
                } else {
                    "inward".to_string()
                }
            })
        }
    };
    let classification = match eventually_monotone(&series) {
        Some((_, inc)) => OrbitClass::Escape { direction: label(inc) },
        None => OrbitClass::Undetermined,
    };
    Ok(OrbitReport { classification, return_residual: best })
}

/// `max |H(z(t)) − H(z(0))|` along a phase trajectory, or along a bundle
/// trajectory of regime `c` for `H = K_c` (mapped through the switch).
pub fn energy_drift_report(traj: &Trajectory, h: &Hamiltonian) -> Result<f64> {
    let states: Vec<Vec<f64>> = match (&traj.chart, &h.label) {
        (Chart::PhaseChart4D, _) => traj.samples.iter().map(|s| s.state[..4].to_vec()).collect(),
        (Chart::Bundle(b), HamiltonianLabel::K(c)) if **b == Chart::StereoPlane(*c) => {
            traj.samples.iter().map(|s| bundle_to_phase(*c, &s.state).to_state()).collect()
        }
        _ => return Err(Error::ChartMismatch(traj.chart.to_string(), format!("{:?}", h.label))),
    };
    let Some(first) = states.first() else {
        return Ok(0.0);
    };
    let h0 = h.eval(first)?;
    let mut drift = 0.0f64;
    for z in &states {
        drift = drift.max((h.eval(z)? - h0).abs());
    }
    Ok(drift)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}
