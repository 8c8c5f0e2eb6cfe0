//! The regularized Kepler flow on a two-chart atlas of the unit cotangent
//! bundle, mapped back to physical positions.
//!
//! A bundle point `(x, α)` of the regime chart corresponds to the phase
//! state `(q, p) = (y, −x)` with `y` the unit covector; physical time runs
//! at `dt/dτ = |q|` along the Reeb flow. The collision `q = 0` lies at
//! `x = ∞`, the origin of the second chart, where
//! `q = (1/k)·M·(|z|² y_z − 2 z (z·y_z))` stays smooth (`k = 2|c|`,
//! `M = diag(1, −1)` for `c ≠ 0`; `k = 2`, `M = I` for `c = 0`).

use super::integrate;
use super::integrator::{solve, Event, IntegratorConfig};
use super::trace::{dense_trace, trace_distance, Point2, DENSE_SPACING};
use super::trajectory::Trajectory;
use crate::ad::{constants, jacobian_f64, Dual};
use crate::chart::{chart_transition, conformal_metric, conformal_metric_dual, Chart, MetricField};
use crate::error::{Error, Result};
use crate::forms::VectorField;
use crate::hamiltonian::{hamiltonian_vector_field, kepler_hamiltonian, PhasePoint};
use crate::lift::{involuted_metric, reeb_field_for, unit_covector};
use crate::linalg;
use crate::report::VerificationReport;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    North,
    South,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::North => Side::South,
            Side::South => Side::North,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegimeAtlas {
    pub c: f64,
    metrics: [MetricField; 2],
    fields: [VectorField; 2],
}

fn ix(side: Side) -> usize {
    match side {
        Side::North => 0,
        Side::South => 1,
    }
}

impl RegimeAtlas {
    pub fn new(c: f64) -> Self {
        let south = if c == 0.0 { involuted_metric() } else { conformal_metric_dual(c) };
        let north = conformal_metric(c);
        let fields = [reeb_field_for(&north), reeb_field_for(&south)];
        RegimeAtlas { c, metrics: [north, south], fields }
    }

    pub fn metric(&self, side: Side) -> &MetricField {
        &self.metrics[ix(side)]
    }

    pub fn field(&self, side: Side) -> &VectorField {
        &self.fields[ix(side)]
    }

    pub fn chart(&self, side: Side) -> Chart {
        Chart::bundle(self.metrics[ix(side)].chart.clone())
    }

    /// Squared base radius above which the flow leaves `side`.
    pub fn exit_radius_sq(&self, side: Side) -> f64 {
        let c = self.c;
        match (side, c.partial_cmp(&0.0).unwrap()) {
            (_, std::cmp::Ordering::Less) => 8.0 * c.abs(),
            (_, std::cmp::Ordering::Equal) => 4.0,
            (Side::North, _) => 8.0 * c,
            (Side::South, _) => c,
        }
    }

    fn k_and_flip(&self) -> (f64, f64) {
        if self.c == 0.0 {
            (2.0, 1.0)
        } else {
            (2.0 * self.c.abs(), -1.0)
        }
    }

    /// Physical position `q` of a bundle point.
    pub fn position_dual(&self, side: Side, p: &[Dual]) -> [Dual; 2] {
        let y = unit_covector(self.metric(side), &p[..2], &p[2]);
        match side {
            Side::North => y,
            Side::South => {
                let (k, flip) = self.k_and_flip();
                let z = &p[..2];
                let r2 = &z[0] * &z[0] + &z[1] * &z[1];
                let zy = &z[0] * &y[0] + &z[1] * &y[1];
                let a = (&r2 * &y[0] - &z[0] * &zy * 2.0) / k;
                let b = (&r2 * &y[1] - &z[1] * &zy * 2.0) / k;
                [a, b * flip]
            }
        }
    }

    pub fn position(&self, side: Side, p: &[f64]) -> Point2 {
        let q = self.position_dual(side, &constants(&p[..3]));
        [q[0].value(), q[1].value()]
    }

    /// Physical momentum `p = −x` of a bundle point.
    pub fn momentum(&self, side: Side, p: &[f64]) -> Point2 {
        match side {
            Side::North => [-p[0], -p[1]],
            Side::South => {
                let x = crate::chart::chart_transition_f64(self.c, &p[..2]);
                [-x[0], -x[1]]
            }
        }
    }

    /// The same bundle point in the other chart.
    pub fn switch_point(&self, side: Side, p: &[f64]) -> Vec<f64> {
        let c = self.c;
        let y = unit_covector(self.metric(side), &constants(&p[..2]), &Dual::constant(p[2]));
        let b = crate::chart::chart_transition_f64(c, &p[..2]);
        // y_b = DT(b)ᵀ y_a since T is an involution
        let dt = jacobian_f64(|w: &[Dual]| chart_transition(c, w), &b);
        let yb = [dt[0][0] * y[0].value() + dt[1][0] * y[1].value(), dt[0][1] * y[0].value() + dt[1][1] * y[1].value()];
        let l = linalg::to_f64(&linalg::cholesky(&self.metric(side.other()).eval_dual(&constants(&b)), 2));
        let u0 = yb[0] / l[0];
        let u1 = (yb[1] - l[2] * u0) / l[3];
        vec![b[0], b[1], u1.atan2(u0).rem_euclid(TAU)]
    }

    /// Bundle point of a phase state on the level `H = c`, in the chart that
    /// does not need an immediate switch.
    pub fn from_phase(&self, pt: &PhasePoint) -> Result<(Side, Vec<f64>)> {
        let x = [-pt.p[0], -pt.p[1]];
        let north = Chart::StereoPlane(self.c);
        if !north.contains(&x) {
            return Err(Error::OutOfDomain { chart: north.to_string(), point: x.to_vec() });
        }
        let g = self.metric(Side::North).eval(&x);
        let l = linalg::to_f64(&linalg::cholesky(&constants(&g), 2));
        let u0 = pt.q[0] / l[0];
        let u1 = (pt.q[1] - l[2] * u0) / l[3];
        let p = vec![x[0], x[1], u1.atan2(u0).rem_euclid(TAU)];
        if x[0] * x[0] + x[1] * x[1] > self.exit_radius_sq(Side::North) {
            Ok((Side::South, self.switch_point(Side::North, &p)))
        } else {
            Ok((Side::North, p))
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegularizedSegment {
    pub side: Side,
    /// States `(x₁, x₂, α, t)` against the regularized time `τ`.
    pub traj: Trajectory,
}

#[derive(Clone, Debug)]
pub struct RegularizedRun {
    pub c: f64,
    pub atlas: RegimeAtlas,
    pub segments: Vec<RegularizedSegment>,
    /// Physical time reached.
    pub clock_end: f64,
    pub tau_end: f64,
    /// Largest jump in `(q, p)` across chart switches, relative to `|p|`.
    pub transition_residual: f64,
}

impl RegularizedRun {
    pub fn switches(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    pub fn position_trace(&self) -> Vec<Point2> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let side = seg.side;
            let pts = dense_trace(&seg.traj, DENSE_SPACING, &|z: &[f64]| self.atlas.position(side, z));
            let skip = usize::from(!out.is_empty());
            out.extend(pts.into_iter().skip(skip));
        }
        out
    }

    /// Smallest `|q|` over the samples.
    pub fn min_radius(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| s.traj.samples.iter().map(move |x| (s.side, x)))
            .map(|(side, x)| {
                let q = self.atlas.position(side, &x.state);
                q[0].hypot(q[1])
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Integrates the regularized flow from a phase state until the physical
/// clock reaches `clock_target` or the regularized time reaches `tau_max`.
pub fn integrate_regularized(c: f64, z0: &PhasePoint, clock_target: f64, tau_max: f64, cfg: &IntegratorConfig) -> Result<RegularizedRun> {
    let atlas = RegimeAtlas::new(c);
    let (mut side, p0) = atlas.from_phase(z0)?;
    let mut state = vec![p0[0], p0[1], p0[2], 0.0];
    let mut tau = 0.0;
    let mut segments = Vec::new();
    let mut transition_residual = 0.0f64;
    let mut remaining_steps = cfg.max_steps;
    loop {
        let field = atlas.field(side).clone();
        let a2 = atlas.clone();
        let s = side;
        let rhs = move |z: &[f64]| {
            let mut v = field.eval(&z[..3]);
            let q = a2.position(s, z);
            v.push(q[0].hypot(q[1]));
            v
        };
        let chart = atlas.chart(side);
        let dchart = chart.clone();
        let domain = move |z: &[f64]| dchart.contains(&z[..3]);
        let exit = atlas.exit_radius_sq(side);
        let events = [
            Event::new("clock", move |z: &[f64]| clock_target - z[3]),
            Event::new("chart_exit", move |z: &[f64]| exit - (z[0] * z[0] + z[1] * z[1])),
        ];
        let seg_cfg = IntegratorConfig { max_steps: remaining_steps, ..cfg.clone() };
        let out = solve(&chart, &rhs, &domain, &state, tau, tau_max, &seg_cfg, &events)?;
        remaining_steps = remaining_steps.saturating_sub(out.traj.meta.accepted_steps + out.traj.meta.rejected_steps);
        let last = out.traj.last().clone();
        tau = last.t;
        segments.push(RegularizedSegment { side, traj: out.traj });
        match out.stop {
            Some((1, _)) => {
                let before_q = atlas.position(side, &last.state);
                let before_p = atlas.momentum(side, &last.state);
                let switched = atlas.switch_point(side, &last.state);
                side = side.other();
                let after_q = atlas.position(side, &switched);
                let after_p = atlas.momentum(side, &switched);
                let scale = before_p[0].hypot(before_p[1]).max(1.0);
                let jump = (before_q[0] - after_q[0])
                    .abs()
                    .max((before_q[1] - after_q[1]).abs())
                    .max((before_p[0] - after_p[0]).abs() / scale)
                    .max((before_p[1] - after_p[1]).abs() / scale);
                transition_residual = transition_residual.max(jump);
                state = vec![switched[0], switched[1], switched[2], last.state[3]];
                if remaining_steps == 0 {
                    return Err(Error::StepSizeUnderflow { t: tau, partial: Box::new(segments.pop().unwrap().traj) });
                }
            }
            _ => {
                return Ok(RegularizedRun { c, atlas, clock_end: last.state[3], tau_end: tau, segments, transition_residual });
            }
        }
    }
}

/// Direct Kepler trajectory from a phase state.
pub fn integrate_direct(z0: &PhasePoint, tmax: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate(&hamiltonian_vector_field(&kepler_hamiltonian()), &z0.to_state(), tmax, cfg)
}

/// Hausdorff tolerance of the full comparison.
pub const COMPARE_TOLERANCE: f64 = 1e-5;
/// Hausdorff tolerance when the direct flow stops at a collision.
pub const WINDOWED_TOLERANCE: f64 = 1e-4;

/// Integrates the direct Kepler flow and the regularized flow from the same
/// state over `[0, t_end]` of physical time and compares the position
/// traces. If the direct flow collides, the comparison is restricted to the
/// window before the collision.
pub fn compare_regularized(c: f64, z0: &PhasePoint, t_end: f64, cfg: &IntegratorConfig) -> Result<VerificationReport> {
    let h = kepler_hamiltonian().eval_point(z0)?;
    if (h - c).abs() > 1e-10 {
        return Err(Error::EnergyMismatch { expected: c, actual: h });
    }
    let (direct, window, collision) = match integrate_direct(z0, t_end, cfg) {
        Ok(t) => (t, t_end, None),
        Err(Error::Collision { time, partial }) => (*partial, time, Some(time)),
        Err(e) => return Err(e),
    };
    let run = integrate_regularized(c, z0, window, 1e6, cfg)?;
    let a = dense_trace(&direct, DENSE_SPACING, &|z: &[f64]| [z[0], z[1]]);
    let b = run.position_trace();
    let dist = trace_distance(&a, &b);
    let tol = if collision.is_some() { WINDOWED_TOLERANCE } else { COMPARE_TOLERANCE };
    let mut rep = VerificationReport::from_residuals("compare_regularized", Some(c), &[dist], tol)
        .with_detail("hausdorff", dist)
        .with_detail("window_end", window)
        .with_detail("windowed", if collision.is_some() { 1.0 } else { 0.0 })
        .with_detail("regularized_clock_end", run.clock_end)
        .with_detail("chart_switches", run.switches() as f64)
        .with_detail("transition_residual", run.transition_residual);
    if let Some(t) = collision {
        rep = rep
            .with_detail("collision_time", t)
            .with_note(format!("direct flow collided at t = {t:.12e}; traces compared up to the collision"));
    }
    rep.pass = rep.pass && (run.clock_end - window).abs() < 1e-8;
    Ok(rep)
}
