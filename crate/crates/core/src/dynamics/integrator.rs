use super::trajectory::{Method, Sample, Trajectory, TrajectoryMeta};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::forms::{ScalarField, VectorField};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step; the fixed step of the non-adaptive methods.
    pub max_step: f64,
    /// Direct Kepler integration stops once `|q|` drops below this radius.
    pub collision_radius: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::EmbeddedRK45Adaptive,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: 0.05,
            collision_radius: 1e-3,
            initial_step: 1e-3,
            min_step: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self.rel_tol = tol;
        self
    }

    pub fn with_collision_radius(mut self, r: f64) -> Self {
        self.collision_radius = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.abs_tol) && pos(self.rel_tol) && pos(self.max_step) && pos(self.initial_step) && pos(self.min_step)) {
            return Err(Error::InvalidConfig("tolerances and step sizes must be positive".into()));
        }
        if !(self.collision_radius >= 0.0) {
            return Err(Error::InvalidConfig("collision_radius must be nonnegative".into()));
        }
        Ok(())
    }

    fn meta(&self) -> TrajectoryMeta {
        TrajectoryMeta {
            method: self.method,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_step: self.max_step,
            accepted_steps: 0,
            rejected_steps: 0,
            energy_drift: None,
            events: Vec::new(),
        }
    }
}

pub type Rhs<'a> = &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync);

/// Terminal event: integration stops when `g` goes from positive to
/// nonpositive.
#[derive(Clone)]
pub struct Event {
    pub name: String,
    pub g: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Event {
    pub fn new<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(name: &str, g: F) -> Self {
        Event { name: name.to_string(), g: Arc::new(g) }
    }
}

pub struct Outcome {
    pub traj: Trajectory,
    /// Index into the event list and time of the terminal event, if any.
    pub stop: Option<(usize, f64)>,
}

/// Cubic Hermite interpolation between two samples.
pub fn hermite(a: &Sample, b: &Sample, t: f64) -> Vec<f64> {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..a.state.len()).map(|i| h00 * a.state[i] + h10 * h * a.deriv[i] + h01 * b.state[i] + h11 * h * b.deriv[i]).collect()
}

/// Interpolated state at time `t` within the trajectory's span.
pub fn state_at(traj: &Trajectory, t: f64) -> Vec<f64> {
    let s = &traj.samples;
    let i = s.partition_point(|x| x.t <= t).clamp(1, s.len() - 1);
    hermite(&s[i - 1], &s[i], t)
}

fn axpy(z: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = z.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += h * c * v;
            }
        }
    }
    out
}

fn rk4_step(f: Rhs, z: &[f64], k1: &[f64], h: f64) -> Vec<f64> {
    let k2 = f(&axpy(z, h, &[(0.5, k1)]));
    let k3 = f(&axpy(z, h, &[(0.5, &k2)]));
    let k4 = f(&axpy(z, h, &[(1.0, &k3)]));
    axpy(z, h, &[(1.0 / 6.0, k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)])
}

/// Dormand–Prince 5(4) step; returns the fifth-order solution, its
/// derivative and the embedded error vector.
fn dp45_step(f: Rhs, z: &[f64], k1: &[f64], h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let k2 = f(&axpy(z, h, &[(1.0 / 5.0, k1)]));
    let k3 = f(&axpy(z, h, &[(3.0 / 40.0, k1), (9.0 / 40.0, &k2)]));
    let k4 = f(&axpy(z, h, &[(44.0 / 45.0, k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]));
    let k5 = f(&axpy(z, h, &[(19372.0 / 6561.0, k1), (-25360.0 / 2187.0, &k2), (64448.0 / 6561.0, &k3), (-212.0 / 729.0, &k4)]));
    let k6 = f(&axpy(
        z,
        h,
        &[(9017.0 / 3168.0, k1), (-355.0 / 33.0, &k2), (46732.0 / 5247.0, &k3), (49.0 / 176.0, &k4), (-5103.0 / 18656.0, &k5)],
    ));
    let y = axpy(z, h, &[(35.0 / 384.0, k1), (500.0 / 1113.0, &k3), (125.0 / 192.0, &k4), (-2187.0 / 6784.0, &k5), (11.0 / 84.0, &k6)]);
    let k7 = f(&y);
    let e = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let ks: [&[f64]; 7] = [k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let err: Vec<f64> = (0..z.len()).map(|i| h * (0..7).map(|s| e[s] * ks[s][i]).sum::<f64>()).collect();
    (y, k7, err)
}

fn implicit_midpoint_step(f: Rhs, z: &[f64], k1: &[f64], h: f64) -> Option<Vec<f64>> {
    let mut z1 = axpy(z, h, &[(1.0, k1)]);
    for _ in 0..100 {
        let mid: Vec<f64> = z.iter().zip(&z1).map(|(a, b)| 0.5 * (a + b)).collect();
        let next = axpy(z, h, &[(1.0, &f(&mid))]);
        let diff = next.iter().zip(&z1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().map(|v| v.abs()).fold(1.0, f64::max);
        z1 = next;
        if diff <= 1e-15 * scale {
            return Some(z1);
        }
    }
    None
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates the autonomous system `ż = f(z)` from `(t0, z0)` to `tmax`,
/// stopping at the first terminal event. `domain` rejects states outside the
/// chart; adaptive steps shrink to stay inside, fixed steps fail.
pub fn solve(
    chart: &Chart,
    f: Rhs,
    domain: &(dyn Fn(&[f64]) -> bool + Sync),
    z0: &[f64],
    t0: f64,
    tmax: f64,
    cfg: &IntegratorConfig,
    events: &[Event],
) -> Result<Outcome> {
    cfg.validate()?;
    if !domain(z0) {
        return Err(Error::OutOfDomain { chart: chart.to_string(), point: z0.to_vec() });
    }
    let mut traj = Trajectory { chart: chart.clone(), samples: Vec::new(), meta: cfg.meta() };
    let mut cur = Sample { t: t0, state: z0.to_vec(), deriv: f(z0) };
    traj.samples.push(cur.clone());
    let adaptive = cfg.method == Method::EmbeddedRK45Adaptive;
    let mut h = if adaptive { cfg.initial_step.min(cfg.max_step) } else { cfg.max_step };
    let mut steps = 0usize;
    while cur.t < tmax {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::StepSizeUnderflow { t: cur.t, partial: Box::new(traj) });
        }
        let remaining = tmax - cur.t;
        let mut hs = h.min(cfg.max_step).min(remaining);
        if hs < remaining && remaining - hs < 1e-6 * hs {
            // split rather than leave a rounding-size final step
            hs = 0.5 * remaining;
        }
        let last = hs >= remaining;
        let (next, dnext, err) = match cfg.method {
            Method::ExplicitRK4 => {
                let y = rk4_step(f, &cur.state, &cur.deriv, hs);
                let d = f(&y);
                (y, d, 0.0)
            }
            Method::ImplicitMidpoint => match implicit_midpoint_step(f, &cur.state, &cur.deriv, hs) {
                Some(y) => {
                    let d = f(&y);
                    (y, d, 0.0)
                }
                None => return Err(Error::StepSizeUnderflow { t: cur.t, partial: Box::new(traj) }),
            },
            Method::EmbeddedRK45Adaptive => {
                let (y, d, e) = dp45_step(f, &cur.state, &cur.deriv, hs);
                let norm = e
                    .iter()
                    .zip(cur.state.iter().zip(&y))
                    .map(|(ei, (a, b))| {
                        let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
                        (ei / sc).powi(2)
                    })
                    .sum::<f64>();
                (y, d, (norm / e.len() as f64).sqrt())
            }
        };
        let ok_state = finite(&next) && finite(&dnext) && domain(&next);
        if adaptive {
            if !ok_state || !err.is_finite() || err > 1.0 {
                traj.meta.rejected_steps += 1;
                h = if ok_state && err.is_finite() { hs * (0.9 * err.powf(-0.2)).max(0.2) } else { hs * 0.25 };
                if h < cfg.min_step {
                    return Err(if ok_state {
                        Error::StepSizeUnderflow { t: cur.t, partial: Box::new(traj) }
                    } else {
                        Error::LeftDomain { t: cur.t, partial: Box::new(traj) }
                    });
                }
                continue;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = hs * grow;
        } else if !ok_state {
            return Err(Error::LeftDomain { t: cur.t, partial: Box::new(traj) });
        }
        traj.meta.accepted_steps += 1;
        let t_next = if last { tmax } else { cur.t + hs };
        let new = Sample { t: t_next, state: next, deriv: dnext };
        for (ei, ev) in events.iter().enumerate() {
            let (ga, gb) = ((ev.g)(&cur.state), (ev.g)(&new.state));
            if ga > 0.0 && gb <= 0.0 {
                let (mut lo, mut hi) = (cur.t, new.t);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (ev.g)(&hermite(&cur, &new, mid)) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let zs = hermite(&cur, &new, hi);
                if hi > cur.t {
                    let d = f(&zs);
                    traj.samples.push(Sample { t: hi, state: zs, deriv: d });
                }
                traj.meta.events.push(format!("{} at t = {hi:e}", ev.name));
                return Ok(Outcome { traj, stop: Some((ei, hi)) });
            }
        }
        traj.samples.push(new.clone());
        cur = new;
    }
    Ok(Outcome { traj, stop: None })
}

/// Collision radius `|q|` of a phase state.
fn q_radius(z: &[f64]) -> f64 {
    z[0].hypot(z[1])
}

/// Integrates a vector field on its chart. On the phase chart a positive
/// `collision_radius` adds a collision event, reported as
/// [`Error::Collision`].
pub fn integrate(field: &VectorField, z0: &[f64], tmax: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let chart = field.chart.clone();
    let rhs = |z: &[f64]| field.eval(z);
    let dom_chart = chart.clone();
    let domain = move |z: &[f64]| dom_chart.contains(z);
    let mut events = Vec::new();
    if chart == Chart::PhaseChart4D && cfg.collision_radius > 0.0 {
        let r = cfg.collision_radius;
        if q_radius(z0) <= r {
            return Err(Error::CollisionSingularity(q_radius(z0)));
        }
        events.push(Event::new("collision", move |z| q_radius(z) - r));
    }
    let out = solve(&chart, &rhs, &domain, z0, 0.0, tmax, cfg, &events)?;
    match out.stop {
        Some((_, t)) => Err(Error::Collision { time: t, partial: Box::new(out.traj) }),
        None => Ok(out.traj),
    }
}

/// Integrates `ż = X(z)` augmented with the clock `ṫ = G(z)` until the clock
/// reaches `t_target`. The returned states carry the clock as their last
/// component.
pub fn integrate_clocked(field: &VectorField, g: &ScalarField, z0: &[f64], t_target: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let n = z0.len();
    let chart = field.chart.clone();
    let rhs = |z: &[f64]| {
        let mut v = field.eval(&z[..n]);
        v.push(g.eval(&z[..n]));
        v
    };
    let dom_chart = chart.clone();
    let domain = move |z: &[f64]| dom_chart.contains(&z[..n]);
    let mut start = z0.to_vec();
    start.push(0.0);
    let ev = Event::new("clock", move |z: &[f64]| t_target - z[n]);
    let out = solve(&Chart::Euclidean(n + 1), &rhs, &domain, &start, 0.0, f64::MAX / 4.0, cfg, &[ev])?;
    let mut traj = out.traj;
    traj.chart = chart;
    Ok(traj)
}
