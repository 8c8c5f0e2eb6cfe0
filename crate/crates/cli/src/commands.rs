//! Subcommand implementations. Each returns `Ok(pass)` or a [`CliError`].

use crate::config::{require_c, resolve_output, AverageConfig, ClassifyConfig, CompareConfig, SimulateConfig, VerifyConfig};
use crate::output::{emit, read_bundle_csv, write_csv, write_json};
use crate::{AverageArgs, ClassifyArgs, CliError, CompareArgs, SimulateArgs, VerifyArgs, VERSION};
use kepler_euler::chart::conformal_metric;
use kepler_euler::dynamics::{
    compare_regularized, detect_periodicity, energy_drift_report, integrate, IntegratorConfig, OrbitClass, OrbitReport, Trajectory,
};
use kepler_euler::hamiltonian::{kepler_hamiltonian, phase_to_bundle, regularized_k, PhasePoint};
use kepler_euler::lift::{classify_geodesic, reeb_field, GeodesicClassification};
use kepler_euler::sampling::bundle_points;
use kepler_euler::suite::{haar_averaging_report, run_checks, Check, LiftedRegime};
use kepler_euler::{Chart, Error, VectorField, VerificationReport};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Energy agreement required between a phase state and the regime flag.
const ENERGY_MATCH: f64 = 1e-10;
/// Largest step for which simulate also classifies the bundle geodesic.
const CLASSIFY_MAX_STEP: f64 = 1e-3;

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, B: Serialize> {
    version: &'static str,
    command: &'static str,
    config: &'a C,
    pass: bool,
    #[serde(flatten)]
    body: B,
}

fn envelope<'a, C: Serialize, B: Serialize>(command: &'static str, config: &'a C, pass: bool, body: B) -> Envelope<'a, C, B> {
    Envelope { version: VERSION, command, config, pass, body }
}

fn vec2(v: &Option<Vec<f64>>) -> Option<[f64; 2]> {
    v.as_ref().map(|v| [v[0], v[1]])
}

fn vec3(v: &Option<Vec<f64>>) -> Option<[f64; 3]> {
    v.as_ref().map(|v| [v[0], v[1], v[2]])
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn phase_point(q: Option<[f64; 2]>, p: Option<[f64; 2]>) -> Result<PhasePoint, CliError> {
    match (q, p) {
        (Some(q), Some(p)) => Ok(PhasePoint::new(q, p)),
        _ => Err(CliError::Config("both --q and --p are required".into())),
    }
}

fn check_energy(c: f64, pt: &PhasePoint) -> Result<(), CliError> {
    let h = kepler_hamiltonian().eval_point(pt)?;
    if (h - c).abs() > ENERGY_MATCH {
        return Err(Error::EnergyMismatch { expected: c, actual: h }.into());
    }
    Ok(())
}

fn finish<C: Serialize, B: Serialize>(
    command: &'static str,
    cfg: &C,
    pass: bool,
    body: B,
    output: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<bool, CliError> {
    let env = envelope(command, cfg, pass, body);
    if let Some(path) = output {
        write_json(&resolve_output(path, out_dir), &env)?;
    }
    emit(&env);
    Ok(pass)
}

pub fn verify(a: &VerifyArgs, mut cfg: VerifyConfig, out_dir: Option<&Path>) -> Result<bool, CliError> {
    cfg.c = a.c.or(cfg.c);
    if a.all {
        cfg.which.clear();
    }
    if let Some(w) = &a.which {
        cfg.which = w.clone();
    }
    if let Some(n) = a.samples {
        cfg.suite.samples = n;
    }
    if let Some(s) = a.seed {
        cfg.suite.seed = s;
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    let c = require_c(cfg.c)?;
    let checks = if cfg.which.is_empty() { Check::ALL.to_vec() } else { cfg.which.clone() };
    let reports = run_checks(&checks, c, &cfg.suite)?;
    let pass = reports.iter().all(|r| r.pass);
    #[derive(Serialize)]
    struct Body {
        checks: Vec<VerificationReport>,
    }
    finish("verify", &cfg, pass, Body { checks: reports }, cfg.output.as_deref(), out_dir)
}

#[derive(Serialize)]
struct ErrorRecord {
    name: &'static str,
    message: String,
}

#[derive(Serialize)]
struct SimulateBody {
    mode: &'static str,
    csv: PathBuf,
    samples: usize,
    t_end: f64,
    energy_drift: Option<f64>,
    orbit: Option<OrbitReport>,
    geodesic: Option<GeodesicClassification>,
    error: Option<ErrorRecord>,
}

pub fn simulate(a: &SimulateArgs, mut cfg: SimulateConfig, out_dir: Option<&Path>) -> Result<bool, CliError> {
    cfg.c = a.c.or(cfg.c);
    cfg.direct |= a.direct;
    cfg.detect_period |= a.detect_period;
    if a.state.is_some() {
        cfg.state = vec3(&a.state);
    }
    if a.q.is_some() {
        cfg.q = vec2(&a.q);
    }
    if a.p.is_some() {
        cfg.p = vec2(&a.p);
    }
    if let Some(t) = a.tmax {
        cfg.tmax = t;
    }
    if let Some(h) = a.max_step {
        cfg.integrator.max_step = h;
    }
    if let Some(tol) = a.tol {
        cfg.integrator = cfg.integrator.with_tolerance(tol);
    }
    if let Some(o) = &a.output {
        cfg.output = o.clone();
    }
    positive("tmax", cfg.tmax)?;
    positive("period_tolerance", cfg.period_tolerance)?;
    cfg.integrator.validate()?;

    let (mode, z0, field, header, width, hamiltonian) = if cfg.direct {
        if cfg.state.is_some() {
            return Err(CliError::Config("--state is a bundle state; the direct flow takes --q and --p".into()));
        }
        let pt = phase_point(cfg.q, cfg.p)?;
        if let Some(c) = cfg.c {
            check_energy(require_c(Some(c))?, &pt)?;
        }
        let h = kepler_hamiltonian();
        let field = kepler_euler::hamiltonian::hamiltonian_vector_field(&h);
        ("direct", pt.to_state(), field, ["t", "q1", "q2", "p1", "p2"].as_slice(), 4, h)
    } else {
        let c = require_c(cfg.c)?;
        let z0 = match (cfg.state, cfg.q.is_some() || cfg.p.is_some()) {
            (Some(s), false) => s.to_vec(),
            (None, true) => {
                let pt = phase_point(cfg.q, cfg.p)?;
                check_energy(c, &pt)?;
                phase_to_bundle(c, &pt)?
            }
            (Some(_), true) => return Err(CliError::Config("give either --state or --q/--p, not both".into())),
            (None, false) => return Err(CliError::Config("an initial state is required (--state or --q/--p)".into())),
        };
        let field = reeb_field(c);
        if !field.chart.contains(&z0) {
            return Err(Error::OutOfDomain { chart: field.chart.to_string(), point: z0 }.into());
        }
        ("bundle", z0, field, ["t", "x1", "x2", "alpha"].as_slice(), 3, regularized_k(c))
    };

    let (traj, error) = match integrate(&field, &z0, cfg.tmax, &cfg.integrator) {
        Ok(t) => (t, None),
        Err(e @ (Error::Collision { .. } | Error::LeftDomain { .. } | Error::StepSizeUnderflow { .. })) => {
            let record = ErrorRecord { name: e.name(), message: e.to_string() };
            let partial = match e {
                Error::Collision { time, partial } => (*partial, Some(time)),
                Error::LeftDomain { partial, .. } | Error::StepSizeUnderflow { partial, .. } => (*partial, None),
                _ => unreachable!(),
            };
            (partial.0, Some((record, partial.1)))
        }
        Err(e) => return Err(e.into()),
    };

    let csv_path = resolve_output(&cfg.output, out_dir);
    write_csv(&csv_path, header, &traj.samples, width)?;
    let energy_drift = energy_drift_report(&traj, &hamiltonian).ok();
    let orbit = match &error {
        Some((_, Some(time))) => Some(OrbitReport { classification: OrbitClass::Collision { time: *time }, return_residual: f64::NAN }),
        _ if cfg.detect_period => Some(detect_periodicity(&traj, cfg.period_tolerance)?),
        _ => None,
    };
    let geodesic = if mode == "bundle" && error.is_none() && cfg.integrator.max_step <= CLASSIFY_MAX_STEP {
        classify_geodesic(&traj, &conformal_metric(cfg.c.unwrap_or_default()), &Default::default()).ok()
    } else {
        None
    };
    let pass = error.is_none();
    let body = SimulateBody {
        mode,
        csv: cfg.output.clone(),
        samples: traj.len(),
        t_end: traj.t_end(),
        energy_drift,
        orbit,
        geodesic,
        error: error.map(|(r, _)| r),
    };
    let sidecar = csv_path.with_extension("json");
    let env = envelope("simulate", &cfg, pass, body);
    write_json(&sidecar, &env)?;
    emit(&env);
    Ok(pass)
}

pub fn compare(a: &CompareArgs, mut cfg: CompareConfig, out_dir: Option<&Path>) -> Result<bool, CliError> {
    cfg.c = a.c.or(cfg.c);
    if a.q.is_some() {
        cfg.q = vec2(&a.q);
    }
    if a.p.is_some() {
        cfg.p = vec2(&a.p);
    }
    if let Some(t) = a.tmax {
        cfg.tmax = t;
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    let c = require_c(cfg.c)?;
    positive("tmax", cfg.tmax)?;
    cfg.integrator.validate()?;
    let pt = phase_point(cfg.q, cfg.p)?;
    let report = compare_regularized(c, &pt, cfg.tmax, &cfg.integrator)?;
    let pass = report.pass;
    #[derive(Serialize)]
    struct Body {
        report: VerificationReport,
    }
    finish("compare", &cfg, pass, Body { report }, cfg.output.as_deref(), out_dir)
}

pub fn average_metric(a: &AverageArgs, mut cfg: AverageConfig, out_dir: Option<&Path>) -> Result<bool, CliError> {
    cfg.c = a.c.or(cfg.c);
    if let Some(n) = a.samples {
        cfg.samples = n;
    }
    if let Some(n) = a.nodes {
        cfg.nodes = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    let c = require_c(cfg.c)?;
    if cfg.samples == 0 || cfg.nodes < 2 {
        return Err(CliError::Config(format!("need samples >= 1 and nodes >= 2, got {} and {}", cfg.samples, cfg.nodes)));
    }
    let r = LiftedRegime::new(c)?;
    let probes = bundle_points(c, cfg.samples, cfg.seed);
    let (average, doubling) = haar_averaging_report(&r, &probes, cfg.nodes)?;
    let pass = average.pass && doubling.pass;
    #[derive(Serialize)]
    struct Body {
        checks: [VerificationReport; 2],
    }
    finish("average-metric", &cfg, pass, Body { checks: [average, doubling] }, cfg.output.as_deref(), out_dir)
}

pub fn classify(a: &ClassifyArgs, mut cfg: ClassifyConfig, out_dir: Option<&Path>) -> Result<bool, CliError> {
    cfg.c = a.c.or(cfg.c);
    if a.input.is_some() {
        cfg.input = a.input.clone();
        cfg.state = None;
    }
    if a.state.is_some() {
        cfg.state = vec3(&a.state);
        cfg.input = None;
    }
    if let Some(d) = a.fiber_drift {
        cfg.fiber_drift = d;
    }
    if let Some(t) = a.tmax {
        cfg.tmax = t;
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    let c = require_c(cfg.c)?;
    let chart = Chart::bundle(Chart::StereoPlane(c));
    let traj: Trajectory = match (&cfg.input, cfg.state) {
        (Some(path), _) => read_bundle_csv(path, chart)?,
        (None, Some(s)) => {
            positive("tmax", cfg.tmax)?;
            positive("max_step", cfg.max_step)?;
            if !cfg.fiber_drift.is_finite() {
                return Err(CliError::Config(format!("fiber drift must be finite, got {}", cfg.fiber_drift)));
            }
            let field = reeb_field(c).add(&VectorField::constant(chart, vec![0.0, 0.0, cfg.fiber_drift]));
            if !field.chart.contains(&s) {
                return Err(Error::OutOfDomain { chart: field.chart.to_string(), point: s.to_vec() }.into());
            }
            let icfg = IntegratorConfig::default().with_max_step(cfg.max_step);
            integrate(&field, &s, cfg.tmax, &icfg)?
        }
        (None, None) => return Err(CliError::Config("give --input or --state".into())),
    };
    let result = classify_geodesic(&traj, &conformal_metric(c), &cfg.thresholds)?;
    #[derive(Serialize)]
    struct Body {
        classification: GeodesicClassification,
    }
    finish("classify", &cfg, true, Body { classification: result }, cfg.output.as_deref(), out_dir)
}
