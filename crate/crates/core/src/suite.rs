//! The named verification checks behind `kepler-euler verify`.
//!
//! Every check samples the regime's bundle chart with a seeded generator, so
//! a fixed [`SuiteConfig`] gives bitwise identical reports.

use crate::chart::{conformal_metric, gauss_curvature};
use crate::correspondence::{
    haar_average_metric, kepler_invariance_report, kepler_symmetry_action, reeb_to_metric, reeb_to_metric_with, CONTACT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::forms::{contact_check, contact_volume, curl, divergence, flat, sweep};
use crate::hamiltonian::{NOTE_ALPHA_COMPONENT, NOTE_REEB_SIGN};
use crate::lift::{adapted_metric_check, curvature_report, lift_metric, liouville_form, reeb_field};
use crate::linalg::frobenius_diff;
use crate::sampling::{base_points, bundle_points, DEFAULT_SEED};
use crate::{ChartPoint, Dual, KForm, MetricField, VectorField, VerificationReport, VolumeForm};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const BELTRAMI_TOLERANCE: f64 = 1e-8;
pub const DIVERGENCE_TOLERANCE: f64 = 1e-9;
pub const ADAPTED_TOLERANCE: f64 = 1e-9;
pub const CURVATURE_TOLERANCE: f64 = 1e-8;
pub const LIFT_CURVATURE_TOLERANCE: f64 = 1e-6;
/// Smallest sectional-curvature spread accepted as "nonconstant".
pub const NONCONSTANT_SPREAD: f64 = 1e-3;
pub const INVARIANCE_TOLERANCE: f64 = 1e-9;
pub const AVERAGED_INVARIANCE_TOLERANCE: f64 = 1e-10;
pub const DOUBLING_AGREEMENT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Adapted,
    Beltrami,
    Contact,
    Curvature,
    Divergence,
    Equivariance,
}

impl Check {
    /// All checks in report order.
    pub const ALL: [Check; 6] = [Check::Adapted, Check::Beltrami, Check::Contact, Check::Curvature, Check::Divergence, Check::Equivariance];

    pub fn name(self) -> &'static str {
        match self {
            Check::Adapted => "adapted",
            Check::Beltrami => "beltrami",
            Check::Contact => "contact",
            Check::Curvature => "curvature",
            Check::Divergence => "divergence",
            Check::Equivariance => "equivariance",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.name() == s.trim()).ok_or_else(|| Error::InvalidConfig(format!("unknown check `{s}`")))
    }
}

/// Sample sizes for the sweeps. The lifted-curvature and symmetry checks
/// evaluate third derivatives or group orbits per sample and use their own,
/// smaller counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    pub lift_curvature_samples: usize,
    pub equivariance_samples: usize,
    pub quadrature_nodes: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            samples: 1000,
            seed: DEFAULT_SEED,
            lift_curvature_samples: 20,
            equivariance_samples: 8,
            quadrature_nodes: crate::correspondence::CIRCLE_NODES,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.lift_curvature_samples == 0 || self.equivariance_samples == 0 {
            return Err(Error::InvalidConfig("sample counts must be positive".into()));
        }
        if self.quadrature_nodes < 2 {
            return Err(Error::InvalidConfig("at least two quadrature nodes are needed".into()));
        }
        Ok(())
    }
}

/// The lifted regime: Liouville form, Reeb field, lift metric and `α∧dα`.
pub struct LiftedRegime {
    pub c: f64,
    pub base: MetricField,
    pub alpha: KForm,
    pub reeb: VectorField,
    pub metric: MetricField,
    pub volume: VolumeForm,
}

impl LiftedRegime {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidConfig(format!("regime c must be finite, got {c}")));
        }
        let base = conformal_metric(c);
        let alpha = liouville_form(&base);
        let volume = VolumeForm::new(contact_volume(&alpha)?)?;
        Ok(LiftedRegime { c, metric: lift_metric(&base).metric, base, alpha, reeb: reeb_field(c), volume })
    }
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn beltrami(r: &LiftedRegime, probes: &[Vec<f64>]) -> Result<VerificationReport> {
    let cr = curl(&r.reeb, &r.metric, &r.volume)?;
    let res = sweep(probes, |p| norm_diff(&cr.eval(p), &r.reeb.eval(p)));
    Ok(VerificationReport::from_residuals("beltrami", Some(r.c), &res, BELTRAMI_TOLERANCE)
        .with_note(NOTE_ALPHA_COMPONENT)
        .with_note(NOTE_REEB_SIGN))
}

fn divergence_check(r: &LiftedRegime, probes: &[Vec<f64>]) -> Result<VerificationReport> {
    let dv = divergence(&r.reeb, &r.volume)?;
    let res = sweep(probes, |p| dv.eval(p).abs());
    Ok(VerificationReport::from_residuals("divergence", Some(r.c), &res, DIVERGENCE_TOLERANCE))
}

fn contact(r: &LiftedRegime, probes: &[Vec<f64>]) -> VerificationReport {
    let mut rep = contact_check(&r.alpha, probes, CONTACT_THRESHOLD);
    rep.regime_c = Some(r.c);
    rep
}

fn adapted(r: &LiftedRegime, probes: &[Vec<f64>]) -> Result<VerificationReport> {
    let mut rep = adapted_metric_check(&r.alpha, &r.reeb, &r.metric, probes, ADAPTED_TOLERANCE)?;
    rep.check = Check::Adapted.name().to_string();
    rep.regime_c = Some(r.c);
    Ok(rep)
}

/// Base curvature `K = −2c` at every sample, plus the sectional curvatures of
/// the lift: constant `0` or `¼` when the base curvature is `0` or `1`, and
/// visibly nonconstant otherwise.
fn curvature(r: &LiftedRegime, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let c = r.c;
    let pts = base_points(c, cfg.samples, cfg.seed);
    let res = sweep(&pts, |p| {
        let cp = ChartPoint::new(r.base.chart.clone(), p.to_vec()).expect("sampled inside the chart");
        gauss_curvature(&r.base, &cp).map(|k| (k + 2.0 * c).abs()).unwrap_or(f64::INFINITY)
    });
    let base = VerificationReport::from_residuals("gauss_curvature", Some(c), &res, CURVATURE_TOLERANCE);
    let lift = curvature_report(&r.metric, &bundle_points(c, cfg.lift_curvature_samples, cfg.seed ^ 1));
    let k = -2.0 * c;
    let lift_rep = if k == 0.0 || k == 1.0 {
        VerificationReport::from_residuals("lift_curvature", Some(c), &[lift.deviation_from((k / 4.0).abs())], LIFT_CURVATURE_TOLERANCE)
            .with_detail("target", (k / 4.0).abs())
    } else {
        VerificationReport::from_lower_bound("lift_curvature", Some(c), &[lift.spread], NONCONSTANT_SPREAD)
    };
    let lift_rep = lift_rep.with_detail("min", lift.min).with_detail("max", lift.max).with_detail("spread", lift.spread);
    let mut rep = VerificationReport::combine("curvature", Some(c), &[base.clone(), lift_rep]);
    // the headline statistic is the base-curvature residual
    rep.max_residual = base.max_residual;
    rep.mean_residual = base.mean_residual;
    rep.samples = base.samples;
    rep.tolerance = CURVATURE_TOLERANCE;
    Ok(rep)
}

/// Invariance of the Reeb field, `α`, `ι_X g` and the lift under the Kepler
/// circle action, of the metric reconstructed equivariantly from `(X, α)`,
/// and of the Haar average of the non-averaged reconstruction, including
/// agreement of the average under doubling of the quadrature.
fn equivariance(r: &LiftedRegime, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let c = r.c;
    let probes = bundle_points(c, cfg.equivariance_samples, cfg.seed ^ 2);
    let action = kepler_symmetry_action(c).with_nodes(cfg.quadrature_nodes);
    let base = kepler_invariance_report(c, &probes, cfg.quadrature_nodes, INVARIANCE_TOLERANCE);
    let iota = action.form_invariance(&flat(&r.reeb, &r.metric)?, &probes);
    let coarse = action.with_nodes(16);
    let (recon, _) = reeb_to_metric(&r.reeb, &r.alpha, Some(&coarse), &probes)?;
    let recon_inv = action.metric_invariance(&recon, &probes);
    let averaged = haar_averaging_report(r, &probes, cfg.quadrature_nodes)?;
    let mut rep = VerificationReport::combine(
        "equivariance",
        Some(c),
        &[
            base,
            VerificationReport::from_residuals("iota_x_g", Some(c), &[iota], INVARIANCE_TOLERANCE),
            VerificationReport::from_residuals("reconstructed_metric", Some(c), &[recon_inv], INVARIANCE_TOLERANCE),
            averaged.0,
            averaged.1,
        ],
    );
    rep.samples = probes.len();
    Ok(rep)
}

/// Haar-averages the metric reconstructed from `(X, α)` with a
/// symmetry-breaking auxiliary metric `diag(1 + 0.3 x₁², 1, 1)` and reports
/// its invariance under the Kepler action before and after averaging, and
/// the change of the average when the quadrature is doubled.
pub fn haar_averaging_report(r: &LiftedRegime, probes: &[Vec<f64>], nodes: usize) -> Result<(VerificationReport, VerificationReport)> {
    let c = r.c;
    let action = kepler_symmetry_action(c).with_nodes(nodes);
    let aux = MetricField::from_fn(r.metric.chart.clone(), |p| {
        let z = Dual::zero();
        vec![&p[0] * &p[0] * 0.3 + 1.0, z.clone(), z.clone(), z.clone(), Dual::one(), z.clone(), z.clone(), z, Dual::one()]
    });
    let (raw, _) = reeb_to_metric_with(&r.reeb, &r.alpha, &aux, None, probes)?;
    let avg = haar_average_metric(&raw, &action, probes)?;
    let fine = haar_average_metric(&raw, &action.with_nodes(2 * nodes), probes)?;
    let doubling = sweep(probes, |p| frobenius_diff(&avg.eval(p), &fine.eval(p))).into_iter().fold(0.0, f64::max);
    Ok((
        VerificationReport::from_residuals(
            "haar_average",
            Some(c),
            &[action.metric_invariance(&avg, probes)],
            AVERAGED_INVARIANCE_TOLERANCE,
        )
        .with_detail("before_averaging", action.metric_invariance(&raw, probes))
        .with_detail("nodes", nodes as f64),
        VerificationReport::from_residuals("quadrature_doubling", Some(c), &[doubling], DOUBLING_AGREEMENT),
    ))
}

/// Runs one check for regime `c`.
pub fn run_check(check: Check, c: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let r = LiftedRegime::new(c)?;
    run_on(&r, check, cfg)
}

fn run_on(r: &LiftedRegime, check: Check, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let probes = || bundle_points(r.c, cfg.samples, cfg.seed);
    match check {
        Check::Beltrami => beltrami(r, &probes()),
        Check::Divergence => divergence_check(r, &probes()),
        Check::Contact => Ok(contact(r, &probes())),
        Check::Adapted => adapted(r, &probes()),
        Check::Curvature => curvature(r, cfg),
        Check::Equivariance => equivariance(r, cfg),
    }
}

/// Runs the selected checks (deduplicated, in [`Check::ALL`] order).
pub fn run_checks(checks: &[Check], c: f64, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    let r = LiftedRegime::new(c)?;
    let mut sel = checks.to_vec();
    sel.sort();
    sel.dedup();
    sel.into_iter().map(|k| run_on(&r, k, cfg)).collect()
}
