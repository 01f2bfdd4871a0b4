//! Runtime checks of the a-priori estimates that every radial solution
//! must satisfy. Checks report, they never abort: a failed check means a
//! numerical defect somewhere upstream.
//!
//! Margins are slacks normalized by `max(1, |scale|)` of the quantity being
//! checked, so a check passes when `worst_margin ≥ −tolerance`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Flow, StepperConfig, Termination};
use crate::shooting::{
    integrate, reconstruct_profile, trajectory_distance, xy_rhs, IntegratorConfig, SolutionProfile,
    Trajectory,
};
use crate::statistics::{ModelSpec, Statistics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Most negative normalized slack observed.
    pub worst_margin: f64,
    pub tolerance: f64,
    /// `s` (or other abscissa) of the worst margin.
    pub location: Option<f64>,
    /// The check could not reach a verdict (e.g. step budget exhausted).
    #[serde(default)]
    pub inconclusive: bool,
}

impl CheckReport {
    fn from_margin(name: &str, worst_margin: f64, tolerance: f64, location: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            passed: worst_margin >= -tolerance,
            worst_margin,
            tolerance,
            location,
            inconclusive: false,
        }
    }
}

/// Smallest of `margins` together with the abscissa where it occurs.
fn worst<I: IntoIterator<Item = (f64, f64)>>(margins: I) -> (f64, Option<f64>) {
    margins
        .into_iter()
        .fold((f64::INFINITY, None), |(m, at), (s, v)| {
            if v < m {
                (v, Some(s))
            } else {
                (m, at)
            }
        })
}

fn scale(v: f64) -> f64 {
    v.abs().max(1.0)
}

/// Tolerance for monotonicity and confinement monitors on a trajectory
/// computed with the given integrator settings.
pub fn monitor_tolerance(cfg: &IntegratorConfig) -> f64 {
    10.0 * (cfg.abs_tol + cfg.rel_tol)
}

/// Positivity, the `y ≤ 3x` confinement, the three monotone quantities
/// `e^{−2s}y ↘`, `e^{−2s}x ↘`, `e^s(3x − y) ↗`, and the initial ratio
/// `q/p = 1/3`.
pub fn check_trajectory_invariants(traj: &Trajectory, tolerance: f64) -> Vec<CheckReport> {
    let smp = &traj.samples;
    let mut out = Vec::with_capacity(6);

    let (m, at) = worst(
        smp.iter()
            .map(|t| (t.s, t.x.min(t.y) / scale(t.x.max(t.y)))),
    );
    out.push(CheckReport::from_margin(
        "positivity of x and y",
        m,
        tolerance,
        at,
    ));

    let (m, at) = worst(
        smp.iter()
            .map(|t| (t.s, (3.0 * t.q - t.p) / scale(3.0 * t.q))),
    );
    out.push(CheckReport::from_margin(
        "confinement y <= 3x",
        m,
        tolerance,
        at,
    ));

    let (m, at) = worst(
        smp.windows(2)
            .map(|w| (w[1].s, (w[0].p - w[1].p) / scale(w[0].p))),
    );
    out.push(CheckReport::from_margin(
        "e^{-2s} y nonincreasing",
        m,
        tolerance,
        at,
    ));

    let (m, at) = worst(
        smp.windows(2)
            .map(|w| (w[1].s, (w[0].q - w[1].q) / scale(w[0].q))),
    );
    out.push(CheckReport::from_margin(
        "e^{-2s} x nonincreasing",
        m,
        tolerance,
        at,
    ));

    let w: Vec<f64> = smp
        .iter()
        .map(|t| (3.0 * t.s).exp() * (3.0 * t.q - t.p))
        .collect();
    let (m, at) = worst(
        w.windows(2)
            .zip(smp.iter().skip(1))
            .map(|(v, t)| (t.s, (v[1] - v[0]) / scale(v[0]))),
    );
    out.push(CheckReport::from_margin(
        "e^s (3x - y) nondecreasing",
        m,
        tolerance,
        at,
    ));

    let ratio_gap = smp
        .first()
        .map_or(f64::INFINITY, |t| (t.q / t.p - 1.0 / 3.0).abs());
    out.push(CheckReport::from_margin(
        "initial ratio q/p = 1/3",
        -ratio_gap,
        tolerance,
        smp.first().map(|t| t.s),
    ));
    out
}

/// Slack tolerance of the mass estimates, relative to the size of each side.
pub const MASS_ESTIMATE_TOLERANCE: f64 = 1e-8;

/// `m ≤ ‖ρ‖_∞/3` and `2H(‖ρ‖_∞) − R(‖ρ‖_∞)m ≤ m + 2H(3m)`.
pub fn check_mass_estimates(
    model: &ModelSpec,
    profile: &SolutionProfile,
) -> Result<Vec<CheckReport>> {
    let m = profile.m;
    let sup = profile.sup_density;
    let simple = (sup / 3.0 - m) / scale(sup / 3.0);
    let lhs = 2.0 * model.enthalpy(sup)? - model.response(sup)? * m;
    let rhs = m + 2.0 * model.enthalpy(3.0 * m)?;
    let lower = (rhs - lhs) / lhs.abs().max(rhs.abs()).max(1.0);
    Ok(vec![
        CheckReport::from_margin(
            "mass bound m <= sup/3",
            simple,
            MASS_ESTIMATE_TOLERANCE,
            Some(sup),
        ),
        CheckReport::from_margin(
            "sup-norm estimate 2H(sup) - R(sup) m <= m + 2H(3m)",
            lower,
            MASS_ESTIMATE_TOLERANCE,
            Some(sup),
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantExitConfig {
    /// Backward integration stops here without an exit.
    pub horizon: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for QuadrantExitConfig {
    fn default() -> Self {
        Self {
            horizon: -60.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

/// Integrates the `(x, y)` system backward from `(x0, y0)` at `s = 0`; the
/// check passes when the orbit leaves the positive quadrant before the
/// horizon. `worst_margin` is `−min(x, y)` along the computed orbit.
pub fn check_quadrant_exit(
    model: &ModelSpec,
    x0: f64,
    y0: f64,
    cfg: &QuadrantExitConfig,
) -> Result<CheckReport> {
    if !(x0 > 0.0 && y0 >= 3.0 * x0) {
        return Err(Error::precondition(format!(
            "quadrant exit needs x0 > 0 and y0 >= 3 x0, got ({x0}, {y0})"
        )));
    }
    model.validate()?;
    let stepper = StepperConfig {
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        max_steps: cfg.max_steps,
    };
    let mut seed = None;
    let mut lowest = (x0.min(y0), 0.0);
    let sol = ode::integrate(
        |s, st: &[f64; 2]| xy_rhs(model, s, st, &mut seed),
        0.0,
        [x0, y0],
        &[cfg.horizon],
        &stepper,
        |s, st| {
            let v = st[0].min(st[1]);
            if v < lowest.0 {
                lowest = (v, s);
            }
            Ok(if v < 0.0 { Flow::Stop } else { Flow::Continue })
        },
    )?;
    let name = "backward exit from the positive quadrant";
    Ok(match sol.termination {
        Termination::Stopped { t } => CheckReport {
            name: name.into(),
            passed: true,
            worst_margin: -lowest.0,
            tolerance: 0.0,
            location: Some(t),
            inconclusive: false,
        },
        Termination::Completed => CheckReport {
            name: name.into(),
            passed: false,
            worst_margin: -lowest.0,
            tolerance: 0.0,
            location: Some(lowest.1),
            inconclusive: false,
        },
        Termination::StepLimit { t } => CheckReport {
            name: name.into(),
            passed: false,
            worst_margin: -lowest.0,
            tolerance: 0.0,
            location: Some(t),
            inconclusive: true,
        },
    })
}

/// Upper bound `(η/6) ρ₀^{8/3} e^{ρ₀/3}` on the sFD–MB trajectory distance.
pub fn gronwall_bound(eta: f64, rho0: f64) -> f64 {
    eta / 6.0 * rho0.powf(8.0 / 3.0) * (rho0 / 3.0).exp()
}

/// Compares the sFD trajectory distance with [`gronwall_bound`].
pub fn gronwall_certificate(eta: f64, rho0: f64, cfg: &IntegratorConfig) -> Result<CheckReport> {
    let model = ModelSpec::simplified_fermi_dirac(eta)?;
    let distance = trajectory_distance(&model, rho0, cfg)?;
    let bound = gronwall_bound(eta, rho0);
    Ok(CheckReport::from_margin(
        &format!(
            "Gronwall bound (eta = {eta}, rho0 = {rho0}): distance {distance:.6e} <= {bound:.6e}"
        ),
        (bound - distance) / bound,
        0.0,
        Some(rho0),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub model: ModelSpec,
    pub rho0: f64,
    pub reports: Vec<CheckReport>,
    /// Set when the trajectory itself could not be computed.
    pub error: Option<String>,
}

impl MatrixEntry {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.reports.iter().all(|r| r.passed)
    }
}

/// Models of the standard validation matrix.
pub fn standard_models() -> Vec<ModelSpec> {
    let mut models = vec![ModelSpec::maxwell_boltzmann()];
    for eta in [1e-4, 1e-2, 5e-2] {
        models.push(ModelSpec::new(Statistics::SimplifiedFermiDirac, eta).expect("valid eta"));
    }
    for eta in [1e-2, 1e-1] {
        models.push(ModelSpec::new(Statistics::FermiDirac, eta).expect("valid eta"));
    }
    models
}

/// Central densities of the standard validation matrix.
pub const STANDARD_RHO0: [f64; 4] = [1e-4, 1.0, 1e2, 1e6];

/// Trajectory and mass-estimate checks for one model and central density.
pub fn validate_point(model: &ModelSpec, rho0: f64, cfg: &IntegratorConfig) -> MatrixEntry {
    let run = || -> Result<Vec<CheckReport>> {
        let traj = integrate(model, rho0, cfg)?;
        let mut reports = check_trajectory_invariants(&traj, monitor_tolerance(cfg));
        let profile = reconstruct_profile(&traj)?;
        reports.extend(check_mass_estimates(model, &profile)?);
        Ok(reports)
    };
    match run() {
        Ok(reports) => MatrixEntry {
            model: *model,
            rho0,
            reports,
            error: None,
        },
        Err(e) => MatrixEntry {
            model: *model,
            rho0,
            reports: vec![],
            error: Some(e.to_string()),
        },
    }
}

/// Runs [`validate_point`] over every model × central density of the
/// standard matrix.
pub fn run_standard_matrix(cfg: &IntegratorConfig) -> Vec<MatrixEntry> {
    let cases: Vec<(ModelSpec, f64)> = standard_models()
        .into_iter()
        .flat_map(|m| STANDARD_RHO0.iter().map(move |&r| (m, r)))
        .collect();
    cases
        .par_iter()
        .map(|(m, r)| validate_point(m, *r, cfg))
        .collect()
}
