//! Shooting from the truncated centre of the ball to its boundary.
//!
//! With `r = e^s`, cumulated mass `ζ(r) = ∫₀^r t²ρ(t) dt`, `x = ζ/r` and
//! `y = ζ'`, radial solutions obey
//!
//! ```text
//! x' = y − x
//! y' = 2y − e^{2s} R(e^{−2s} y) x
//! ```
//!
//! on `s ∈ (−∞, 0]`. The rescaled pair `p = e^{−2s}y` (the local density)
//! and `q = e^{−2s}x` stays of the order of the central density `ρ₀`:
//!
//! ```text
//! q' = p − 3q
//! p' = −R(p) e^{2s} q
//! ```
//!
//! Integration starts at `t(ε) = ½ log(ε/ρ₀)` with `p = ρ₀`, `q = ρ₀/3` and
//! ends at `s = 0`, where `M = 4π q(0)`.
//!
//! The level `u = H(p) = λ − φ` is carried along as `u' = −e^{2s} q`, so the
//! potential stays accurate where a degenerate core leaves `p` below the
//! resolution of the integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Flow, StepStats, StepperConfig, Termination};
use crate::statistics::{ModelSpec, Statistics};

/// Largest admissible truncation relative to the central density.
pub const MAX_EPS_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Truncation level ε: integration starts where `y ≈ ε`.
    pub eps_cut: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Number of output intervals on `[t(ε), 0]`.
    pub dense_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            eps_cut: 1e-6,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 2_000_000,
            dense_samples: 2000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_cut > 0.0 && self.eps_cut < 1.0) {
            return Err(Error::domain(format!(
                "eps_cut must lie in (0, 1), got {}",
                self.eps_cut
            )));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("integrator tolerances must be positive"));
        }
        if self.max_steps == 0 || self.dense_samples == 0 {
            return Err(Error::domain(
                "max_steps and dense_samples must be positive",
            ));
        }
        Ok(())
    }

    /// Truncation actually used for a given central density: `eps_cut`,
    /// lowered to `10⁻³·ρ₀` when the centre is too dilute for it.
    pub fn effective_eps(&self, rho0: f64) -> f64 {
        self.eps_cut.min(MAX_EPS_RATIO * rho0)
    }

    /// Same settings with both tolerances scaled by `factor`.
    pub fn with_tolerance_factor(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }

    fn stepper(&self) -> StepperConfig {
        StepperConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub t_start: f64,
    pub p: f64,
    pub q: f64,
}

/// Start of the truncated trajectory: `t(ε) = ½ log(ε/ρ₀)`, `p = ρ₀`, `q = ρ₀/3`.
pub fn initial_state(rho0: f64, eps_cut: f64) -> Result<InitialState> {
    if !rho0.is_finite() || rho0 <= 0.0 {
        return Err(Error::domain(format!(
            "central density must be positive, got {rho0}"
        )));
    }
    if !(eps_cut > 0.0 && eps_cut <= MAX_EPS_RATIO * rho0) {
        return Err(Error::precondition(format!(
            "eps_cut = {eps_cut} must lie in (0, {MAX_EPS_RATIO}·rho0 = {}]",
            MAX_EPS_RATIO * rho0
        )));
    }
    Ok(InitialState {
        t_start: 0.5 * (eps_cut / rho0).ln(),
        p: rho0,
        q: rho0 / 3.0,
    })
}

/// Output abscissae on `[t_start, 0]`: uniform in `s` near the centre and
/// uniform in `r` near the boundary, joined where the two spacings match.
pub fn sample_grid(t_start: f64, intervals: usize) -> Vec<f64> {
    if intervals < 4 {
        let n = intervals.max(1);
        let mut grid: Vec<f64> = (0..=n)
            .map(|i| t_start * (1.0 - i as f64 / n as f64))
            .collect();
        grid[n] = 0.0;
        return grid;
    }
    let n1 = intervals / 2;
    let n2 = intervals - n1;
    let mismatch = |s: f64| (s - t_start) / n1 as f64 - ((-s).exp() - 1.0) / n2 as f64;
    let (mut lo, mut hi) = (t_start, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s_mid = 0.5 * (lo + hi);
    let r_mid = s_mid.exp();
    let mut grid = Vec::with_capacity(intervals + 1);
    for i in 0..=n1 {
        grid.push(t_start + (s_mid - t_start) * i as f64 / n1 as f64);
    }
    for j in 1..=n2 {
        let r = r_mid + (1.0 - r_mid) * j as f64 / n2 as f64;
        grid.push(r.ln());
    }
    grid[intervals] = 0.0;
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
    /// `u = H(p)`, integrated alongside `(p, q)`.
    pub level: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub steps: StepStats,
    /// Small negative excursions of p or q that were clamped to zero.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: ModelSpec,
    /// Central density `p_∞ = ‖ρ‖_∞`.
    pub rho0: f64,
    /// Truncation level actually used.
    pub eps_cut: f64,
    pub t_start: f64,
    pub samples: Vec<TrajectorySample>,
    pub stats: TrajectoryStats,
    /// False when the integration stopped before `s = 0`.
    pub complete: bool,
}

impl Trajectory {
    /// `q(0)`, the normalized mass, if the trajectory reached the boundary.
    pub fn normalized_mass(&self) -> Option<f64> {
        self.complete
            .then(|| self.samples.last().map(|s| s.q))
            .flatten()
    }

    pub fn final_sample(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

fn sample(s: f64, p: f64, q: f64, level: f64) -> TrajectorySample {
    let e2 = (2.0 * s).exp();
    TrajectorySample {
        s,
        x: e2 * q,
        y: e2 * p,
        p,
        q,
        level,
    }
}

/// Below this density the potential is taken from the integrated level
/// rather than from `H(p)`.
pub const LEVEL_DENSITY_FLOOR: f64 = 1e-3;

/// `R` continued to the whole line: `R(z) = −R(−z)` for `z < 0`, `R(0) = 0`.
pub(crate) fn response_extended(model: &ModelSpec, z: f64, seed: &mut Option<f64>) -> Result<f64> {
    if z > 0.0 {
        model.response_seeded(z, seed)
    } else if z < 0.0 {
        match model.kind {
            Statistics::FermiDirac => Ok(-model.response_seeded(-z, &mut None)?),
            _ => Ok(-model.response(-z)?),
        }
    } else {
        Ok(0.0)
    }
}

/// Right-hand side of the `(x, y)` system.
pub(crate) fn xy_rhs(
    model: &ModelSpec,
    s: f64,
    state: &[f64; 2],
    seed: &mut Option<f64>,
) -> Result<[f64; 2]> {
    let [x, y] = *state;
    let e2 = (2.0 * s).exp();
    let r = response_extended(model, y / e2, seed)?;
    Ok([y - x, 2.0 * y - e2 * r * x])
}

/// Integrates without turning an early stop into an error: the returned
/// trajectory has `complete == false` when the step budget ran out.
pub fn integrate_partial(
    model: &ModelSpec,
    rho0: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    model.validate()?;
    cfg.validate()?;
    let eps = cfg.effective_eps(rho0);
    let init = initial_state(rho0, eps)?;
    let grid = sample_grid(init.t_start, cfg.dense_samples);
    let clamp_limit = 10.0 * (cfg.abs_tol + cfg.rel_tol * rho0);
    let mut seed = None;
    let mut clamped = 0;
    let solution = ode::integrate(
        |s, state: &[f64; 3]| {
            let [p, q, _] = *state;
            let r = if p > 0.0 {
                model.response_seeded(p, &mut seed)?
            } else {
                0.0
            };
            let e2 = (2.0 * s).exp();
            Ok([-r * e2 * q, p - 3.0 * q, -e2 * q])
        },
        init.t_start,
        [init.p, init.q, model.enthalpy(init.p)?],
        &grid,
        &cfg.stepper(),
        |s, state| {
            for v in state[..2].iter_mut() {
                if *v < 0.0 {
                    if *v < -clamp_limit {
                        return Err(Error::Breakdown {
                            s,
                            reason: format!("state component {v:e} below zero (rho0 = {rho0})"),
                        });
                    }
                    *v = 0.0;
                    clamped += 1;
                }
            }
            Ok(Flow::Continue)
        },
    )?;
    let complete = solution.termination == Termination::Completed;
    let samples = solution
        .ts
        .iter()
        .zip(&solution.ys)
        .map(|(&s, &[p, q, u])| sample(s, p, q, u))
        .collect();
    Ok(Trajectory {
        model: *model,
        rho0,
        eps_cut: eps,
        t_start: init.t_start,
        samples,
        stats: TrajectoryStats {
            steps: solution.stats,
            clamped,
        },
        complete,
    })
}

/// Adaptive integration of the `(p, q)` system from `t(ε)` to `s = 0`.
pub fn integrate(model: &ModelSpec, rho0: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let traj = integrate_partial(model, rho0, cfg)?;
    if traj.complete {
        Ok(traj)
    } else {
        let s = traj.samples.last().map_or(traj.t_start, |x| x.s);
        Err(Error::Integration {
            s,
            reason: format!(
                "step budget of {} exhausted after {} of {} samples (rho0 = {rho0})",
                cfg.max_steps,
                traj.samples.len(),
                cfg.dense_samples + 1
            ),
        })
    }
}

/// Normalized mass `q(0)` only, with no intermediate output.
pub fn normalized_mass(model: &ModelSpec, rho0: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let cfg = IntegratorConfig {
        dense_samples: 1,
        ..*cfg
    };
    let traj = integrate(model, rho0, &cfg)?;
    Ok(traj
        .samples
        .last()
        .expect("complete trajectory has samples")
        .q)
}

/// Integrates the `(x, y)` system directly on the same output grid as
/// [`integrate`]; returns `(s, x, y)` triples.
pub fn integrate_xy(
    model: &ModelSpec,
    rho0: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, f64, f64)>> {
    model.validate()?;
    cfg.validate()?;
    let init = initial_state(rho0, cfg.effective_eps(rho0))?;
    let grid = sample_grid(init.t_start, cfg.dense_samples);
    let e2 = (2.0 * init.t_start).exp();
    let mut seed = None;
    let solution = ode::integrate(
        |s, state: &[f64; 2]| xy_rhs(model, s, state, &mut seed),
        init.t_start,
        [e2 * init.q, e2 * init.p],
        &grid,
        &cfg.stepper(),
        |_, _| Ok(Flow::Continue),
    )?;
    if solution.termination != Termination::Completed {
        return Err(Error::Integration {
            s: solution.last.0,
            reason: "step budget exhausted in (x, y) integration".into(),
        });
    }
    Ok(solution
        .ts
        .iter()
        .zip(&solution.ys)
        .map(|(&s, &[x, y])| (s, x, y))
        .collect())
}

/// Physical solution rebuilt from a complete trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub model: ModelSpec,
    /// Total mass `M = 4π x(0)`.
    pub mass: f64,
    /// Normalized mass `m = M/4π`.
    pub m: f64,
    pub sup_density: f64,
    /// Lagrange multiplier, `λ = H(ρ(1))` since `φ(1) = 0`.
    pub lambda: f64,
    pub boundary_density: f64,
    /// Radii `r = e^s` of the trajectory samples, increasing.
    pub radius: Vec<f64>,
    pub density: Vec<f64>,
    /// Gravitational potential `φ = λ − H(ρ)`.
    pub potential: Vec<f64>,
}

fn interpolate(xs: &[f64], vs: &[f64], x: f64) -> Option<f64> {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let i = xs.partition_point(|&v| v < x);
    if i == 0 {
        return Some(vs[0]);
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = (x - x0) / (x1 - x0);
    Some(vs[i - 1] + w * (vs[i] - vs[i - 1]))
}

impl SolutionProfile {
    /// `ρ(r)` by linear interpolation in `log r`, for `r` in the sampled range.
    pub fn density_at(&self, r: f64) -> Option<f64> {
        let logs: Vec<f64> = self.radius.iter().map(|r| r.ln()).collect();
        interpolate(&logs, &self.density, r.ln())
    }

    /// `φ(r)` by linear interpolation in `log r`.
    pub fn potential_at(&self, r: f64) -> Option<f64> {
        let logs: Vec<f64> = self.radius.iter().map(|r| r.ln()).collect();
        interpolate(&logs, &self.potential, r.ln())
    }
}

pub fn reconstruct_profile(traj: &Trajectory) -> Result<SolutionProfile> {
    let last = match traj.samples.last() {
        Some(last) if traj.complete && last.s == 0.0 => *last,
        _ => {
            return Err(Error::precondition(
                "profile reconstruction needs a trajectory that reaches s = 0",
            ))
        }
    };
    let model = traj.model;
    let boundary_density = last.p;
    let mut seed = None;
    let mut levels = Vec::with_capacity(traj.samples.len());
    for smp in &traj.samples {
        let h = match model.kind {
            _ if smp.p < LEVEL_DENSITY_FLOOR => smp.level,
            Statistics::FermiDirac => {
                let level = crate::fermi::fermi_inverse_half_seeded(
                    2.0 * smp.p / model.mu,
                    seed,
                    &crate::statistics::MODEL_FERMI,
                )?;
                seed = Some(level);
                level
            }
            _ => model.enthalpy(smp.p)?,
        };
        levels.push(h);
    }
    let lambda = *levels.last().expect("non-empty");
    let mut potential: Vec<f64> = levels.iter().map(|h| lambda - h).collect();
    if let Some(phi) = potential.last_mut() {
        *phi = 0.0;
    }
    Ok(SolutionProfile {
        model,
        mass: 4.0 * std::f64::consts::PI * last.x,
        m: last.x,
        sup_density: traj.rho0,
        lambda,
        boundary_density,
        radius: traj.samples.iter().map(|s| s.s.exp()).collect(),
        density: traj.samples.iter().map(|s| s.p).collect(),
        potential,
    })
}

/// `sup_s e^{−2s}|y_η(s) − y₀(s)|` between a degenerate model and the
/// Maxwell–Boltzmann trajectory with the same central density.
pub fn trajectory_distance(
    model_eta: &ModelSpec,
    rho0: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if model_eta.kind == Statistics::MaxwellBoltzmann {
        return Err(Error::precondition(
            "trajectory distance compares an sFD or FD model against MB",
        ));
    }
    let perturbed = integrate(model_eta, rho0, cfg)?;
    let reference = integrate(&ModelSpec::maxwell_boltzmann(), rho0, cfg)?;
    debug_assert_eq!(perturbed.samples.len(), reference.samples.len());
    Ok(perturbed
        .samples
        .iter()
        .zip(&reference.samples)
        .map(|(a, b)| (a.p - b.p).abs())
        .fold(0.0, f64::max))
}
