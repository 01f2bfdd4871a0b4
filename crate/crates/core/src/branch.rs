//! Solution branches over the central density, their turning points, and
//! solution counts for a prescribed mass.
//!
//! The map `ρ₀ ↦ M` is single valued, so a plain sweep over a log-spaced
//! `ρ₀` grid traces the whole branch. Folds of the bifurcation curve show up
//! as local extrema of `M(ρ₀)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energetics::{free_energy_with, PotentialConvention};
use crate::error::{Error, Result};
use crate::roots::secant_bisection;
use crate::shooting::{integrate, normalized_mass, reconstruct_profile, IntegratorConfig};
use crate::statistics::ModelSpec;

/// Largest tolerated share of failed points in a sweep.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub rho0: f64,
    pub mass: f64,
    pub m: f64,
    pub sup_density: f64,
    pub lambda: f64,
    pub entropy: f64,
    pub potential: f64,
    pub free_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFailure {
    pub rho0: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub model: ModelSpec,
    /// Samples ordered by strictly increasing `rho0`.
    pub samples: Vec<BranchSample>,
    #[serde(default)]
    pub failures: Vec<BranchFailure>,
}

impl Branch {
    pub fn max_mass(&self) -> Option<&BranchSample> {
        self.samples.iter().max_by(|a, b| a.mass.total_cmp(&b.mass))
    }

    fn check_grid(&self) -> Result<()> {
        if self.samples.windows(2).all(|w| w[1].rho0 > w[0].rho0) {
            Ok(())
        } else {
            Err(Error::precondition(
                "branch rho0 grid is not strictly increasing",
            ))
        }
    }
}

/// `points` log-spaced values from `lo` to `hi`, both ends exact.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    grid
}

/// Solves one point of the branch.
pub fn branch_sample(
    model: &ModelSpec,
    rho0: f64,
    cfg: &IntegratorConfig,
    convention: PotentialConvention,
) -> Result<BranchSample> {
    let traj = integrate(model, rho0, cfg)?;
    let profile = reconstruct_profile(&traj)?;
    let energy = free_energy_with(model, &traj, convention)?;
    Ok(BranchSample {
        rho0,
        mass: profile.mass,
        m: profile.m,
        sup_density: profile.sup_density,
        lambda: profile.lambda,
        entropy: energy.entropy,
        potential: energy.potential,
        free_energy: energy.free_energy,
    })
}

pub fn trace_branch(
    model: &ModelSpec,
    rho0_min: f64,
    rho0_max: f64,
    points: usize,
    cfg: &IntegratorConfig,
) -> Result<Branch> {
    trace_branch_with(
        model,
        rho0_min,
        rho0_max,
        points,
        cfg,
        PotentialConvention::default(),
    )
}

/// Sweeps a log-spaced `ρ₀` grid. Points that fail are listed in
/// `Branch::failures`; more than 10% failures is an error.
pub fn trace_branch_with(
    model: &ModelSpec,
    rho0_min: f64,
    rho0_max: f64,
    points: usize,
    cfg: &IntegratorConfig,
    convention: PotentialConvention,
) -> Result<Branch> {
    if !(rho0_min > 0.0 && rho0_min < rho0_max && rho0_max.is_finite()) {
        return Err(Error::precondition(format!(
            "need 0 < rho0_min < rho0_max, got [{rho0_min}, {rho0_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::precondition("a branch needs at least 2 points"));
    }
    model.validate()?;
    cfg.validate()?;
    let grid = log_grid(rho0_min, rho0_max, points);
    let results: Vec<(f64, Result<BranchSample>)> = grid
        .par_iter()
        .map(|&rho0| (rho0, branch_sample(model, rho0, cfg, convention)))
        .collect();
    let mut samples = Vec::with_capacity(points);
    let mut failures = Vec::new();
    for (rho0, res) in results {
        match res {
            Ok(s) => samples.push(s),
            Err(e) => failures.push(BranchFailure {
                rho0,
                reason: e.to_string(),
            }),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * points as f64 {
        return Err(Error::Branch {
            failed: failures.len(),
            total: points,
            sample: failures.iter().take(10).map(|f| f.rho0).collect(),
        });
    }
    Ok(Branch {
        model: *model,
        samples,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    /// 1-based index within its sequence (lower or upper), by increasing `ρ₀`.
    pub n: usize,
    pub mass: f64,
    pub rho0: f64,
    /// Grid cell `[ρ₀_{i−1}, ρ₀_{i+1}]` around the sampled extremum.
    pub rho0_bracket: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TurningPointSet {
    /// Local minima of `M`.
    pub lower: Vec<TurningPoint>,
    /// Local maxima of `M`.
    pub upper: Vec<TurningPoint>,
}

impl TurningPointSet {
    pub fn len(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lower masses increase, upper masses decrease, and every lower mass
    /// stays below every upper one.
    pub fn is_ordered(&self) -> bool {
        let lower_up = self.lower.windows(2).all(|w| w[0].mass < w[1].mass);
        let upper_down = self.upper.windows(2).all(|w| w[0].mass > w[1].mass);
        let separated = match (
            self.lower.iter().map(|t| t.mass).reduce(f64::max),
            self.upper.iter().map(|t| t.mass).reduce(f64::min),
        ) {
            (Some(lo), Some(hi)) => lo < hi,
            _ => true,
        };
        lower_up && upper_down && separated
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for an extremum of `f` on `[a, b]`; `sign = 1`
/// finds a maximum, `sign = −1` a minimum. Returns `(x, f(x))`.
fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, sign: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = sign * f(d)?;
        }
    }
    Ok(if fc > fd {
        (c, sign * fc)
    } else {
        (d, sign * fd)
    })
}

/// Vertex of the parabola through three points.
fn parabola_vertex(u: [f64; 3], v: [f64; 3]) -> Option<f64> {
    let d1 = (v[1] - v[0]) / (u[1] - u[0]);
    let d2 = (v[2] - v[1]) / (u[2] - u[1]);
    let curvature = (d2 - d1) / (u[2] - u[0]);
    if curvature == 0.0 || !curvature.is_finite() {
        return None;
    }
    Some(0.5 * (u[0] + u[1]) - d1 / (2.0 * curvature))
}

/// Locates the local extrema of `M(ρ₀)` along the branch and refines each
/// one in `log ρ₀` to `10⁻⁶` with re-integrated masses.
pub fn detect_turning_points(branch: &Branch, cfg: &IntegratorConfig) -> Result<TurningPointSet> {
    if branch.samples.len() < 3 {
        return Err(Error::precondition(
            "turning-point detection needs at least 3 samples",
        ));
    }
    branch.check_grid()?;
    let model = branch.model;
    let s = &branch.samples;
    let mut candidates = Vec::new();
    for i in 1..s.len() - 1 {
        let d0 = s[i].mass - s[i - 1].mass;
        let d1 = s[i + 1].mass - s[i].mass;
        if d0 * d1 < 0.0 || (d0 != 0.0 && d1 == 0.0) {
            let second = s[i + 1].mass - 2.0 * s[i].mass + s[i - 1].mass;
            if second != 0.0 {
                candidates.push((i, second < 0.0));
            }
        }
    }
    let refined: Vec<Result<(usize, bool, f64, f64)>> = candidates
        .par_iter()
        .map(|&(i, is_max)| {
            let sign = if is_max { 1.0 } else { -1.0 };
            let u = [s[i - 1].rho0.ln(), s[i].rho0.ln(), s[i + 1].rho0.ln()];
            let v = [s[i - 1].mass, s[i].mass, s[i + 1].mass];
            let mass_at =
                |u: f64| -> Result<f64> { Ok(4.0 * PI * normalized_mass(&model, u.exp(), cfg)?) };
            let (mut a, mut b) = (u[0], u[2]);
            if let Some(vertex) = parabola_vertex(u, v).filter(|x| *x > u[0] && *x < u[2]) {
                let h = (u[2] - u[0]) / 8.0;
                let lo = (vertex - h).max(u[0]);
                let hi = (vertex + h).min(u[2]);
                let (fl, fv, fh) = (mass_at(lo)?, mass_at(vertex)?, mass_at(hi)?);
                if sign * fv >= sign * fl && sign * fv >= sign * fh {
                    a = lo;
                    b = hi;
                }
            }
            let (x, mass) = golden_section(mass_at, a, b, sign, 1e-6)?;
            Ok((i, is_max, x.exp(), mass))
        })
        .collect();
    let mut set = TurningPointSet::default();
    for r in refined {
        let (i, is_max, rho0, mass) = r?;
        let list = if is_max {
            &mut set.upper
        } else {
            &mut set.lower
        };
        list.push(TurningPoint {
            n: list.len() + 1,
            mass,
            rho0,
            rho0_bracket: (s[i - 1].rho0, s[i + 1].rho0),
        });
    }
    Ok(set)
}

/// Solutions with a prescribed mass found along a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCount {
    pub mass: f64,
    pub count: usize,
    /// Central densities of the distinct solutions, increasing.
    pub roots: Vec<f64>,
    /// Brackets whose refinement failed.
    pub unresolved: Vec<(f64, f64)>,
    /// Set when some bracket could not be refined, so `count` only bounds
    /// the number of solutions from below.
    pub lower_bound: bool,
}

/// Refines a sign change of `M(ρ₀) − M_target` on `rho0_bracket` to a
/// relative `10⁻⁸` in `ρ₀`, with `|M − M_target|/M_target < 10⁻⁶`.
pub fn refine_root(
    model: &ModelSpec,
    mass_target: f64,
    rho0_bracket: (f64, f64),
    bracket_masses: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let (lo, hi) = rho0_bracket;
    if !(lo > 0.0 && hi > 0.0) || lo == hi {
        return Err(Error::precondition(format!(
            "degenerate bracket [{lo}, {hi}]"
        )));
    }
    let fa = (bracket_masses.0 - mass_target) / mass_target;
    let fb = (bracket_masses.1 - mass_target) / mass_target;
    if fa * fb > 0.0 {
        return Err(Error::precondition(format!(
            "M - M_target keeps its sign on [{lo}, {hi}]"
        )));
    }
    let root = secant_bisection(
        |u| Ok((4.0 * PI * normalized_mass(model, u.exp(), cfg)? - mass_target) / mass_target),
        lo.ln(),
        hi.ln(),
        fa,
        fb,
        1e-8,
        1e-7,
        300,
    )?;
    Ok(root.x.exp())
}

/// Counts the distinct `ρ₀` with `M(ρ₀) = mass_target` along the branch.
pub fn count_solutions(
    branch: &Branch,
    mass_target: f64,
    cfg: &IntegratorConfig,
) -> Result<SolutionCount> {
    if !(mass_target > 0.0 && mass_target.is_finite()) {
        return Err(Error::domain(format!(
            "target mass must be positive, got {mass_target}"
        )));
    }
    branch.check_grid()?;
    let s = &branch.samples;
    let mut exact = Vec::new();
    let mut brackets = Vec::new();
    for (i, smp) in s.iter().enumerate() {
        if smp.mass == mass_target {
            exact.push(smp.rho0);
        }
        if i + 1 < s.len() {
            let (a, b) = (smp.mass - mass_target, s[i + 1].mass - mass_target);
            if a * b < 0.0 {
                brackets.push(i);
            }
        }
    }
    let refined: Vec<(usize, Result<f64>)> = brackets
        .par_iter()
        .map(|&i| {
            let bracket = (s[i].rho0, s[i + 1].rho0);
            (
                i,
                refine_root(
                    &branch.model,
                    mass_target,
                    bracket,
                    (s[i].mass, s[i + 1].mass),
                    cfg,
                ),
            )
        })
        .collect();
    let mut roots = exact;
    let mut unresolved = Vec::new();
    for (i, r) in refined {
        match r {
            Ok(root) => roots.push(root),
            Err(_) => unresolved.push((s[i].rho0, s[i + 1].rho0)),
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| ((*a - *b) / *b).abs() < 1e-6);
    Ok(SolutionCount {
        mass: mass_target,
        count: roots.len(),
        roots,
        lower_bound: !unresolved.is_empty(),
        unresolved,
    })
}
