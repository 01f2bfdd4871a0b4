//! Entropy, potential energy and free energy of a solution.
//!
//! With the radial substitution `r = e^s`:
//!
//! * entropy `S = ∫_B β(ρ) dx = 4π ∫ e^{3s} β(p(s)) ds`;
//! * potential energy `½∫_B |∇φ|² dx = 2π ∫ e^{5s} q(s)² ds`, because
//!   `φ' = ζ/r²` and `ζ/r = x = e^{2s}q`;
//! * free energy `F = S − Pot`.
//!
//! Integrals run over the truncated range `[t(ε), 0]` with composite
//! Simpson on the trajectory samples.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::simpson_nonuniform;
use crate::shooting::Trajectory;
use crate::statistics::{ModelSpec, Statistics};

/// Prefactor of the potential-energy integral.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialConvention {
    /// `½∫|∇φ|²`, i.e. `2π ∫ e^{5s} q² ds`.
    #[default]
    HalfGradientSquared,
    /// `4π ∫ e^{5s} q² ds`, twice the above; kept for comparison with
    /// published figures that use it.
    FourPi,
}

impl PotentialConvention {
    fn prefactor(self) -> f64 {
        match self {
            PotentialConvention::HalfGradientSquared => 2.0 * PI,
            PotentialConvention::FourPi => 4.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub entropy: f64,
    pub potential: f64,
    pub free_energy: f64,
}

fn require_complete(traj: &Trajectory) -> Result<()> {
    if traj.complete && traj.samples.len() >= 2 {
        Ok(())
    } else {
        Err(Error::precondition("energies need a complete trajectory"))
    }
}

fn abscissae(traj: &Trajectory) -> Vec<f64> {
    traj.samples.iter().map(|s| s.s).collect()
}

/// Generalized entropy `4π ∫ e^{3s} β(p(s)) ds`.
pub fn entropy(model: &ModelSpec, traj: &Trajectory) -> Result<f64> {
    require_complete(traj)?;
    let densities: Vec<f64> = traj.samples.iter().map(|s| s.p).collect();
    entropy_from_densities(model, &abscissae(traj), &densities)
}

/// Entropy evaluated from `e^{−2s}y(s)` instead of `p(s)`; both describe the
/// same density and must agree to rounding.
pub fn entropy_from_xy(model: &ModelSpec, traj: &Trajectory) -> Result<f64> {
    require_complete(traj)?;
    let densities: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| (-2.0 * s.s).exp() * s.y)
        .collect();
    entropy_from_densities(model, &abscissae(traj), &densities)
}

fn entropy_from_densities(model: &ModelSpec, ss: &[f64], densities: &[f64]) -> Result<f64> {
    let mut values = Vec::with_capacity(ss.len());
    let mut seed = None;
    for (&s, &rho) in ss.iter().zip(densities) {
        let beta = if rho <= 0.0 {
            0.0
        } else if model.kind == Statistics::FermiDirac {
            fd_beta(model, rho, &mut seed)?
        } else {
            model.beta(rho)?
        };
        values.push((3.0 * s).exp() * beta);
    }
    Ok(4.0 * PI * simpson_nonuniform(ss, &values))
}

// FD entropy density with a warm-started inversion along the trajectory.
fn fd_beta(model: &ModelSpec, rho: f64, seed: &mut Option<f64>) -> Result<f64> {
    use crate::fermi::{fermi_eval, fermi_inverse_half_seeded, FermiOrder};
    use crate::statistics::MODEL_FERMI;
    let t = fermi_inverse_half_seeded(2.0 * rho / model.mu, *seed, &MODEL_FERMI)?;
    *seed = Some(t);
    let pressure = model.mu / 3.0 * fermi_eval(FermiOrder::ThreeHalves, t, &MODEL_FERMI)?;
    Ok(rho * t - pressure)
}

/// Self-consistent potential energy under the chosen convention.
pub fn potential_energy_with(traj: &Trajectory, convention: PotentialConvention) -> Result<f64> {
    require_complete(traj)?;
    let values: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| (5.0 * s.s).exp() * s.q * s.q)
        .collect();
    Ok(convention.prefactor() * simpson_nonuniform(&abscissae(traj), &values))
}

/// `½∫_B |∇φ|² dx`.
pub fn potential_energy(traj: &Trajectory) -> Result<f64> {
    potential_energy_with(traj, PotentialConvention::HalfGradientSquared)
}

pub fn free_energy_with(
    model: &ModelSpec,
    traj: &Trajectory,
    convention: PotentialConvention,
) -> Result<EnergyReport> {
    let entropy = entropy(model, traj)?;
    let potential = potential_energy_with(traj, convention)?;
    Ok(EnergyReport {
        entropy,
        potential,
        free_energy: entropy - potential,
    })
}

pub fn free_energy(model: &ModelSpec, traj: &Trajectory) -> Result<EnergyReport> {
    free_energy_with(model, traj, PotentialConvention::HalfGradientSquared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::{integrate, IntegratorConfig};

    #[test]
    fn uniform_ball_limit() {
        let rho0 = 1e-4;
        let mb = ModelSpec::maxwell_boltzmann();
        let traj = integrate(&mb, rho0, &IntegratorConfig::default()).unwrap();
        let s = entropy(&mb, &traj).unwrap();
        let ball = 4.0 * PI / 3.0 * (rho0 * rho0.ln() - rho0);
        assert!(((s - ball) / ball).abs() < 1e-2, "{s} vs {ball}");
        let pot = potential_energy(&traj).unwrap();
        let ball_pot = 2.0 * PI * rho0 * rho0 / 45.0;
        assert!(
            ((pot - ball_pot) / ball_pot).abs() < 1e-2,
            "{pot} vs {ball_pot}"
        );
        let report = free_energy(&mb, &traj).unwrap();
        assert_eq!(report.free_energy, report.entropy - report.potential);
        let four_pi = potential_energy_with(&traj, PotentialConvention::FourPi).unwrap();
        assert!((four_pi / pot - 2.0).abs() < 1e-14);
    }

    #[test]
    fn incomplete_trajectory_rejected() {
        let mb = ModelSpec::maxwell_boltzmann();
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..Default::default()
        };
        let partial = crate::shooting::integrate_partial(&mb, 1.0, &cfg).unwrap();
        assert!(entropy(&mb, &partial).is_err());
        assert!(potential_energy(&partial).is_err());
    }
}
