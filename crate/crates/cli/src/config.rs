//! Run configuration: an optional TOML file whose keys mirror the long
//! command-line flags (with `_` for `-`), overridden by the flags actually
//! given.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gravistat_core::{IntegratorConfig, ModelSpec, PotentialConvention, Statistics};
use serde::Deserialize;

/// Values read from a config file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<Statistics>,
    pub eta: Option<f64>,
    pub rho0: Option<f64>,
    pub rho0_min: Option<f64>,
    pub rho0_max: Option<f64>,
    pub points: Option<usize>,
    pub mass: Option<f64>,
    pub eps_cut: Option<f64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub dense_samples: Option<usize>,
    pub four_pi_potential: Option<bool>,
    pub energy_offset: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub const DEFAULT_RHO0_MIN: f64 = 1e-3;
pub const DEFAULT_RHO0_MAX: f64 = 1e8;
pub const DEFAULT_POINTS: usize = 2000;

/// Model selection after merging file and flags. sFD and FD need `eta`.
pub fn resolve_model(kind: Option<Statistics>, eta: Option<f64>) -> Result<ModelSpec> {
    let kind = kind.unwrap_or(Statistics::MaxwellBoltzmann);
    let eta = match (kind, eta) {
        (Statistics::MaxwellBoltzmann, eta) => eta.unwrap_or(0.0),
        (_, Some(eta)) => eta,
        (kind, None) => bail!("model {kind} needs --eta"),
    };
    Ok(ModelSpec::new(kind, eta)?)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegratorOverrides {
    pub eps_cut: Option<f64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub dense_samples: Option<usize>,
}

pub fn resolve_integrator(
    flags: IntegratorOverrides,
    file: &FileConfig,
) -> Result<IntegratorConfig> {
    let d = IntegratorConfig::default();
    let cfg = IntegratorConfig {
        eps_cut: flags.eps_cut.or(file.eps_cut).unwrap_or(d.eps_cut),
        abs_tol: flags.abs_tol.or(file.abs_tol).unwrap_or(d.abs_tol),
        rel_tol: flags.rel_tol.or(file.rel_tol).unwrap_or(d.rel_tol),
        max_steps: flags.max_steps.or(file.max_steps).unwrap_or(d.max_steps),
        dense_samples: flags
            .dense_samples
            .or(file.dense_samples)
            .unwrap_or(d.dense_samples),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Log-spaced sweep of central densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub rho0_min: f64,
    pub rho0_max: f64,
    pub points: usize,
}

pub fn resolve_sweep(
    rho0_min: Option<f64>,
    rho0_max: Option<f64>,
    points: Option<usize>,
    file: &FileConfig,
) -> Result<Sweep> {
    let sweep = Sweep {
        rho0_min: rho0_min.or(file.rho0_min).unwrap_or(DEFAULT_RHO0_MIN),
        rho0_max: rho0_max.or(file.rho0_max).unwrap_or(DEFAULT_RHO0_MAX),
        points: points.or(file.points).unwrap_or(DEFAULT_POINTS),
    };
    if !(sweep.rho0_min > 0.0 && sweep.rho0_min < sweep.rho0_max && sweep.rho0_max.is_finite()) {
        bail!(
            "need 0 < rho0-min < rho0-max, got [{}, {}]",
            sweep.rho0_min,
            sweep.rho0_max
        );
    }
    if sweep.points < 2 {
        bail!("points must be at least 2, got {}", sweep.points);
    }
    Ok(sweep)
}

pub fn resolve_convention(four_pi_potential: bool, file: &FileConfig) -> PotentialConvention {
    if four_pi_potential || file.four_pi_potential.unwrap_or(false) {
        PotentialConvention::FourPi
    } else {
        PotentialConvention::HalfGradientSquared
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig =
            toml::from_str("eps_cut = 1e-7\nabs_tol = 1e-9\npoints = 10").unwrap();
        let flags = IntegratorOverrides {
            abs_tol: Some(1e-11),
            ..Default::default()
        };
        let cfg = resolve_integrator(flags, &file).unwrap();
        assert_eq!(
            (cfg.eps_cut, cfg.abs_tol, cfg.rel_tol),
            (1e-7, 1e-11, 1e-10)
        );
        let sweep = resolve_sweep(None, Some(1e4), None, &file).unwrap();
        assert_eq!(
            sweep,
            Sweep {
                rho0_min: 1e-3,
                rho0_max: 1e4,
                points: 10
            }
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("rho_max = 3").is_err());
        let file: FileConfig = toml::from_str("model = \"sfd\"\neta = 0.01").unwrap();
        assert_eq!(file.model, Some(Statistics::SimplifiedFermiDirac));
    }

    #[test]
    fn model_resolution() {
        assert!(resolve_model(Some(Statistics::FermiDirac), None).is_err());
        assert!(resolve_model(Some(Statistics::MaxwellBoltzmann), Some(0.1)).is_err());
        let fd = resolve_model(Some(Statistics::FermiDirac), Some(0.1)).unwrap();
        assert!((fd.mu - 51.639_778).abs() < 1e-5);
        assert_eq!(
            resolve_model(None, None).unwrap(),
            ModelSpec::maxwell_boltzmann()
        );
    }

    #[test]
    fn bad_sweeps() {
        let f = FileConfig::default();
        assert!(resolve_sweep(Some(1.0), Some(0.5), None, &f).is_err());
        assert!(resolve_sweep(None, None, Some(1), &f).is_err());
    }
}
