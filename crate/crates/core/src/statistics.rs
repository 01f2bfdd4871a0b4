//! The three statistics and their thermodynamic maps.
//!
//! Each model provides the enthalpy `H`, its inverse `F = H⁻¹`, the
//! response `R = 1/H'`, the pressure `P` with `P' = zH'`, the entropy
//! density `β = zH − P` and the defect `S(z) = z − R(z)`.
//!
//! | model | `H(z)` | `R(z)` |
//! |-------|--------|--------|
//! | MB    | `log z` | `z` |
//! | sFD   | `log z + (3/2)η z^{2/3}` | `z / (1 + η z^{2/3})` |
//! | FD    | `f_{1/2}⁻¹(2z/μ)` | `(μ/4) f_{−1/2}(H(z))` |
//!
//! with `μ² η³ = 8/3` tying the FD scale to the sFD parameter.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::{
    fermi_eval, fermi_half_excess, fermi_inverse_half_seeded, FermiEvalConfig, FermiOrder,
};
use crate::roots::newton_bracketed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistics {
    #[serde(rename = "mb")]
    MaxwellBoltzmann,
    #[serde(rename = "sfd")]
    SimplifiedFermiDirac,
    #[serde(rename = "fd")]
    FermiDirac,
}

impl Statistics {
    pub fn short_name(self) -> &'static str {
        match self {
            Statistics::MaxwellBoltzmann => "mb",
            Statistics::SimplifiedFermiDirac => "sfd",
            Statistics::FermiDirac => "fd",
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mb" | "maxwell-boltzmann" => Ok(Statistics::MaxwellBoltzmann),
            "sfd" | "simplified-fermi-dirac" => Ok(Statistics::SimplifiedFermiDirac),
            "fd" | "fermi-dirac" => Ok(Statistics::FermiDirac),
            other => Err(Error::domain(format!(
                "unknown statistics '{other}' (mb, sfd, fd)"
            ))),
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Model selection. Immutable once built; use [`ModelSpec::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: Statistics,
    pub eta: f64,
    /// FD scale `μ = √(8/(3η³))`; zero for the other models.
    pub mu: f64,
}

/// Pressure and entropy density at one density value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoValues {
    pub pressure: f64,
    pub entropy_density: f64,
}

/// Accuracy used for every Fermi integral evaluated by the FD model.
pub const MODEL_FERMI: FermiEvalConfig = FermiEvalConfig {
    abs_tol: 1e-12,
    rel_tol: 1e-12,
    max_subdivisions: 4000,
};

fn require_positive(z: f64, what: &str) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} needs a finite z > 0, got {z}"
        )))
    }
}

impl ModelSpec {
    pub fn new(kind: Statistics, eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::domain(format!(
                "eta must be finite and >= 0, got {eta}"
            )));
        }
        let mu = match kind {
            Statistics::MaxwellBoltzmann => {
                if eta != 0.0 {
                    return Err(Error::domain(format!(
                        "Maxwell-Boltzmann statistics require eta = 0, got {eta}"
                    )));
                }
                0.0
            }
            Statistics::SimplifiedFermiDirac => 0.0,
            Statistics::FermiDirac => {
                if eta == 0.0 {
                    return Err(Error::domain(
                        "Fermi-Dirac statistics need eta > 0 (mu undefined)",
                    ));
                }
                (8.0 / (3.0 * eta.powi(3))).sqrt()
            }
        };
        Ok(Self { kind, eta, mu })
    }

    pub fn maxwell_boltzmann() -> Self {
        Self {
            kind: Statistics::MaxwellBoltzmann,
            eta: 0.0,
            mu: 0.0,
        }
    }

    pub fn simplified_fermi_dirac(eta: f64) -> Result<Self> {
        Self::new(Statistics::SimplifiedFermiDirac, eta)
    }

    pub fn fermi_dirac(eta: f64) -> Result<Self> {
        Self::new(Statistics::FermiDirac, eta)
    }

    /// Checks the invariants of a deserialized spec.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = Self::new(self.kind, self.eta)?;
        if self.kind == Statistics::FermiDirac {
            let relation = self.mu * self.mu * self.eta.powi(3);
            if ((relation - 8.0 / 3.0) / (8.0 / 3.0)).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "mu^2 eta^3 = {relation}, expected 8/3"
                )));
            }
        } else if self.mu != rebuilt.mu {
            return Err(Error::domain(
                "mu is only defined for Fermi-Dirac statistics",
            ));
        }
        Ok(())
    }

    /// True when every map coincides with the Maxwell–Boltzmann one.
    pub fn is_boltzmann_limit(&self) -> bool {
        self.kind != Statistics::FermiDirac && self.eta == 0.0
    }

    /// `H(z)`.
    pub fn enthalpy(&self, z: f64) -> Result<f64> {
        require_positive(z, "enthalpy")?;
        Ok(match self.kind {
            Statistics::MaxwellBoltzmann => z.ln(),
            Statistics::SimplifiedFermiDirac => z.ln() + 1.5 * self.eta * z.powf(2.0 / 3.0),
            Statistics::FermiDirac => self.fd_level(z, &mut None)?,
        })
    }

    /// `H'(z) = 1/R(z)`, in closed form where one exists.
    pub fn enthalpy_slope(&self, z: f64) -> Result<f64> {
        Ok(1.0 / self.response(z)?)
    }

    /// `F(t) = H⁻¹(t)`.
    pub fn inverse_enthalpy(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain(format!(
                "inverse enthalpy needs finite t, got {t}"
            )));
        }
        match self.kind {
            Statistics::MaxwellBoltzmann => Ok(t.exp()),
            Statistics::FermiDirac => {
                Ok(0.5 * self.mu * fermi_eval(FermiOrder::Half, t, &MODEL_FERMI)?)
            }
            Statistics::SimplifiedFermiDirac => {
                if self.eta == 0.0 {
                    return Ok(t.exp());
                }
                // Solve w + (3/2)η e^{2w/3} = t for w = log z; the residual is
                // non-negative at w = t and at the degenerate estimate when
                // that is positive, so only the lower end needs searching.
                let eta = self.eta;
                let residual = |w: f64| w + 1.5 * eta * (2.0 * w / 3.0).exp() - t;
                let degenerate = 1.5 * (t / (1.5 * eta)).ln();
                let hi = if degenerate > 0.0 && degenerate < t {
                    degenerate
                } else {
                    t
                };
                let mut width = 1.0;
                let mut lo = hi - width;
                while residual(lo) > 0.0 {
                    width *= 2.0;
                    lo = hi - width;
                }
                let root = newton_bracketed(
                    |w| Ok((residual(w), 1.0 + eta * (2.0 * w / 3.0).exp())),
                    lo,
                    hi,
                    0.5 * (lo + hi),
                    1e-15,
                    200,
                )?;
                Ok(root.x.exp())
            }
        }
    }

    /// `R(z) = 1/H'(z)`.
    pub fn response(&self, z: f64) -> Result<f64> {
        self.response_seeded(z, &mut None)
    }

    /// [`ModelSpec::response`] with a caller-owned warm start for the FD
    /// inversion. The seed is updated with the latest `f_{1/2}⁻¹` value.
    pub fn response_seeded(&self, z: f64, seed: &mut Option<f64>) -> Result<f64> {
        require_positive(z, "response")?;
        Ok(match self.kind {
            Statistics::MaxwellBoltzmann => z,
            Statistics::SimplifiedFermiDirac => z / (1.0 + self.eta * z.powf(2.0 / 3.0)),
            Statistics::FermiDirac => {
                let t = self.fd_level(z, seed)?;
                if t > 0.0 {
                    0.25 * self.mu * fermi_eval(FermiOrder::MinusHalf, t, &MODEL_FERMI)?
                } else {
                    // Here R/z > 0.79, so subtracting the defect loses nothing.
                    z - 0.5 * self.mu * fermi_half_excess(t, &MODEL_FERMI)?
                }
            }
        })
    }

    /// Pressure `P(z)` and entropy density `β(z) = zH(z) − P(z)`.
    pub fn thermo(&self, z: f64) -> Result<ThermoValues> {
        require_positive(z, "thermo")?;
        Ok(match self.kind {
            Statistics::MaxwellBoltzmann => ThermoValues {
                pressure: z,
                entropy_density: z * z.ln() - z,
            },
            Statistics::SimplifiedFermiDirac => {
                let z53 = z.powf(5.0 / 3.0);
                ThermoValues {
                    pressure: z + 0.6 * self.eta * z53,
                    entropy_density: z * z.ln() - z + 0.9 * self.eta * z53,
                }
            }
            Statistics::FermiDirac => {
                let t = self.fd_level(z, &mut None)?;
                let pressure =
                    self.mu / 3.0 * fermi_eval(FermiOrder::ThreeHalves, t, &MODEL_FERMI)?;
                ThermoValues {
                    pressure,
                    entropy_density: z * t - pressure,
                }
            }
        })
    }

    /// Entropy density alone.
    pub fn beta(&self, z: f64) -> Result<f64> {
        Ok(self.thermo(z)?.entropy_density)
    }

    /// `S(z) = z − R(z)`, computed without cancellation.
    pub fn defect(&self, z: f64) -> Result<f64> {
        require_positive(z, "defect")?;
        Ok(match self.kind {
            Statistics::MaxwellBoltzmann => 0.0,
            Statistics::SimplifiedFermiDirac => {
                let z23 = z.powf(2.0 / 3.0);
                self.eta * z * z23 / (1.0 + self.eta * z23)
            }
            Statistics::FermiDirac => {
                let t = self.fd_level(z, &mut None)?;
                0.5 * self.mu * fermi_half_excess(t, &MODEL_FERMI)?
            }
        })
    }

    /// FD chemical level `t = f_{1/2}⁻¹(2z/μ)`.
    fn fd_level(&self, z: f64, seed: &mut Option<f64>) -> Result<f64> {
        let t = fermi_inverse_half_seeded(2.0 * z / self.mu, *seed, &MODEL_FERMI)?;
        *seed = Some(t);
        Ok(t)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Statistics::MaxwellBoltzmann => write!(f, "mb"),
            kind => write!(f, "{kind}(eta={})", self.eta),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn construction_rules() {
        let fd = ModelSpec::new(Statistics::FermiDirac, 0.1).unwrap();
        assert!((fd.mu - 51.639_778).abs() < 1e-5);
        assert!(fd.validate().is_ok());
        assert!(ModelSpec::new(Statistics::MaxwellBoltzmann, 0.0).is_ok());
        assert!(ModelSpec::new(Statistics::MaxwellBoltzmann, 0.1).is_err());
        assert!(ModelSpec::new(Statistics::FermiDirac, 0.0).is_err());
        assert!(ModelSpec::new(Statistics::SimplifiedFermiDirac, -0.1).is_err());
        assert!(ModelSpec::new(Statistics::SimplifiedFermiDirac, 0.0).is_ok());
        let broken = ModelSpec { mu: 3.0, ..fd };
        assert!(broken.validate().is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "SFD".parse::<Statistics>().unwrap(),
            Statistics::SimplifiedFermiDirac
        );
        assert!("bose".parse::<Statistics>().is_err());
    }

    #[test]
    fn simplified_with_zero_eta_is_boltzmann() {
        let s = ModelSpec::simplified_fermi_dirac(0.0).unwrap();
        let mb = ModelSpec::maxwell_boltzmann();
        for z in [1e-4, 0.3, 1.0, 7.5, 1e5] {
            assert_eq!(s.response(z).unwrap(), z);
            assert_eq!(s.enthalpy(z).unwrap(), z.ln());
            assert_eq!(s.thermo(z).unwrap(), mb.thermo(z).unwrap());
            assert_eq!(s.defect(z).unwrap(), 0.0);
        }
        assert_eq!(s.inverse_enthalpy(0.7).unwrap(), 0.7f64.exp());
    }

    #[test]
    fn closed_form_values() {
        let mb = ModelSpec::maxwell_boltzmann();
        assert_eq!(mb.response(5.0).unwrap(), 5.0);
        assert!(close(mb.enthalpy(std::f64::consts::E).unwrap(), 1.0, 1e-15));
        assert_eq!(mb.inverse_enthalpy(0.0).unwrap(), 1.0);
        assert_eq!(
            mb.thermo(1.0).unwrap(),
            ThermoValues {
                pressure: 1.0,
                entropy_density: -1.0
            }
        );
        assert_eq!(mb.defect(3.0).unwrap(), 0.0);

        let s = ModelSpec::simplified_fermi_dirac(0.5).unwrap();
        assert!(close(s.response(8.0).unwrap(), 1.0 / (0.125 + 0.25), 1e-14));
        let s = ModelSpec::simplified_fermi_dirac(0.1).unwrap();
        assert!(close(s.enthalpy(1.0).unwrap(), 0.15, 1e-15));
        assert!(close(s.thermo(1.0).unwrap().entropy_density, -0.91, 1e-15));
        assert!(close(s.defect(1.0).unwrap(), 0.1 / 1.1, 1e-15));
    }

    #[test]
    fn fd_inverse_enthalpy_at_zero() {
        let fd = ModelSpec::fermi_dirac(0.1).unwrap();
        let v = fd.inverse_enthalpy(0.0).unwrap();
        assert!((v - 51.639_778 / 2.0 * 0.678_093_8).abs() < 1e-3, "{v}");
    }

    #[test]
    fn fd_enthalpy_round_trip() {
        let fd = ModelSpec::fermi_dirac(0.1).unwrap();
        for t in [-5.0, 0.0, 5.0] {
            let z = fd.inverse_enthalpy(t).unwrap();
            assert!((fd.enthalpy(z).unwrap() - t).abs() < 1e-8);
        }
    }

    #[test]
    fn sfd_enthalpy_round_trip_wide_range() {
        for eta in [1e-4, 0.1, 3.0] {
            let s = ModelSpec::simplified_fermi_dirac(eta).unwrap();
            for k in -6..=6 {
                let z = 10f64.powi(k);
                let back = s.inverse_enthalpy(s.enthalpy(z).unwrap()).unwrap();
                assert!(((back - z) / z).abs() < 1e-8, "eta {eta}, z {z}: {back}");
            }
        }
    }

    #[test]
    fn fd_response_branches_agree() {
        // Around t = 0 the two evaluation routes of R must coincide.
        let fd = ModelSpec::fermi_dirac(0.1).unwrap();
        for t in [-0.3, -1e-3, 1e-3, 0.3] {
            let z = fd.inverse_enthalpy(t).unwrap();
            let via_minus_half =
                0.25 * fd.mu * fermi_eval(FermiOrder::MinusHalf, t, &MODEL_FERMI).unwrap();
            assert!(close(fd.response(z).unwrap(), via_minus_half, 1e-10));
            assert!(close(fd.defect(z).unwrap(), z - via_minus_half, 1e-9));
        }
    }

    #[test]
    fn non_positive_density_rejected() {
        let fd = ModelSpec::fermi_dirac(0.1).unwrap();
        for m in [
            ModelSpec::maxwell_boltzmann(),
            ModelSpec::simplified_fermi_dirac(0.1).unwrap(),
            fd,
        ] {
            assert!(m.response(0.0).is_err());
            assert!(m.enthalpy(-1.0).is_err());
            assert!(m.thermo(0.0).is_err());
            assert!(m.defect(-2.0).is_err());
        }
        assert!(fd.inverse_enthalpy(f64::NAN).is_err());
    }
}
