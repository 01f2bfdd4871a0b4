//! Complete Fermi–Dirac integrals
//! `f_α(z) = ∫₀^∞ x^α / (1 + e^{x−z}) dx` for α ∈ {−1/2, 1/2, 3/2}.
//!
//! The integrals are evaluated in the variable `u = √x`, which turns the
//! `x^{−1/2}` endpoint singularity into a smooth integrand. The range is
//! split at the Fermi edge `u = √max(z, 0)`; the tail is truncated once the
//! Boltzmann bound `x^α e^{z−x}` on the remainder drops below a tenth of the
//! absolute tolerance. Far in the Boltzmann regime (`z < −25`) the
//! alternating exponential series is summed instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::roots::newton_in_bracket;

/// Below this argument the integrals are summed as exponential series.
pub const SERIES_THRESHOLD: f64 = -25.0;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FermiOrder {
    MinusHalf,
    Half,
    ThreeHalves,
}

impl FermiOrder {
    pub fn alpha(self) -> f64 {
        match self {
            FermiOrder::MinusHalf => -0.5,
            FermiOrder::Half => 0.5,
            FermiOrder::ThreeHalves => 1.5,
        }
    }

    /// Γ(α + 1).
    pub fn gamma_alpha_plus_one(self) -> f64 {
        match self {
            FermiOrder::MinusHalf => SQRT_PI,
            FermiOrder::Half => 0.5 * SQRT_PI,
            FermiOrder::ThreeHalves => 0.75 * SQRT_PI,
        }
    }

    /// The order one below, if it is supported.
    pub fn lower(self) -> Option<FermiOrder> {
        match self {
            FermiOrder::MinusHalf => None,
            FermiOrder::Half => Some(FermiOrder::MinusHalf),
            FermiOrder::ThreeHalves => Some(FermiOrder::Half),
        }
    }

    // Power of u in the integrand after x = u²: 2u^{2α+1}.
    fn u_power(self) -> i32 {
        match self {
            FermiOrder::MinusHalf => 0,
            FermiOrder::Half => 2,
            FermiOrder::ThreeHalves => 4,
        }
    }
}

impl TryFrom<f64> for FermiOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        if alpha == -0.5 {
            Ok(FermiOrder::MinusHalf)
        } else if alpha == 0.5 {
            Ok(FermiOrder::Half)
        } else if alpha == 1.5 {
            Ok(FermiOrder::ThreeHalves)
        } else {
            Err(Error::domain(format!(
                "Fermi order {alpha} not supported (expected -0.5, 0.5 or 1.5)"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiEvalConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for FermiEvalConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl FermiEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || self.abs_tol + self.rel_tol <= 0.0 {
            return Err(Error::domain(format!(
                "Fermi tolerances must be non-negative with a positive sum (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

/// Fermi occupation `1/(1 + e^w)` without overflow.
#[inline]
fn occupation(w: f64) -> f64 {
    if w > 0.0 {
        let e = (-w).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + w.exp())
    }
}

/// Which integrand: the Fermi integral itself, or the squared-occupation
/// integral `∫ √x /(1 + e^{x−z})² dx` that measures `2f_{1/2} − f_{−1/2}`.
#[derive(Clone, Copy)]
enum Kernel {
    Plain(FermiOrder),
    HalfSquared,
}

fn quadrature(kernel: Kernel, z: f64, cfg: &FermiEvalConfig) -> Result<f64> {
    let (power, alpha, squared) = match kernel {
        Kernel::Plain(order) => (order.u_power(), order.alpha(), false),
        Kernel::HalfSquared => (2, 0.5, true),
    };
    // For z < 0 integrate the integrand scaled by e^{−z} (e^{−2z} when squared),
    // so the absolute tolerance acts on an O(1) quantity.
    let scaled = z < 0.0;
    let ez = z.exp();
    let integrand = |u: f64| {
        let x = u * u;
        let n = if scaled {
            1.0 / (ez + x.exp())
        } else {
            occupation(x - z)
        };
        let n = if squared { n * n } else { n };
        2.0 * u.powi(power) * n
    };
    let edge = z.max(0.0);
    let shift = if scaled { 0.0 } else { z };
    let tail_target = cfg
        .abs_tol
        .max(cfg.rel_tol * edge.powf(alpha + 1.0).max(1e-300))
        / 10.0;
    // Remainder of ∫_X^∞ x^α e^{shift−x} dx, bounded by X^α e^{shift−X}/(1 − α/X).
    let tail_bound = |big_x: f64| {
        let factor = if alpha > 0.0 {
            1.0 / (1.0 - alpha / big_x)
        } else {
            1.0
        };
        big_x.powf(alpha) * (shift - big_x).exp() * factor
    };
    let mut cut = edge + 4.0;
    while tail_bound(cut) > tail_target {
        cut += 2.0;
    }
    let u_edge = edge.sqrt();
    let u_cut = cut.sqrt();
    // The occupation is within e^{−40} of 1 below x = z − 40, so the bulk and
    // the Fermi edge are integrated separately.
    let u_bulk = (edge - 40.0).max(0.0).sqrt();
    let abs_piece = 0.3 * cfg.abs_tol;
    let mut sum = 0.0;
    for (a, b) in [(0.0, u_bulk), (u_bulk, u_edge), (u_edge, u_cut)] {
        sum += integrate_adaptive(
            integrand,
            a,
            b,
            abs_piece,
            cfg.rel_tol,
            cfg.max_subdivisions,
        )?
        .value;
    }
    Ok(if scaled {
        sum * if squared { ez * ez } else { ez }
    } else {
        sum
    })
}

/// Alternating series `Γ(α+1) Σ_k (−1)^{k+1} c_k e^{kz} k^{−(α+1)}`, with
/// `c_k = 1` for the plain kernel and `c_k = −(k−1)` (from k = 2) for the
/// squared-occupation kernel.
fn series(kernel: Kernel, z: f64, cfg: &FermiEvalConfig) -> f64 {
    let (gamma, exponent) = match kernel {
        Kernel::Plain(order) => (order.gamma_alpha_plus_one(), order.alpha() + 1.0),
        Kernel::HalfSquared => (0.5 * SQRT_PI, 1.5),
    };
    let mut sum = 0.0;
    for k in 1..200u32 {
        let kf = k as f64;
        let coeff = match kernel {
            Kernel::Plain(_) => {
                if k % 2 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kernel::HalfSquared => {
                if k == 1 {
                    continue;
                }
                if k % 2 == 0 {
                    kf - 1.0
                } else {
                    -(kf - 1.0)
                }
            }
        };
        let term = coeff * (kf * z).exp() / kf.powf(exponent);
        sum += term;
        if term.abs() <= (cfg.abs_tol / 10.0).min(f64::EPSILON * sum.abs()) {
            break;
        }
    }
    gamma * sum
}

fn check_argument(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Fermi integral argument must be finite, got {z}"
        )))
    }
}

/// `f_α(z)` to within `max(abs_tol, rel_tol·|f_α(z)|)`.
pub fn fermi_eval(order: FermiOrder, z: f64, cfg: &FermiEvalConfig) -> Result<f64> {
    check_argument(z)?;
    cfg.validate()?;
    if z < SERIES_THRESHOLD {
        Ok(series(Kernel::Plain(order), z, cfg))
    } else {
        quadrature(Kernel::Plain(order), z, cfg)
    }
}

/// `∫₀^∞ √x / (1 + e^{x−z})² dx`, equal to `f_{1/2}(z) − f_{−1/2}(z)/2`
/// by an integration by parts, but free of the cancellation between them.
pub fn fermi_half_excess(z: f64, cfg: &FermiEvalConfig) -> Result<f64> {
    check_argument(z)?;
    cfg.validate()?;
    if z < SERIES_THRESHOLD {
        Ok(series(Kernel::HalfSquared, z, cfg))
    } else {
        quadrature(Kernel::HalfSquared, z, cfg)
    }
}

/// `d f_α / dz = α f_{α−1}(z)`, available for α = 1/2 and 3/2.
pub fn fermi_derivative(order: FermiOrder, z: f64, cfg: &FermiEvalConfig) -> Result<f64> {
    let lower = order
        .lower()
        .ok_or_else(|| Error::Unsupported("derivative of f_{-1/2} would need f_{-3/2}".into()))?;
    Ok(order.alpha() * fermi_eval(lower, z, cfg)?)
}

/// Inverse of `f_{1/2}`: the `z` with `f_{1/2}(z) = v`.
pub fn fermi_inverse_half(v: f64, cfg: &FermiEvalConfig) -> Result<f64> {
    fermi_inverse_half_seeded(v, None, cfg)
}

/// [`fermi_inverse_half`] starting Newton from `seed` (typically the
/// previous solution when `v` varies slowly).
///
/// Newton runs on `log f_{1/2}(z) − log v`, whose slope `f_{−1/2}/(2f_{1/2})`
/// stays between 0 and 1. The bracket comes from the two asymptotic
/// branches: `f_{1/2}(z) ≤ Γ(3/2)e^z` everywhere and
/// `f_{1/2}(z) ≥ (2/3)z^{3/2}` for `z > 0`.
pub fn fermi_inverse_half_seeded(v: f64, seed: Option<f64>, cfg: &FermiEvalConfig) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::domain(format!(
            "inverse of f_1/2 needs a finite positive value, got {v}"
        )));
    }
    cfg.validate()?;
    let log_v = v.ln();
    let lo = log_v - FermiOrder::Half.gamma_alpha_plus_one().ln();
    let hi = (1.5 * v).powf(2.0 / 3.0).max(lo);
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return Ok(lo);
    }
    let guess = seed.unwrap_or(if v < 1.0 { lo } else { hi });
    let root = newton_in_bracket(
        |z| {
            let f = fermi_eval(FermiOrder::Half, z, cfg)?;
            let df = fermi_derivative(FermiOrder::Half, z, cfg)?;
            Ok((f.ln() - log_v, df / f))
        },
        lo,
        hi,
        true,
        guess,
        1e-14,
        200,
    )?;
    Ok(root.x)
}

/// Leading large-argument behaviour `z^{α+1}/(α+1)`.
pub fn degenerate_asymptote(order: FermiOrder, z: f64) -> f64 {
    let a1 = order.alpha() + 1.0;
    z.powf(a1) / a1
}

/// Sommerfeld expansion to second order, `z^{α+1}/(α+1)·(1 + π²α(α+1)/(6z²))`.
pub fn sommerfeld(order: FermiOrder, z: f64) -> f64 {
    let a = order.alpha();
    degenerate_asymptote(order, z) * (1.0 + PI * PI * a * (a + 1.0) / (6.0 * z * z))
}
