//! Dormand–Prince 5(4) with PI step-size control.
//!
//! The integrator lands exactly on every requested output abscissa, so
//! sampled values carry the full step accuracy instead of the lower-order
//! dense interpolant. Integration runs in either direction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// What the per-step hook wants next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// All outputs reached.
    Completed,
    /// The step hook asked to stop at this abscissa.
    Stopped { t: f64 },
    /// `max_steps` accepted/rejected steps were spent at this abscissa.
    StepLimit { t: f64 },
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    /// Output abscissae reached, in integration order.
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub stats: StepStats,
    pub termination: Termination,
    /// State after the last accepted step (may lie between outputs).
    pub last: (f64, [f64; N]),
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn error_norm<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    err: &[f64; N],
    cfg: &StepperConfig,
) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        sum += r * r;
    }
    (sum / N as f64).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `(t0, y0)` through the sorted `outputs`
/// (all on the same side of `t0`, ordered away from it; an output equal to
/// `t0` records the initial state).
///
/// `hook` sees every accepted state and may adjust it in place (for
/// clamping) or stop the integration.
pub fn integrate<const N: usize, F, H>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    cfg: &StepperConfig,
    mut hook: H,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    H: FnMut(f64, &mut [f64; N]) -> Result<Flow>,
{
    let mut stats = StepStats::default();
    let mut ts = Vec::with_capacity(outputs.len());
    let mut ys = Vec::with_capacity(outputs.len());
    let Some(&t_end) = outputs.last() else {
        return Ok(Solution {
            ts,
            ys,
            stats,
            termination: Termination::Completed,
            last: (t0, y0),
        });
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut next_out = 0;
    while next_out < outputs.len() && (outputs[next_out] - t0) * dir <= 0.0 {
        ts.push(outputs[next_out]);
        ys.push(y0);
        next_out += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    stats.rhs_evals += 1;

    // Initial step from the usual derivative-scale heuristic.
    let span = (t_end - t0).abs();
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        d0 = d0.max((y[i] / sc).abs());
        d1 = d1.max((k1[i] / sc).abs());
    }
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(span).max(1e-12 * span.max(1.0));
    let mut prev_err: f64 = 1e-4;
    let mut last_rejected = false;

    while next_out < outputs.len() {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Ok(Solution {
                ts,
                ys,
                stats,
                termination: Termination::StepLimit { t },
                last: (t, y),
            });
        }
        let target = outputs[next_out];
        let remaining = (target - t).abs();
        let clamped = h >= remaining;
        let h_used = if clamped { remaining } else { h };
        if h_used <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Integration {
                s: t,
                reason: format!("step size underflow (h = {h_used:e})"),
            });
        }
        let hs = dir * h_used;

        let k2 = rhs(t + C2 * hs, &combine(&y, hs, &[(A21, &k1)]))?;
        let k3 = rhs(t + C3 * hs, &combine(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(
            t + C4 * hs,
            &combine(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = rhs(
            t + C5 * hs,
            &combine(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            t + hs,
            &combine(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let t_new = if clamped { target } else { t + hs };
        let y_new = combine(
            &y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = rhs(t_new, &y_new)?;
        stats.rhs_evals += 6;

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&y, &y_new, &err, cfg);
        if !en.is_finite() {
            stats.rejected += 1;
            h = h_used * FAC_MIN;
            last_rejected = true;
            continue;
        }

        if en <= 1.0 {
            let fac =
                (SAFETY * en.max(1e-10).powf(-EXPO) * prev_err.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            prev_err = en.max(1e-4);
            last_rejected = false;
            stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            // A clamped step says nothing about the natural step; keep the larger.
            h = if clamped {
                h.max(h_used * fac)
            } else {
                h_used * fac
            };
            let before = y;
            let flow = hook(t, &mut y)?;
            if y != before {
                k1 = rhs(t, &y)?;
                stats.rhs_evals += 1;
            }
            if clamped {
                ts.push(target);
                ys.push(y);
                next_out += 1;
            }
            if flow == Flow::Stop {
                return Ok(Solution {
                    ts,
                    ys,
                    stats,
                    termination: Termination::Stopped { t },
                    last: (t, y),
                });
            }
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = h_used * (SAFETY * en.powf(-EXPO)).clamp(FAC_MIN, 1.0);
        }
    }
    Ok(Solution {
        ts,
        ys,
        stats,
        termination: Termination::Completed,
        last: (t, y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(tol: f64) -> StepperConfig {
        StepperConfig {
            abs_tol: tol,
            rel_tol: tol,
            max_steps: 100_000,
        }
    }

    #[test]
    fn harmonic_oscillator_hits_outputs() {
        let outs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let sol = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            &outs,
            &cfg(1e-11),
            |_, _| Ok(Flow::Continue),
        )
        .unwrap();
        assert_eq!(sol.termination, Termination::Completed);
        assert_eq!(sol.ts, outs);
        for (t, y) in sol.ts.iter().zip(&sol.ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t = {t}");
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(
            |_, y: &[f64; 1]| Ok([y[0]]),
            0.0,
            [1.0],
            &[-1.0, -5.0],
            &cfg(1e-12),
            |_, _| Ok(Flow::Continue),
        )
        .unwrap();
        assert!((sol.ys[1][0] - (-5.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn hook_can_stop() {
        let sol = integrate(
            |_, _: &[f64; 1]| Ok([-1.0]),
            0.0,
            [1.0],
            &[10.0],
            &cfg(1e-10),
            |_, y| {
                Ok(if y[0] < 0.0 {
                    Flow::Stop
                } else {
                    Flow::Continue
                })
            },
        )
        .unwrap();
        match sol.termination {
            Termination::Stopped { t } => assert!(t > 1.0 && t < 10.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn step_limit_is_reported() {
        let sol = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            &[100.0],
            &StepperConfig {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                max_steps: 10,
            },
            |_, _| Ok(Flow::Continue),
        )
        .unwrap();
        assert!(matches!(sol.termination, Termination::StepLimit { .. }));
    }

    #[test]
    fn fifth_order_convergence() {
        // Error should fall by roughly 2^5 per halving of a fixed-size problem;
        // check the adaptive version meets a tolerance sweep monotonically.
        let mut last = f64::INFINITY;
        for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
            let sol = integrate(
                |t, y: &[f64; 1]| Ok([y[0] * t.cos()]),
                0.0,
                [1.0],
                &[6.0],
                &cfg(tol),
                |_, _| Ok(Flow::Continue),
            )
            .unwrap();
            let err = (sol.ys[0][0] - 6f64.sin().exp()).abs();
            assert!(err < 50.0 * tol, "tol {tol}: err {err}");
            assert!(err < last * 2.0);
            last = err;
        }
    }
}
