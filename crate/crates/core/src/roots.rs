//! Scalar root finding on brackets.

use crate::error::{Error, Result};

/// Outcome of a bracketed solve.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Newton's method kept inside a sign-changing bracket `[lo, hi]`.
///
/// `f` returns the residual and its derivative. A Newton step that leaves
/// the bracket or fails to halve the residual counts as a failure and is
/// replaced by bisection; after three failures the solver bisects to the
/// end. Converges when the step is below `x_tol·max(1, |x|)`.
pub fn newton_bracketed<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    x0: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == 0.0 {
        return Ok(Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
        });
    }
    if fhi == 0.0 {
        return Ok(Root {
            x: hi,
            fx: 0.0,
            iterations: 0,
        });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::precondition(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    newton_in_bracket(f, lo, hi, fhi > 0.0, x0, x_tol, max_iter)
}

/// Like [`newton_bracketed`] but trusts the caller that the residual is
/// negative at `lo` and positive at `hi` (or the reverse when `rising` is
/// false), saving the two endpoint evaluations.
pub fn newton_in_bracket<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rising: bool,
    x0: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut x = if x0 > lo && x0 < hi {
        x0
    } else {
        0.5 * (lo + hi)
    };
    let (mut fx, mut dfx) = f(x)?;
    let mut failures = 0;
    for it in 1..=max_iter {
        if fx == 0.0 {
            return Ok(Root {
                x,
                fx,
                iterations: it,
            });
        }
        if (fx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        let use_newton =
            failures < 3 && dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi;
        let next = if use_newton { newton } else { 0.5 * (lo + hi) };
        let (fn_, dfn) = f(next)?;
        if use_newton && fn_.abs() > 0.5 * fx.abs() {
            failures += 1;
        }
        let step = (next - x).abs();
        x = next;
        fx = fn_;
        dfx = dfn;
        if step <= x_tol * x.abs().max(1.0) || hi - lo <= x_tol * x.abs().max(1.0) {
            return Ok(Root {
                x,
                fx,
                iterations: it,
            });
        }
    }
    Err(Error::Accuracy {
        what: format!("bracketed Newton did not converge in {max_iter} iterations"),
        estimate: hi - lo,
    })
}

/// Secant iteration safeguarded by bisection, for residuals without a
/// derivative. The bracket endpoints and their residuals are supplied by
/// the caller. Stops once the bracket is narrower than `x_tol` and the best
/// residual seen is within `f_tol`.
#[allow(clippy::too_many_arguments)]
pub fn secant_bisection<F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    x_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b || fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
        return Err(Error::precondition(format!(
            "bracket [{a}, {b}] does not enclose a sign change ({fa:e}, {fb:e})"
        )));
    }
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: 0.0,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: 0.0,
            iterations: 0,
        });
    }
    let mut stalled = false;
    let mut best = if fa.abs() < fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for it in 1..=max_iter {
        let width = (b - a).abs();
        let lo = a.min(b);
        let hi = a.max(b);
        let margin = 0.05 * width;
        let secant = b - fb * (b - a) / (fb - fa);
        // Bisect when the secant point hugs an endpoint or the last step stalled.
        let x = if !stalled && secant.is_finite() && secant > lo + margin && secant < hi - margin {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            return Ok(Root {
                x,
                fx,
                iterations: it,
            });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        stalled = (b - a).abs() > 0.5 * width;
        if (b - a).abs() <= x_tol && best.1.abs() <= f_tol {
            return Ok(Root {
                x: best.0,
                fx: best.1,
                iterations: it,
            });
        }
    }
    Err(Error::Accuracy {
        what: format!("secant/bisection did not converge in {max_iter} iterations"),
        estimate: (b - a).abs(),
    })
}
