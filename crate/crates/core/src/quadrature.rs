//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and a
//! composite Simpson rule for sampled data on non-uniform grids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]` until the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)`, bisecting the worst segment each round.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 1;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::Accuracy {
                what: format!("quadrature on [{a}, {b}] after {subdivisions} subdivisions"),
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment no longer splittable in f64; accept what we have.
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        subdivisions += 1;
    }
    // Re-sum to shed the drift of the running totals.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        subdivisions,
    })
}

/// Integral of the quadratic through three points, restricted to `[x1, x2]`.
fn last_interval(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    h1 * (f[2] * (2.0 * h1 + 3.0 * h0) / (h0 + h1) + f[1] * (h1 + 3.0 * h0) / h0
        - f[0] * h1 * h1 / (h0 * (h0 + h1)))
        / 6.0
}

/// Composite Simpson rule on a strictly increasing, possibly non-uniform grid.
///
/// Pairs of intervals use the three-point quadratic fit; an odd trailing
/// interval is integrated with the quadratic through the last three points.
pub fn simpson_nonuniform(xs: &[f64], fs: &[f64]) -> f64 {
    assert_eq!(xs.len(), fs.len());
    let n = xs.len();
    match n {
        0 | 1 => return 0.0,
        2 => return 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]),
        _ => {}
    }
    let mut sum = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = xs[i + 1] - xs[i];
        let h1 = xs[i + 2] - xs[i + 1];
        let hs = h0 + h1;
        sum += hs / 6.0
            * ((2.0 - h1 / h0) * fs[i]
                + hs * hs / (h0 * h1) * fs[i + 1]
                + (2.0 - h0 / h1) * fs[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        sum += last_interval(
            [xs[n - 3], xs[n - 2], xs[n - 1]],
            [fs[n - 3], fs[n - 2], fs[n - 1]],
        );
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomials_and_exponentials() {
        let r = integrate_adaptive(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-13, 0.0, 50).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let r = integrate_adaptive(|x: f64| (-x).exp(), 0.0, 40.0, 1e-13, 0.0, 200).unwrap();
        assert!((r.value - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn sharp_step_needs_subdivision() {
        let f = |x: f64| 1.0 / (1.0 + ((x - 3.0) * 200.0).exp());
        let r = integrate_adaptive(f, 0.0, 10.0, 1e-11, 0.0, 500).unwrap();
        // ∫₀^∞ of the logistic step equals 3 + log(1 + e^{-600})/200.
        assert!((r.value - 3.0).abs() < 1e-10, "{}", r.value);
        assert!(r.subdivisions > 1);
    }

    #[test]
    fn subdivision_budget_is_reported() {
        let f = |x: f64| 1.0 / (1.0 + ((x - 3.0) * 1e4).exp());
        match integrate_adaptive(f, 0.0, 10.0, 1e-14, 0.0, 3) {
            Err(Error::Accuracy { estimate, .. }) => assert!(estimate > 1e-14),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn simpson_exact_for_quadratics_on_uneven_grids() {
        let xs = [0.0, 0.1, 0.35, 0.4, 1.0, 1.7, 2.0];
        let fs: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let exact = 8.0 - 2.0 + 4.0;
        assert!((simpson_nonuniform(&xs, &fs) - exact).abs() < 1e-12);
        let xs = &xs[..6];
        let fs: Vec<f64> = xs.iter().map(|x| x * x - x + 2.0).collect();
        let b = 1.7f64;
        let exact = b.powi(3) / 3.0 - b * b / 2.0 + 2.0 * b;
        assert!((simpson_nonuniform(xs, &fs) - exact).abs() < 1e-12);
    }
}
