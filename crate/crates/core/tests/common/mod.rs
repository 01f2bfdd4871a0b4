#![allow(dead_code)]

use std::f64::consts::PI;

/// Dirichlet eta `η(s) = Σ_{k≥0} (−1)^k (k+1)^{−s}`, summed with the
/// Cohen–Villegas–Zagier acceleration (exact to rounding for n ≈ 40).
pub fn dirichlet_eta(s: f64) -> f64 {
    let n = 40;
    let mut d = (3.0 + 8f64.sqrt()).powi(n);
    d = 0.5 * (d + 1.0 / d);
    let (mut b, mut c, mut sum) = (-1.0, -d, 0.0);
    for k in 0..n {
        c = b - c;
        sum += c / ((k + 1) as f64).powf(s);
        let (kf, nf) = (k as f64, n as f64);
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// `f_{1/2}(0) = Γ(3/2) η(3/2)`.
pub fn fermi_half_at_zero() -> f64 {
    0.5 * PI.sqrt() * dirichlet_eta(1.5)
}

/// `f_{−1/2}(0) = Γ(1/2) η(1/2)`.
pub fn fermi_minus_half_at_zero() -> f64 {
    PI.sqrt() * dirichlet_eta(0.5)
}

/// Boltzmann-tail series `Γ(α+1) Σ (−1)^{k+1} e^{kz} k^{−(α+1)}`, z ≤ −1.
pub fn boltzmann_series(alpha: f64, gamma: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    for k in 1..200 {
        let term = (k as f64 * z).exp() / (k as f64).powf(alpha + 1.0);
        if term < 1e-300 {
            break;
        }
        sum += if k % 2 == 1 { term } else { -term };
    }
    gamma * sum
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// `n` points in `[−r, r]` spaced logarithmically in `|z|` on both sides
/// of the origin, with `z = 0` included.
pub fn symmetric_log_grid(r: f64, n: usize) -> Vec<f64> {
    let half = (n - 1) / 2;
    let pos: Vec<f64> = log_grid(1e-3, r, half).collect();
    let mut out: Vec<f64> = pos.iter().rev().map(|z| -z).collect();
    out.push(0.0);
    out.extend(pos);
    out
}

pub fn fd_defect_constant() -> f64 {
    let text = include_str!("../fixtures/fd_defect_constant.txt");
    text.lines()
        .find(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .and_then(|l| l.trim().parse().ok())
        .expect("fixture holds a number")
}
