//! SVG 1.1 bifurcation and energy diagrams.
//!
//! Bifurcation diagrams plot `log(1 + ‖ρ‖_∞)` against `log(1 + m)`; energy
//! diagrams plot the free energy (optionally `log(100 + F)`) against
//! `log(1 + m)`. Branches with `η = 0` are dashed.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use gravistat_core::{Branch, BranchSample, Statistics};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DiagramKind {
    #[default]
    Bifurcation,
    Energy,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiagramStyle {
    pub kind: DiagramKind,
    /// Plot `log(100 + F)` instead of `F` in energy diagrams.
    pub energy_offset: bool,
}

/// Six significant digits.
fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let digits = (5 - v.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{v:.digits$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn label(branch: &Branch) -> String {
    match branch.model.kind {
        Statistics::MaxwellBoltzmann => "MB".into(),
        Statistics::SimplifiedFermiDirac => format!("sFD η = {}", branch.model.eta),
        Statistics::FermiDirac => format!("FD η = {}", branch.model.eta),
    }
}

fn point(sample: &BranchSample, style: &DiagramStyle) -> Option<(f64, f64)> {
    let x = sample.m.ln_1p();
    let y = match style.kind {
        DiagramKind::Bifurcation => sample.sup_density.ln_1p(),
        DiagramKind::Energy if style.energy_offset => (100.0 + sample.free_energy).ln(),
        DiagramKind::Energy => sample.free_energy,
    };
    (x.is_finite() && y.is_finite()).then_some((x, y))
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|k| k * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Renders one curve per branch; a branch with a single sample becomes a
/// marker. Fails on an empty branch list or a branch without samples.
pub fn emit_diagram(branches: &[Branch], style: &DiagramStyle) -> Result<String> {
    if branches.is_empty() {
        bail!("a diagram needs at least one branch");
    }
    let curves: Vec<Vec<(f64, f64)>> = branches
        .iter()
        .map(|b| b.samples.iter().filter_map(|s| point(s, style)).collect())
        .collect();
    for (b, c) in branches.iter().zip(&curves) {
        if c.is_empty() {
            bail!("branch {} has no plottable samples", label(b));
        }
    }
    let all = curves.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    )?;
    writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;
    writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(LEFT),
        num(TOP),
        num(pw),
        num(ph)
    )?;

    writeln!(svg, r#"<g font-family="sans-serif" font-size="12">"#)?;
    for t in nice_ticks(x0, x1) {
        let x = num(sx(t));
        let base = TOP + ph;
        writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            num(base),
            num(base + 5.0)
        )?;
        writeln!(
            svg,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            num(base + 19.0),
            tick_label(t)
        )?;
    }
    for t in nice_ticks(y0, y1) {
        let y = num(sy(t));
        writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#,
            num(LEFT - 5.0),
            num(LEFT)
        )?;
        writeln!(
            svg,
            r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            num(LEFT - 8.0),
            tick_label(t)
        )?;
    }
    let y_title = match style.kind {
        DiagramKind::Bifurcation => "log(1 + ‖ρ‖∞)",
        DiagramKind::Energy if style.energy_offset => "log(100 + F)",
        DiagramKind::Energy => "F",
    };
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">log(1 + m)</text>"#,
        num(LEFT + pw / 2.0),
        num(HEIGHT - 12.0)
    )?;
    writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{y_title}</text>"#,
        num(TOP + ph / 2.0),
        num(TOP + ph / 2.0)
    )?;
    writeln!(svg, "</g>")?;

    let focus = 3f64.ln();
    if style.kind == DiagramKind::Bifurcation && focus > x0 && focus < x1 {
        let x = num(sx(focus));
        writeln!(
            svg,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#999999" stroke-dasharray="2 3"/>"##,
            num(TOP),
            num(TOP + ph)
        )?;
    }

    for (i, (branch, curve)) in branches.iter().zip(&curves).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if branch.model.eta == 0.0 {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        if curve.len() == 1 {
            let (x, y) = curve[0];
            writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="3.5" fill="{color}"/>"#,
                num(sx(x)),
                num(sy(y))
            )?;
        } else {
            let pts: Vec<String> = curve
                .iter()
                .map(|&(x, y)| format!("{},{}", num(sx(x)), num(sy(y))))
                .collect();
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            )?;
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            num(lx),
            num(ly),
            num(lx + 24.0),
            num(ly)
        )?;
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" dominant-baseline="middle">{}</text>"#,
            num(lx + 30.0),
            num(ly),
            label(branch)
        )?;
    }
    writeln!(svg, "</svg>")?;
    Ok(svg)
}
