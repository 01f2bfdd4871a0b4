//! CSV and JSON serialization of branch data.
//!
//! CSV cells carry 17 significant digits (`{:.16e}`), enough to recover
//! every `f64` exactly, so parsing an emitted file and writing it again
//! reproduces it byte for byte. JSON uses the shortest representation that
//! round-trips.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use gravistat_core::{Branch, BranchSample};
use serde::Serialize;

pub const BRANCH_COLUMNS: [&str; 8] = [
    "rho0",
    "mass",
    "m",
    "sup_density",
    "lambda",
    "entropy",
    "potential",
    "free_energy",
];

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(s: &BranchSample) -> [f64; 8] {
    [
        s.rho0,
        s.mass,
        s.m,
        s.sup_density,
        s.lambda,
        s.entropy,
        s.potential,
        s.free_energy,
    ]
}

pub fn write_samples_csv<W: Write>(out: W, samples: &[BranchSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BRANCH_COLUMNS)?;
    for s in samples {
        w.write_record(row(s).map(format_number))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_branch_csv<W: Write>(out: W, branch: &Branch) -> Result<()> {
    write_samples_csv(out, &branch.samples)
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<BranchSample>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != BRANCH_COLUMNS {
        bail!("unexpected CSV header {header:?}, expected {BRANCH_COLUMNS:?}");
    }
    let mut samples = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let mut v = [0.0; 8];
        for (slot, cell) in v.iter_mut().zip(record.iter()) {
            *slot = cell
                .trim()
                .parse()
                .with_context(|| format!("row {}: cannot parse '{cell}'", line + 1))?;
        }
        samples.push(BranchSample {
            rho0: v[0],
            mass: v[1],
            m: v[2],
            sup_density: v[3],
            lambda: v[4],
            entropy: v[5],
            potential: v[6],
            free_energy: v[7],
        });
    }
    Ok(samples)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_branch_json<R: Read>(input: R) -> Result<Branch> {
    Ok(serde_json::from_reader(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gravistat_core::ModelSpec;

    fn awkward_samples() -> Vec<BranchSample> {
        [
            0.1,
            1.0 / 3.0,
            2e-308,
            123456.789e10,
            -0.0,
            f64::MIN_POSITIVE,
            std::f64::consts::PI,
        ]
        .iter()
        .map(|&v| BranchSample {
            rho0: v,
            mass: -v,
            m: v / 7.0,
            sup_density: v,
            lambda: v.sqrt(),
            entropy: v * 3.0,
            potential: 1.0 - v,
            free_energy: v.ln_1p(),
        })
        .collect()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let samples = awkward_samples();
        let mut first = Vec::new();
        write_samples_csv(&mut first, &samples).unwrap();
        let parsed = read_samples_csv(first.as_slice()).unwrap();
        for (a, b) in parsed.iter().zip(&samples) {
            assert_eq!(row(a).map(f64::to_bits), row(b).map(f64::to_bits));
        }
        let mut second = Vec::new();
        write_samples_csv(&mut second, &parsed).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("rho0,mass,m,sup_density,lambda,entropy,potential,free_energy\n"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let branch = Branch {
            model: ModelSpec::fermi_dirac(0.1).unwrap(),
            samples: awkward_samples(),
            failures: vec![],
        };
        let first = to_json(&branch).unwrap();
        let parsed = read_branch_json(first.as_bytes()).unwrap();
        assert_eq!(parsed, branch);
        assert_eq!(to_json(&parsed).unwrap(), first);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_samples_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
