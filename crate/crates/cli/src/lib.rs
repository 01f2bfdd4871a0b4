//! Command-line front end: sweeps, turning points, solution counts,
//! energies and validation reports, written as CSV, JSON or SVG.

pub mod config;
pub mod io;
pub mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gravistat_core::fermi::{
    fermi_derivative, fermi_eval, fermi_inverse_half, FermiEvalConfig, FermiOrder,
};
use gravistat_core::validation::{
    check_quadrant_exit, gronwall_certificate, run_standard_matrix, CheckReport, MatrixEntry,
    QuadrantExitConfig,
};
use gravistat_core::{
    count_solutions, detect_turning_points, energetics, integrate, reconstruct_profile, Branch,
    IntegratorConfig, ModelSpec, Statistics,
};
use serde::Serialize;

use config::{FileConfig, IntegratorOverrides, Sweep};
use svg::{DiagramKind, DiagramStyle};

/// Environment variable capping the worker threads of parallel sweeps.
pub const THREADS_ENV: &str = "GRAVISTAT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "gravistat",
    version,
    about = "Radial equilibria of self-gravitating gases"
)]
pub struct Cli {
    /// TOML file supplying default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a Fermi integral, its derivative or the inverse of f_{1/2}.
    Fermi(FermiArgs),
    /// Integrate one solution and print its summary.
    Solve(PointArgs),
    /// Sweep the central density and write the branch.
    Trace(TraceArgs),
    /// Locate the turning points of a branch.
    TurningPoints(SweepCommandArgs),
    /// Count solutions with a prescribed mass.
    Count(CountArgs),
    /// Entropy, potential and free energy of one solution.
    Energy(PointArgs),
    /// Run the validation matrix and write a JSON report.
    Validate(ValidateArgs),
    /// Draw bifurcation or energy diagrams as SVG.
    Diagram(DiagramArgs),
}

#[derive(Debug, Args)]
pub struct FermiArgs {
    /// Order: -0.5, 0.5 or 1.5.
    #[arg(long, allow_hyphen_values = true)]
    pub order: f64,
    /// Argument z (or the value v with --inverse).
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    /// Print d f/dz instead of f.
    #[arg(long, conflicts_with = "inverse")]
    pub derivative: bool,
    /// Solve f_{1/2}(t) = z for t.
    #[arg(long)]
    pub inverse: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Statistics: mb, sfd or fd.
    #[arg(long)]
    pub model: Option<Statistics>,
    /// Degeneracy parameter η (required for sfd and fd).
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegratorArgs {
    /// Truncation level ε at the centre.
    #[arg(long)]
    pub eps_cut: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Output intervals per trajectory.
    #[arg(long)]
    pub dense_samples: Option<usize>,
}

impl IntegratorArgs {
    fn overrides(&self) -> IntegratorOverrides {
        IntegratorOverrides {
            eps_cut: self.eps_cut,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_steps: self.max_steps,
            dense_samples: self.dense_samples,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub rho0_min: Option<f64>,
    #[arg(long)]
    pub rho0_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Central density ρ₀.
    #[arg(long)]
    pub rho0: Option<f64>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Potential energy with the 4π prefactor instead of ½∫|∇φ|².
    #[arg(long)]
    pub four_pi_potential: bool,
    /// Also write the profile (r, density, potential) as CSV.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[arg(long)]
    pub four_pi_potential: bool,
    /// Output format; defaults to the extension of --out, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepCommandArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: SweepCommandArgs,
    /// Target mass M.
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Branch to compute and draw, as `mb`, `sfd:ETA` or `fd:ETA`; repeatable.
    #[arg(long = "branch")]
    pub branches: Vec<String>,
    /// Branch JSON file written by `trace --format json`; repeatable.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Plot free energy instead of central density.
    #[arg(long)]
    pub energy: bool,
    /// Use log(100 + F) as the energy ordinate.
    #[arg(long, requires = "energy")]
    pub energy_offset: bool,
    #[arg(long)]
    pub four_pi_potential: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command, writing
/// results to `--out` or to `stdout`.
pub fn run_command<I, T>(argv: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Fermi(a) => fermi(a, stdout),
        Command::Solve(a) => solve(a, &file, stdout),
        Command::Trace(a) => trace(a, &file, stdout),
        Command::TurningPoints(a) => turning_points(a, &file, stdout),
        Command::Count(a) => count(a, &file, stdout),
        Command::Energy(a) => energy(a, &file, stdout),
        Command::Validate(a) => validate(a, &file, stdout),
        Command::Diagram(a) => diagram(a, &file, stdout),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{value}'"))?;
    // A pool may already exist when commands run repeatedly in one process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, content: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            f.write_all(content)?;
            f.flush()?;
        }
        None => stdout.write_all(content)?,
    }
    Ok(())
}

fn model_from(args: &ModelArgs, file: &FileConfig) -> Result<ModelSpec> {
    config::resolve_model(args.model.or(file.model), args.eta.or(file.eta))
}

fn sweep_from(args: &SweepArgs, file: &FileConfig) -> Result<Sweep> {
    config::resolve_sweep(args.rho0_min, args.rho0_max, args.points, file)
}

fn trace_sweep(
    model: &ModelSpec,
    sweep: Sweep,
    cfg: &IntegratorConfig,
    convention: gravistat_core::PotentialConvention,
) -> Result<Branch> {
    let branch = gravistat_core::branch::trace_branch_with(
        model,
        sweep.rho0_min,
        sweep.rho0_max,
        sweep.points,
        cfg,
        convention,
    )?;
    for f in &branch.failures {
        eprintln!("warning: rho0 = {:e} failed: {}", f.rho0, f.reason);
    }
    Ok(branch)
}

fn fermi(a: FermiArgs, stdout: &mut dyn Write) -> Result<()> {
    let order = FermiOrder::try_from(a.order)?;
    let cfg = FermiEvalConfig::default();
    let value = if a.inverse {
        if order != FermiOrder::Half {
            bail!("--inverse is only available for order 0.5");
        }
        fermi_inverse_half(a.z, &cfg)?
    } else if a.derivative {
        fermi_derivative(order, a.z, &cfg)?
    } else {
        fermi_eval(order, a.z, &cfg)?
    };
    writeln!(stdout, "{value}")?;
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary {
    model: ModelSpec,
    rho0: f64,
    mass: f64,
    m: f64,
    sup_density: f64,
    lambda: f64,
    boundary_density: f64,
    t_start: f64,
    eps_cut: f64,
    entropy: f64,
    potential: f64,
    free_energy: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    clamped: usize,
}

fn solve(a: PointArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let model = model_from(&a.model, file)?;
    let cfg = config::resolve_integrator(a.integrator.overrides(), file)?;
    let rho0 = a.rho0.or(file.rho0).context("solve needs --rho0")?;
    let convention = config::resolve_convention(a.four_pi_potential, file);
    let traj = integrate(&model, rho0, &cfg)?;
    let profile = reconstruct_profile(&traj)?;
    let energy = energetics::free_energy_with(&model, &traj, convention)?;
    if let Some(path) = &a.profile_out {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["r", "density", "potential"])?;
        for ((r, rho), phi) in profile
            .radius
            .iter()
            .zip(&profile.density)
            .zip(&profile.potential)
        {
            w.write_record([*r, *rho, *phi].map(io::format_number))?;
        }
        w.flush()?;
    }
    let summary = SolveSummary {
        model,
        rho0,
        mass: profile.mass,
        m: profile.m,
        sup_density: profile.sup_density,
        lambda: profile.lambda,
        boundary_density: profile.boundary_density,
        t_start: traj.t_start,
        eps_cut: traj.eps_cut,
        entropy: energy.entropy,
        potential: energy.potential,
        free_energy: energy.free_energy,
        accepted_steps: traj.stats.steps.accepted,
        rejected_steps: traj.stats.steps.rejected,
        clamped: traj.stats.clamped,
    };
    emit(a.out.as_deref(), stdout, io::to_json(&summary)?.as_bytes())
}

fn trace(a: TraceArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let model = model_from(&a.model, file)?;
    let sweep = sweep_from(&a.sweep, file)?;
    let cfg = config::resolve_integrator(a.integrator.overrides(), file)?;
    let convention = config::resolve_convention(a.four_pi_potential, file);
    let format = a
        .format
        .unwrap_or_else(|| match a.out.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        });
    let branch = trace_sweep(&model, sweep, &cfg, convention)?;
    let bytes = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            io::write_branch_csv(&mut buf, &branch)?;
            buf
        }
        Format::Json => io::to_json(&branch)?.into_bytes(),
    };
    emit(a.out.as_deref(), stdout, &bytes)
}

#[derive(Serialize)]
struct TurningPointReport {
    model: ModelSpec,
    rho0_min: f64,
    rho0_max: f64,
    points: usize,
    ordered: bool,
    turning_points: gravistat_core::TurningPointSet,
}

fn turning_points(a: SweepCommandArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let model = model_from(&a.model, file)?;
    let sweep = sweep_from(&a.sweep, file)?;
    let cfg = config::resolve_integrator(a.integrator.overrides(), file)?;
    let branch = trace_sweep(&model, sweep, &cfg, Default::default())?;
    let set = detect_turning_points(&branch, &cfg)?;
    let report = TurningPointReport {
        model,
        rho0_min: sweep.rho0_min,
        rho0_max: sweep.rho0_max,
        points: sweep.points,
        ordered: set.is_ordered(),
        turning_points: set,
    };
    emit(a.out.as_deref(), stdout, io::to_json(&report)?.as_bytes())
}

#[derive(Serialize)]
struct CountReport {
    model: ModelSpec,
    rho0_min: f64,
    rho0_max: f64,
    points: usize,
    #[serde(flatten)]
    count: gravistat_core::SolutionCount,
}

fn count(a: CountArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let c = &a.common;
    let model = model_from(&c.model, file)?;
    let sweep = sweep_from(&c.sweep, file)?;
    let cfg = config::resolve_integrator(c.integrator.overrides(), file)?;
    let mass = a.mass.or(file.mass).context("count needs --mass")?;
    let branch = trace_sweep(&model, sweep, &cfg, Default::default())?;
    let result = count_solutions(&branch, mass, &cfg)?;
    if result.lower_bound {
        eprintln!(
            "warning: {} bracket(s) unresolved; the count is a lower bound",
            result.unresolved.len()
        );
    }
    let report = CountReport {
        model,
        rho0_min: sweep.rho0_min,
        rho0_max: sweep.rho0_max,
        points: sweep.points,
        count: result,
    };
    emit(c.out.as_deref(), stdout, io::to_json(&report)?.as_bytes())
}

fn energy(a: PointArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let model = model_from(&a.model, file)?;
    let cfg = config::resolve_integrator(a.integrator.overrides(), file)?;
    let rho0 = a.rho0.or(file.rho0).context("energy needs --rho0")?;
    let convention = config::resolve_convention(a.four_pi_potential, file);
    let traj = integrate(&model, rho0, &cfg)?;
    let report = energetics::free_energy_with(&model, &traj, convention)?;
    emit(a.out.as_deref(), stdout, io::to_json(&report)?.as_bytes())
}

#[derive(Serialize)]
struct ValidationReport {
    passed: bool,
    matrix: Vec<MatrixEntry>,
    gronwall: Vec<CheckReport>,
    quadrant_exit: Vec<CheckReport>,
}

fn validate(a: ValidateArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let cfg = config::resolve_integrator(a.integrator.overrides(), file)?;
    let matrix = run_standard_matrix(&cfg);
    let mut gronwall = Vec::new();
    for eta in [1e-3, 1e-4] {
        for rho0 in [0.5, 1.0, 2.0] {
            gronwall.push(gronwall_certificate(eta, rho0, &cfg)?);
        }
    }
    let exit_cfg = QuadrantExitConfig::default();
    let mb = ModelSpec::maxwell_boltzmann();
    let quadrant_exit = vec![
        check_quadrant_exit(&mb, 1.0, 3.5, &exit_cfg)?,
        check_quadrant_exit(&mb, 1.0, 3.0, &exit_cfg)?,
        check_quadrant_exit(
            &ModelSpec::simplified_fermi_dirac(0.01)?,
            1.0,
            4.0,
            &exit_cfg,
        )?,
    ];
    let passed = matrix.iter().all(MatrixEntry::passed)
        && gronwall.iter().all(|r| r.passed)
        && quadrant_exit.iter().all(|r| r.passed);
    let report = ValidationReport {
        passed,
        matrix,
        gronwall,
        quadrant_exit,
    };
    emit(a.out.as_deref(), stdout, io::to_json(&report)?.as_bytes())?;
    if !passed {
        bail!("validation failed; see the report for the failing checks");
    }
    Ok(())
}

fn parse_branch_spec(spec: &str) -> Result<ModelSpec> {
    let (kind, eta) = match spec.split_once(':') {
        Some((k, e)) => (
            k,
            Some(
                e.parse::<f64>()
                    .with_context(|| format!("bad eta in '{spec}'"))?,
            ),
        ),
        None => (spec, None),
    };
    config::resolve_model(Some(kind.parse()?), eta)
}

fn diagram(a: DiagramArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let mut branches = Vec::new();
    for path in &a.inputs {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        branches.push(io::read_branch_json(std::io::BufReader::new(f))?);
    }
    if !a.branches.is_empty() {
        let sweep = sweep_from(&a.sweep, file)?;
        let cfg = config::resolve_integrator(a.integrator.overrides(), file)?;
        let convention = config::resolve_convention(a.four_pi_potential, file);
        for spec in &a.branches {
            branches.push(trace_sweep(
                &parse_branch_spec(spec)?,
                sweep,
                &cfg,
                convention,
            )?);
        }
    }
    let style = DiagramStyle {
        kind: if a.energy {
            DiagramKind::Energy
        } else {
            DiagramKind::Bifurcation
        },
        energy_offset: a.energy_offset || (a.energy && file.energy_offset.unwrap_or(false)),
    };
    let svg = svg::emit_diagram(&branches, &style)?;
    emit(a.out.as_deref(), stdout, svg.as_bytes())
}
