use std::ffi::OsString;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mhd25_core::diagnostics::{fit_decay, trim_saturation, DecayFit, FitWindow};
use mhd25_core::initial::{generate_initial_with, InitialKind, InitialSpec};
use mhd25_core::littlewood_paley::checks::{run_checks, LpCheckConfig, LpCheckReport};
use mhd25_core::littlewood_paley::LittlewoodPaley;
use mhd25_core::solver::{conservation_report, simulate_with, Formulation, Trajectory};
use mhd25_core::state::{chain_rule_residual, MhdState, Params};
use mhd25_core::symbol::sweep;
use mhd25_core::Grid;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ExperimentConfig, FitWindowSpec, GridSpec, InitialData, SymbolSweep};
use crate::formats::{diagnostics_table, eigen_table, pairs_table, read_state, write_json, write_state, Table};
use crate::manifest::Manifest;
use crate::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "mhd25", version, about = "Spectral experiments for 2.5D compressible MHD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for initial data and check ensembles.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results never depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of the linear symbol over a log-spaced radius sweep.
    Symbol {
        #[arg(long, default_value_t = 1e-3)]
        r_min: f64,
        #[arg(long, default_value_t = 1e3)]
        r_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Run a trajectory.
    Simulate {
        /// Built-in configuration used when --config is absent.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Littlewood-Paley property suite.
    LpCheck {
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 16.0 * PI)]
        box_length: f64,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// Fit a power law to one diagnostics column.
    DecayFit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Lambda exponent of the column; sets the predicted rate.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
        #[arg(long)]
        t_max: Option<f64>,
        /// Keep the saturated tail of the window.
        #[arg(long)]
        no_trim: bool,
    },
    /// Dual-formulation run and chain-rule residuals.
    Consistency {
        #[arg(long)]
        preset: Option<String>,
        /// Random states for the chain-rule check.
        #[arg(long, default_value_t = 100)]
        states: u64,
    },
}

enum Outcome {
    Done,
    GuardAbort,
    CheckFailed,
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code:
/// 0 success, 1 failed check or IO error, 2 usage error, 3 configuration error, 4 guard abort.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return 3;
    }
    match dispatch(&cli) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Ok(Outcome::GuardAbort) => 4,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Symbol { r_min, r_max, points } => {
            no_config(cli)?;
            symbol(cli, SymbolSweep { r_min: *r_min, r_max: *r_max, points: *points })
        }
        Command::Simulate { preset } => {
            let cfg = experiment(cli, preset.as_deref())?;
            simulate(cli, &cfg, "simulate")
        }
        Command::LpCheck { n, box_length, seeds } => {
            no_config(cli)?;
            lp_check(cli, GridSpec { n: *n, box_length: *box_length }, *seeds)
        }
        Command::DecayFit {
            input,
            column,
            sigma,
            gamma,
            t_min,
            t_max,
            no_trim,
        } => {
            no_config(cli)?;
            let window = FitWindow {
                t_min: *t_min,
                t_max: t_max.unwrap_or(f64::INFINITY),
            };
            decay_fit(cli, input, column, *sigma, *gamma, window, !*no_trim)
        }
        Command::Consistency { preset, states } => {
            let mut cfg = experiment(cli, preset.as_deref())?;
            cfg.solver.formulation = Formulation::Both;
            cfg.validate()?;
            consistency(cli, &cfg, *states)
        }
    }
}

fn no_config(cli: &Cli) -> Result<()> {
    match cli.config {
        Some(_) => Err(CliError::Config("--config is not used by this subcommand".into())),
        None => Ok(()),
    }
}

fn experiment(cli: &Cli, preset: Option<&str>) -> Result<ExperimentConfig> {
    let cfg = match (&cli.config, preset) {
        (Some(p), None) => ExperimentConfig::load(p)?,
        (None, Some(name)) => ExperimentConfig::preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; known: {}",
                ExperimentConfig::preset_names().join(", ")
            ))
        })?,
        (Some(_), Some(_)) => return Err(CliError::Config("give --config or --preset, not both".into())),
        (None, None) => return Err(CliError::Config("--config or --preset is required".into())),
    };
    let cfg = cfg.with_overrides(cli.seed, cli.out.as_deref());
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, configured: Option<&Path>) -> Result<PathBuf> {
    let dir = cli
        .out
        .clone()
        .or_else(|| configured.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("mhd25-out"));
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    Ok(dir)
}

fn symbol(cli: &Cli, s: SymbolSweep) -> Result<Outcome> {
    if !(s.r_min > 0.0 && s.r_max >= s.r_min && s.r_max.is_finite() && s.points >= 1) {
        return Err(CliError::Config("symbol sweep needs 0 < r_min <= r_max and points >= 1".into()));
    }
    let dir = out_dir(cli, None)?;
    let spectra = sweep(s.r_min, s.r_max, s.points)?;
    let table = eigen_table(&spectra);
    table.save(&dir.join("eigen.csv"))?;
    let worst = spectra.iter().map(|x| x.abscissa()).fold(f64::NEG_INFINITY, f64::max);
    let mut m = Manifest::new("symbol", serde_json::to_value(s)?, cli.threads);
    m.add_output(&dir, "eigen.csv")?;
    m.summary = json!({ "rows": spectra.len(), "max_abscissa": worst });
    m.save(&dir)?;
    println!("symbol: {} radii, max abscissa {worst:e}", spectra.len());
    Ok(Outcome::Done)
}

fn initial_state(cfg: &ExperimentConfig, lp: &LittlewoodPaley) -> Result<MhdState> {
    match (&cfg.initial, cfg.initial.spec()) {
        (_, Some(spec)) => Ok(generate_initial_with(&spec, lp)?),
        (InitialData::File { path }, None) => {
            let (state, _) = read_state(path)?;
            if state.grid() != lp.grid() {
                return Err(CliError::Config(format!("{} does not match the configured grid", path.display())));
            }
            Ok(state)
        }
        _ => unreachable!("generated data always has a spec"),
    }
}

/// Shared setup and output of `simulate` and `consistency`.
struct Prepared {
    dir: PathBuf,
    lp: LittlewoodPaley,
    initial: MhdState,
    manifest: Manifest,
}

fn prepare(cli: &Cli, cfg: &ExperimentConfig, command: &str) -> Result<Prepared> {
    let grid = cfg.grid.build()?;
    cfg.solver.validate(&grid)?;
    let dir = out_dir(cli, Some(&cfg.output))?;
    let lp = LittlewoodPaley::with_default_cutoffs(&grid);
    let initial = initial_state(cfg, &lp)?;
    std::fs::write(dir.join("config.json"), cfg.to_json() + "\n").map_err(CliError::io(dir.join("config.json")))?;
    write_state(&dir.join("initial.fld"), &initial, &cfg.params)?;
    let mut manifest = Manifest::new(command, serde_json::to_value(cfg)?, cli.threads);
    manifest.grid = Some(cfg.grid);
    manifest.params = Some(cfg.params);
    manifest.initial_hash = Some(crate::manifest::file_hash(&dir.join("initial.fld"))?);
    for name in ["config.json", "initial.fld", "initial.json"] {
        manifest.add_output(&dir, name)?;
    }
    Ok(Prepared {
        dir,
        lp,
        initial,
        manifest,
    })
}

fn write_trajectory(p: &mut Prepared, tr: &Trajectory, params: &Params) -> Result<()> {
    let dir = p.dir.clone();
    diagnostics_table(&tr.diagnostics).save(&dir.join("diagnostics.csv"))?;
    p.manifest.add_output(&dir, "diagnostics.csv")?;
    write_state(&dir.join("final.fld"), &tr.final_state, params)?;
    p.manifest.add_output(&dir, "final.fld")?;
    p.manifest.add_output(&dir, "final.json")?;
    if !tr.snapshots.is_empty() {
        std::fs::create_dir_all(dir.join("snapshots")).map_err(CliError::io(dir.join("snapshots")))?;
        for (i, s) in tr.snapshots.iter().enumerate() {
            let name = format!("snapshots/{i:06}.fld");
            write_state(&dir.join(&name), &s.state, params)?;
            p.manifest.add_output(&dir, &name)?;
        }
    }
    Ok(())
}

fn run_summary(tr: &Trajectory) -> serde_json::Value {
    json!({
        "termination": tr.termination,
        "steps_taken": tr.steps_taken,
        "max_abs_a": tr.max_abs_a,
        "first_smallness_violation": tr.first_smallness_violation,
        "x0": tr.diagnostics.x0,
    })
}

fn finish(p: &Prepared, tr: &Trajectory) -> Result<Outcome> {
    p.manifest.save(&p.dir)?;
    println!(
        "{}: {} after {} steps, max |a| = {:e}",
        p.manifest.command,
        tr.termination.label(),
        tr.steps_taken,
        tr.max_abs_a
    );
    Ok(if tr.termination.is_guard_abort() {
        Outcome::GuardAbort
    } else {
        Outcome::Done
    })
}

fn simulate(cli: &Cli, cfg: &ExperimentConfig, command: &str) -> Result<Outcome> {
    let mut p = prepare(cli, cfg, command)?;
    let tr = simulate_with(&p.lp, &p.initial, &cfg.params, &cfg.solver, &cfg.diagnostics.config())?;
    write_trajectory(&mut p, &tr, &cfg.params)?;
    let mut summary = run_summary(&tr);
    if cfg.solver.formulation != Formulation::Reformulated {
        summary["conservation"] = serde_json::to_value(conservation_report(&tr)?)?;
    }
    p.manifest.summary = summary;
    finish(&p, &tr)
}

fn consistency(cli: &Cli, cfg: &ExperimentConfig, states: u64) -> Result<Outcome> {
    let mut p = prepare(cli, cfg, "consistency")?;
    let tr = simulate_with(&p.lp, &p.initial, &cfg.params, &cfg.solver, &cfg.diagnostics.config())?;
    write_trajectory(&mut p, &tr, &cfg.params)?;
    pairs_table(["t", "phi_error"], &tr.consistency).save(&p.dir.join("consistency.csv"))?;
    p.manifest.add_output(&p.dir.clone(), "consistency.csv")?;
    let residual = chain_rule_sweep(cfg, &p.lp, states)?;
    let mut summary = run_summary(&tr);
    summary["max_phi_error"] = json!(tr.max_consistency_error());
    summary["chain_rule_states"] = json!(states);
    summary["max_chain_rule_residual"] = json!(residual);
    p.manifest.summary = summary;
    finish(&p, &tr)
}

/// Largest chain-rule residual over `count` random states drawn like the
/// configured data (or with a flat spectrum for other kinds). The band is
/// capped below `k_max/2` so that `phi(a, theta, b)` is resolved.
fn chain_rule_sweep(cfg: &ExperimentConfig, lp: &LittlewoodPaley, count: u64) -> Result<f64> {
    let cap = 0.45 * lp.grid().k_max();
    let base = match cfg.initial.spec() {
        Some(InitialSpec {
            kind: InitialKind::RandomSpectrum { spectral_slope, band_lo, band_hi },
            amplitude,
            seed,
        }) if band_lo < cap => InitialSpec {
            kind: InitialKind::RandomSpectrum {
                spectral_slope,
                band_lo,
                band_hi: band_hi.min(cap),
            },
            amplitude,
            seed,
        },
        _ => InitialSpec::flat_negative_besov(cfg.diagnostics.sigma, 1e-3, cap, 0),
    };
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let spec = InitialSpec {
            seed: base.seed.wrapping_add(k),
            ..base.clone()
        };
        worst = worst.max(chain_rule_residual(&generate_initial_with(&spec, lp)?)?);
    }
    Ok(worst)
}

fn lp_check(cli: &Cli, grid: GridSpec, seeds: u64) -> Result<Outcome> {
    let g: Grid = grid.build()?;
    let config = LpCheckConfig {
        seeds,
        first_seed: cli.seed.unwrap_or(0),
        ..LpCheckConfig::default()
    };
    let dir = out_dir(cli, None)?;
    let report: LpCheckReport = run_checks(&LittlewoodPaley::with_default_cutoffs(&g), &config)?;
    write_json(&dir.join("lp_check.json"), &report)?;
    let mut m = Manifest::new("lp-check", json!({ "grid": grid, "check": config }), cli.threads);
    m.grid = Some(grid);
    m.add_output(&dir, "lp_check.json")?;
    m.summary = json!({ "passes": report.passes() });
    m.save(&dir)?;
    for c in &report.constants {
        println!("{:>16}  min {:.4e}  max {:.4e}  spread {:.3}", c.name, c.min, c.max, c.spread());
    }
    println!("lp-check: {}", if report.passes() { "pass" } else { "FAIL" });
    Ok(if report.passes() { Outcome::Done } else { Outcome::CheckFailed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub input: String,
    pub column: String,
    pub sigma: f64,
    pub gamma: f64,
    /// `-(sigma + gamma)/2`
    pub predicted: f64,
    pub window: FitWindowSpec,
    pub fit: DecayFit,
}

fn decay_fit(
    cli: &Cli,
    input: &Path,
    column: &str,
    sigma: f64,
    gamma: f64,
    window: FitWindow,
    trim: bool,
) -> Result<Outcome> {
    if !(sigma > 0.0 && sigma <= 1.0 && gamma > -sigma && gamma <= 0.0) {
        return Err(CliError::Config(format!("need 0 < sigma <= 1 and -sigma < gamma <= 0, got {sigma}, {gamma}")));
    }
    let table = Table::load(input)?;
    let values = table
        .column(column)
        .ok_or_else(|| CliError::Config(format!("{} has no column {column:?}", input.display())))?;
    let times = table
        .column("t")
        .ok_or_else(|| CliError::format(input, "missing time column t"))?;
    let window = match table.column("lowest_shell_fraction") {
        Some(frac) if trim => trim_saturation(window, &times, &frac),
        _ => window,
    };
    let fit = fit_decay(&times, &values, window)?;
    let report = FitReport {
        input: input.display().to_string(),
        column: column.to_string(),
        sigma,
        gamma,
        predicted: -(sigma + gamma) / 2.0,
        window: FitWindowSpec {
            t_min: window.t_min,
            t_max: window.t_max.is_finite().then_some(window.t_max),
        },
        fit,
    };
    let dir = out_dir(cli, None)?;
    write_json(&dir.join("fit.json"), &report)?;
    let mut m = Manifest::new("decay-fit", serde_json::to_value(&report)?, cli.threads);
    m.add_output(&dir, "fit.json")?;
    m.save(&dir)?;
    println!(
        "{column}: exponent {:.4} +- {:.4} over {} samples (predicted {:.4})",
        fit.exponent, fit.stderr, fit.points, report.predicted
    );
    Ok(Outcome::Done)
}
