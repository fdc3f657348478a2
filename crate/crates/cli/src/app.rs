//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use udncov::analytic::AssociationPolicy;
use udncov::LosModel;

use crate::checks::run_checks;
use crate::config::{CliOverrides, ConfigFile, McSection, Overrides};
use crate::csv_out;
use crate::error::{usage, Result};
use crate::plot::{self, Metric, PlotStyle};
use crate::presets::{Preset, PresetOptions, PRESET_TRIALS};
use crate::sweep::{run_sweep, Engine, Row, Scenario, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "udncov", version, about = "Coverage and ASE of ultra-dense networks with elevated base stations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep one parameter as described by a config file.
    Sweep(SweepArgs),
    /// Coverage and ASE vs BS density under the buildings model.
    Fig2(PresetArgs),
    /// Coverage vs BS density, LOS and NLOS at h = 0 and 20 m.
    Fig3(PresetArgs),
    /// ASE vs BS density, NLOS at h = 10, 15 and 20 m.
    Fig4(PresetArgs),
    /// Run the acceptance checks.
    Check(CheckArgs),
    /// Evaluate a single configuration and print JSON.
    Point(PointArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Closest,
    Strongest,
}

impl From<PolicyArg> for AssociationPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Closest => AssociationPolicy::Closest,
            PolicyArg::Strongest => AssociationPolicy::Strongest,
        }
    }
}

/// Output and simulation flags shared by every table-producing verb.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated engines: analytic, mc.
    #[arg(long)]
    pub engines: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed for Monte Carlo.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed simulation radius in meters (automatic otherwise).
    #[arg(long)]
    pub sim_radius: Option<f64>,
    #[arg(long, value_enum, default_value = "both")]
    pub format: Format,
    /// Append a wall_time_ms column (output is then run-dependent).
    #[arg(long)]
    pub timings: bool,
}

/// Network parameter overrides.
#[derive(Debug, Args, Default)]
pub struct NetArgs {
    /// Restrict to one association policy.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// BS density in BS/m².
    #[arg(long)]
    pub bs_density: Option<f64>,
    /// BS height in meters.
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub alpha_los: Option<f64>,
    #[arg(long)]
    pub alpha_nlos: Option<f64>,
    /// SIR threshold (linear).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Buildings per meter; selects the buildings LOS model.
    #[arg(long)]
    pub building_density: Option<f64>,
    /// Building height in meters; selects the buildings LOS model.
    #[arg(long)]
    pub building_height: Option<f64>,
    /// Distance-independent LOS probability.
    #[arg(long, conflicts_with_all = ["critical_distance", "building_density", "building_height"])]
    pub los_prob: Option<f64>,
    /// LOS up to this distance, NLOS beyond.
    #[arg(long, conflicts_with_all = ["building_density", "building_height"])]
    pub critical_distance: Option<f64>,
}

impl NetArgs {
    fn overrides(&self) -> Result<Overrides> {
        let los = match (self.los_prob, self.critical_distance) {
            (Some(p), _) => Some(LosModel::constant(p)?),
            (None, Some(d)) => Some(LosModel::step(d)?),
            (None, None) => None,
        };
        Ok(Overrides {
            bs_density: self.bs_density,
            height: self.height,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            sir_threshold: self.threshold,
            policy: self.policy.map(Into::into),
            los,
            building_density: self.building_density,
            building_height: self.building_height,
        })
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML sweep description.
    #[arg(long)]
    pub config: PathBuf,
    /// Base name of the output files.
    #[arg(long, default_value = "sweep")]
    pub name: String,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long)]
    pub ci_level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Restrict to one association policy.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Comma-separated criterion numbers to run (default: all).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Optional TOML file supplying [base] and [montecarlo].
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub engines: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sim_radius: Option<f64>,
    #[arg(long)]
    pub ci_level: Option<f64>,
    #[command(flatten)]
    pub net: NetArgs,
}

/// Outcome of a command: whether every row or check succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failures,
}

fn engines(arg: &Option<String>) -> Result<Option<Vec<Engine>>> {
    arg.as_deref().map(Engine::parse_list).transpose()
}

fn write_outputs<W: Write>(
    rows: &[Row],
    dir: &Path,
    stem: &str,
    title: &str,
    plots: &[(Metric, &str)],
    run: &RunArgs,
    out: &mut W,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if matches!(run.format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{stem}.csv"));
        csv_out::write_file(&path, rows, run.timings)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    if matches!(run.format, Format::Svg | Format::Both) {
        for &(metric, suffix) in plots {
            let path = dir.join(format!("{stem}_{suffix}.svg"));
            plot::write_file(&path, rows, PlotStyle { metric, title })?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

fn report<W: Write, E: Write>(rows: &[Row], out: &mut W, err: &mut E) -> Result<Status> {
    let failed: Vec<&Row> = rows.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        if let Err(e) = &r.outcome {
            writeln!(err, "{} {}={:e} [{}]: {e}", r.scenario_id, r.axis, r.axis_value, r.engine.name())?;
        }
    }
    writeln!(out, "{} rows, {} failed", rows.len(), failed.len())?;
    Ok(if failed.is_empty() { Status::Success } else { Status::Failures })
}

fn run_table<W: Write, E: Write>(
    spec: &SweepSpec,
    stem: &str,
    title: &str,
    plots: &[(Metric, &str)],
    run: &RunArgs,
    out: &mut W,
    err: &mut E,
) -> Result<Status> {
    let rows = run_sweep(spec)?;
    write_outputs(&rows, &run.out, stem, title, plots, run, out)?;
    report(&rows, out, err)
}

fn preset<W: Write, E: Write>(p: Preset, args: &PresetArgs, out: &mut W, err: &mut E) -> Result<Status> {
    let opts = PresetOptions {
        engines: engines(&args.run.engines)?.unwrap_or_else(|| vec![Engine::Analytic]),
        trials: args.run.trials.unwrap_or(PRESET_TRIALS),
        seed: args.run.seed.unwrap_or(PresetOptions::default().seed),
        sim_radius: args.run.sim_radius,
        policy: args.policy.map(Into::into),
    };
    let spec = p.spec(&opts)?;
    run_table(&spec, p.name(), p.title(), p.plots(), &args.run, out, err)
}

#[derive(Serialize)]
struct PointRecord<'a> {
    scenario_id: &'a str,
    policy: &'static str,
    engine: &'static str,
    bs_density: f64,
    height: f64,
    sir_threshold: f64,
    pcov: Option<f64>,
    ase: Option<f64>,
    method: Option<&'static str>,
    ci_halfwidth: Option<f64>,
    status: String,
}

fn point<W: Write>(args: &PointArgs, out: &mut W) -> Result<Status> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let cli = CliOverrides {
        network: args.net.overrides()?,
        montecarlo: McSection {
            trials: args.trials,
            seed: args.seed,
            sim_radius: args.sim_radius,
            ci_level: args.ci_level,
        },
        engines: engines(&args.engines)?,
    };
    let scenarios = file.scenarios(&cli)?;
    let spec = SweepSpec {
        axis: crate::sweep::Axis::BsDensity,
        grid: crate::sweep::Grid::log(1.0, 2.0, 2)?,
        scenarios: scenarios.clone(),
        engines: cli.engines.clone().unwrap_or_else(|| vec![Engine::Analytic]),
        mc: file.sim_settings(&cli)?,
    };
    spec.validate()?;
    let mut status = Status::Success;
    for (si, sc) in scenarios.iter().enumerate() {
        for &engine in &spec.engines {
            let row = evaluate_point(&spec, sc, si, engine);
            let (pcov, ase, method, ci, st) = match &row {
                Ok(p) => (Some(p.pcov), Some(p.ase), Some(p.method.name()), p.ci_halfwidth, "ok".to_string()),
                Err(e) => {
                    status = Status::Failures;
                    (None, None, None, None, format!("error: {e}"))
                }
            };
            let rec = PointRecord {
                scenario_id: &sc.id,
                policy: sc.policy.name(),
                engine: engine.name(),
                bs_density: sc.config.bs_density,
                height: sc.config.pathloss.height,
                sir_threshold: sc.config.sir_threshold,
                pcov,
                ase,
                method,
                ci_halfwidth: ci,
                status: st,
            };
            writeln!(out, "{}", serde_json::to_string(&rec)?)?;
        }
    }
    Ok(status)
}

fn evaluate_point(
    spec: &SweepSpec,
    sc: &Scenario,
    si: usize,
    engine: Engine,
) -> std::result::Result<udncov::CoveragePoint, udncov::Error> {
    match engine {
        Engine::Analytic => udncov::analytic::coverage(&sc.config, sc.policy),
        Engine::MonteCarlo => {
            let mut settings = spec.mc;
            settings.seed = crate::sweep::point_seed(spec.mc.seed, si, 0);
            udncov::montecarlo::simulate_coverage(&sc.config, sc.policy, &settings)
        }
    }
}

/// Executes a parsed command, writing progress to `out` and row failures to `err`.
pub fn execute<W: Write, E: Write>(cli: &Cli, out: &mut W, err: &mut E) -> Result<Status> {
    match &cli.command {
        Command::Sweep(a) => {
            let file = ConfigFile::load(&a.config)?;
            let overrides = CliOverrides {
                network: a.net.overrides()?,
                montecarlo: McSection {
                    trials: a.run.trials,
                    seed: a.run.seed,
                    sim_radius: a.run.sim_radius,
                    ci_level: a.ci_level,
                },
                engines: engines(&a.run.engines)?,
            };
            let spec = file.sweep_spec(&overrides)?;
            if a.name.is_empty() || a.name.contains(['/', '\\']) {
                return Err(usage(format!("invalid output name '{}'", a.name)));
            }
            let plots = [(Metric::Pcov, "pcov"), (Metric::Ase, "ase")];
            let title = format!("sweep over {}", spec.axis);
            run_table(&spec, &a.name, &title, &plots, &a.run, out, err)
        }
        Command::Fig2(a) => preset(Preset::Fig2, a, out, err),
        Command::Fig3(a) => preset(Preset::Fig3, a, out, err),
        Command::Fig4(a) => preset(Preset::Fig4, a, out, err),
        Command::Check(a) => {
            let outcomes = run_checks(&a.only)?;
            for o in &outcomes {
                writeln!(out, "{}", o.line())?;
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            writeln!(out, "{passed}/{} checks passed", outcomes.len())?;
            Ok(if passed == outcomes.len() { Status::Success } else { Status::Failures })
        }
        Command::Point(a) => point(a, out),
    }
}
