use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use incompat_core::sweep::{qrac_table, sweep_table, threshold_csv_table};
use incompat_core::{
    constrained_chi_extremum, mub_pair, noisy_chi, run_qrac_sweep, run_report, run_sweep,
    run_thresholds, verify_necessity, CglmpSetting, ConstrainedProblem, Manifold, Party,
    ReportKind, RunConfig, SchattenP, Sense, Side, SCHEMA_VERSION,
};

/// Sweeps over measurement incompatibility, CGLMP violation and QRAC success.
#[derive(Parser, Debug)]
#[command(name = "incompat", version, after_help = schema_note())]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "INCOMPAT_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

fn schema_note() -> String {
    format!("Output schema version: {SCHEMA_VERSION}")
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Local dimension.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Schatten norm order, a number >= 1 or `inf`.
    #[arg(long)]
    p: Option<SchattenP>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Objective evaluations per optimization.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Grid points for scans.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    d_min: Option<usize>,
    #[arg(long)]
    d_max: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Haar-random strategies: incompatibilities, maximal CGLMP value, QRAC.
    Sweep(RunArgs),
    /// Haar-random decoding pairs and their QRAC success probability.
    QracSweep(RunArgs),
    /// Critical noise levels of the optimal settings for a range of d.
    Thresholds(RunArgs),
    /// Constrained extremum of the CGLMP value at fixed incompatibility.
    OptChi {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "max")]
        sense: Sense,
        /// Target incompatibility; omit for an unconstrained search.
        #[arg(long)]
        i_target: Option<f64>,
        #[arg(long, default_value = "bob")]
        side: Side,
        #[arg(long, default_value = "unitary")]
        manifold: Manifold,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Data for one figure: fig1-scatter, fig2-entropy, fig3-scan, fig4-qrac, fig5-equalrobust.
    Report {
        kind: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// One-parameter interferometric scan (same as `report fig3-scan`).
    Scan(RunArgs),
    /// Strategies whose QRAC and CGLMP noise thresholds coincide.
    EqualRobust(RunArgs),
    /// Checks that a compatible pair on one side never violates the local bound.
    Necessity {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Writes the optimal interferometric settings as JSON.
    Settings {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal CGLMP value of settings read from JSON, optionally with white noise.
    Chi {
        setting: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        eta_a: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_b: f64,
    },
}

fn load_config(cli: &Cli, run: &RunArgs, command: &str) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    cfg.command = command.to_string();
    macro_rules! take {
        ($($f:ident),*) => { $(if let Some(v) = run.$f.clone() { cfg.$f = v; })* };
    }
    take!(d, samples, seed, p, budget, tol, grid, d_min, d_max);
    if run.out.is_some() {
        cfg.out = run.out.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Sweep(args) => {
            let cfg = load_config(cli, args, "sweep")?;
            let out = run_sweep(&cfg)?;
            sweep_table(&cfg, &out).save(cfg.out.as_deref())?;
            let frac = out.failure_fraction();
            if frac > 0.01 {
                eprintln!("{} of {} samples failed", out.failures, out.records.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::QracSweep(args) => {
            let cfg = load_config(cli, args, "qrac-sweep")?;
            qrac_table(&cfg, &run_qrac_sweep(&cfg)?).save(cfg.out.as_deref())?;
        }
        Command::Thresholds(args) => {
            let cfg = load_config(cli, args, "thresholds")?;
            let table = run_thresholds(&cfg)?;
            threshold_csv_table(&cfg, &table).save(cfg.out.as_deref())?;
        }
        Command::OptChi { run, sense, i_target, side, manifold, restarts } => {
            let cfg = load_config(cli, run, "opt-chi")?;
            let defaults = ConstrainedProblem::default();
            let problem = ConstrainedProblem {
                dim: cfg.d,
                sense: *sense,
                i_target: *i_target,
                side: *side,
                tol: cfg.tol,
                manifold: *manifold,
                budget: cfg.budget,
                seed: cfg.seed,
                p: cfg.p,
                restarts: restarts.unwrap_or(defaults.restarts),
                warm_start: None,
            };
            let report = cfg.install(|| constrained_chi_extremum(&problem))??;
            write_json(&report, cfg.out.as_deref())?;
        }
        Command::Report { kind, run } => {
            let kind: ReportKind = kind.parse()?;
            let cfg = load_config(cli, run, "report")?;
            run_report(kind, &cfg)?.save(cfg.out.as_deref())?;
        }
        Command::Scan(args) => {
            let cfg = load_config(cli, args, "scan")?;
            run_report(ReportKind::Fig3Scan, &cfg)?.save(cfg.out.as_deref())?;
        }
        Command::EqualRobust(args) => {
            let cfg = load_config(cli, args, "equal-robust")?;
            run_report(ReportKind::Fig5Equalrobust, &cfg)?.save(cfg.out.as_deref())?;
        }
        Command::Necessity { trials, d, seed } => {
            let (a1, a2) = mub_pair(*d)?;
            let workers = RunConfig { workers: cli.workers, ..Default::default() };
            let report = workers.install(|| verify_necessity((&a1, &a2), Party::Bob, *trials, *seed))??;
            write_json(&report, None)?;
            if report.violations > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Settings { d, out } => {
            write_json(&CglmpSetting::optimal_interferometric(*d)?, out.as_deref())?;
        }
        Command::Chi { setting, eta_a, eta_b } => {
            let text = fs::read_to_string(setting).with_context(|| format!("reading {}", setting.display()))?;
            let s: CglmpSetting = serde_json::from_str(&text).with_context(|| format!("parsing {}", setting.display()))?;
            write_json(&noisy_chi(&s, *eta_a, *eta_b)?, None)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

