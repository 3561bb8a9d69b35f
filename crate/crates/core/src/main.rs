use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use banded_spectra::combinatorics::IndexVector;
use banded_spectra::experiments::identities::{run_identity_suite, IdentityCheck, IdentityGrid};
use banded_spectra::experiments::{gsuite, invariance, moments, with_threads, ExperimentConfig, ExperimentReport, Row, Verdict};
use banded_spectra::{ExactComplex, C64};

#[derive(Parser)]
#[command(name = "banded-spectra", version, about = "Moment and identity experiments for random banded Hessenberg matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the ensemble seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report destination (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exact rational arithmetic for the moment experiments
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Double precision complex arithmetic (default)
    #[arg(long, global = true)]
    float: bool,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record wall-clock times in the report metadata
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct IdentityArgs {
    /// Corrupt one entry on one side of this check
    #[arg(long)]
    inject: Option<String>,
    /// Run a single draw index instead of the whole grid
    #[arg(long)]
    single_seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    p_max: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = 50)]
    draws: usize,
    /// Comma separated check names (all when absent)
    #[arg(long)]
    checks: Option<String>,
}

#[derive(Args, Clone)]
struct GsuiteArgs {
    /// Index vectors separated by ';', entries by ',' (e.g. "1,0;0,2")
    #[arg(long)]
    r_list: Option<String>,
}

#[derive(Args, Clone)]
struct InvarianceArgs {
    #[arg(long, default_value_t = 2)]
    degree: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Exact deterministic identity suite
    Identities(IdentityArgs),
    /// Left and right moment estimates
    Moments,
    /// Moment and pointwise comparison with verdicts
    Compare,
    /// g-function recursion and expansion of E W(z)
    Gsuite(GsuiteArgs),
    /// Invariance of the Weyl vector law
    Invariance(InvarianceArgs),
    /// Every experiment
    All {
        #[command(flatten)]
        identity: IdentityArgs,
        #[command(flatten)]
        gsuite: GsuiteArgs,
        #[command(flatten)]
        invariance: InvarianceArgs,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let path = common.config.as_ref().context("this experiment needs --config")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = common.seed {
        cfg.ensemble.seed = seed;
    }
    Ok(cfg)
}

fn parse_r_list(s: &str, p: usize) -> Result<Vec<IndexVector>> {
    s.split(';')
        .map(|v| {
            let entries = v
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("bad r vector {v:?}"))?;
            if entries.len() != p {
                bail!("r vector {v:?} needs {p} entries");
            }
            Ok(IndexVector(entries))
        })
        .collect()
}

fn identity_grid(args: &IdentityArgs, seed: u64) -> Result<IdentityGrid> {
    let checks = match &args.checks {
        Some(list) => list.split(',').map(|c| c.trim().parse()).collect::<Result<Vec<IdentityCheck>, _>>()?,
        None => IdentityCheck::ALL.to_vec(),
    };
    Ok(IdentityGrid {
        seed,
        p_max: args.p_max,
        n_max: args.n_max,
        draws: args.draws,
        single_draw: args.single_seed,
        checks,
        inject: args.inject.as_deref().map(str::parse).transpose()?,
    })
}

fn grid_hash(grid: &IdentityGrid) -> String {
    let text = format!("{grid:?}");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

struct Runner {
    report: ExperimentReport,
    timings: bool,
}

impl Runner {
    fn step(&mut self, name: &str, f: impl FnOnce() -> Result<Vec<Row>>) -> Result<()> {
        let start = Instant::now();
        let rows = f()?;
        if self.timings {
            self.report.metadata.timings.push((name.into(), start.elapsed().as_secs_f64()));
        }
        self.report.rows.extend(rows);
        Ok(())
    }
}

fn run_identities(runner: &mut Runner, args: &IdentityArgs, seed: u64) -> Result<()> {
    let grid = identity_grid(args, seed)?;
    runner.step("identities", || Ok(run_identity_suite(&grid)?.rows()))
}

fn run_config_experiments(runner: &mut Runner, cfg: &ExperimentConfig, common: &Common, which: &Command) -> Result<()> {
    let p = cfg.ensemble.p;
    let exact = common.exact;
    let r_list = |args: &GsuiteArgs| -> Result<Vec<IndexVector>> {
        match &args.r_list {
            Some(s) => parse_r_list(s, p),
            None => Ok(gsuite::default_r_list(p)),
        }
    };
    match which {
        Command::Moments => runner.step("moments", || {
            Ok(if exact {
                moments::run_moments::<ExactComplex>(cfg)?
            } else {
                moments::run_moments::<C64>(cfg)?
            })
        }),
        Command::Compare => runner.step("compare", || {
            Ok(if exact {
                moments::compare_theorem_main::<ExactComplex>(cfg)?
            } else {
                moments::compare_theorem_main::<C64>(cfg)?
            })
        }),
        Command::Gsuite(args) => {
            let list = r_list(args)?;
            runner.step("gsuite", || Ok(gsuite::run_g_suite(cfg, &list)?))
        }
        Command::Invariance(args) => runner.step("invariance", || Ok(invariance::run_invariance(cfg, args.degree)?)),
        Command::All {
            gsuite: g,
            invariance: inv,
            ..
        } => {
            run_config_experiments(runner, cfg, common, &Command::Compare)?;
            run_config_experiments(runner, cfg, common, &Command::Gsuite(g.clone()))?;
            run_config_experiments(runner, cfg, common, &Command::Invariance(inv.clone()))
        }
        Command::Identities(_) => unreachable!(),
    }
}

fn run(cli: &Cli) -> Result<ExperimentReport> {
    let common = &cli.common;
    let cfg = match (&cli.command, &common.config) {
        (Command::Identities(_), None) => None,
        _ => Some(load_config(common)?),
    };
    let seed = common.seed.or(cfg.as_ref().map(|c| c.ensemble.seed)).unwrap_or(0);
    let hash = match (&cfg, &cli.command) {
        (Some(c), _) => c.hash(),
        (None, Command::Identities(args)) => grid_hash(&identity_grid(args, seed)?),
        (None, _) => unreachable!(),
    };
    let mut runner = Runner {
        report: ExperimentReport::new(seed, hash),
        timings: common.timings,
    };
    match &cli.command {
        Command::Identities(args) => run_identities(&mut runner, args, seed)?,
        Command::All { identity, .. } => {
            run_identities(&mut runner, identity, seed)?;
            run_config_experiments(&mut runner, cfg.as_ref().unwrap(), common, &cli.command)?;
        }
        other => run_config_experiments(&mut runner, cfg.as_ref().unwrap(), common, other)?,
    }
    Ok(runner.report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = with_threads(cli.common.threads, || run(&cli));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.common.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    let failed = report.rows.iter().filter(|r| r.verdict == Verdict::Fail).count();
    if failed > 0 {
        eprintln!("{failed} comparison(s) failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
