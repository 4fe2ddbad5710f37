//! Command-line driver: single runs, the two parameter sweeps, and the
//! optimizer-vs-oracle validation check.
//!
//! Exit codes: 0 on success, 2 on usage/config errors and failed checks.
//! All CSV output is byte-reproducible for a given config and seed,
//! independent of `--jobs`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use irs_secrecy::channel::draw_realization;
use irs_secrecy::montecarlo::{self, BaselineSet, SweepSpec, SweptField};
use irs_secrecy::optimizer::{alternate_optimize, oracle_grid_search};
use irs_secrecy::rng::{derive_stream, StreamPurpose};
use irs_secrecy::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "irs-secrecy",
    version,
    about = "Secrecy-capacity Monte Carlo for an IRS-assisted UAV downlink"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run paired trials at one operating point; writes per-trial CSV and
    /// prints a mean +/- stderr summary per baseline
    Single(SingleArgs),
    /// Sweep the transmit-power cap (default setting: M = 10, K = 3)
    PowerSweep(PowerSweepArgs),
    /// Sweep the number of reflecting elements (defaults: P = 3 W, K = 3)
    ElementsSweep(ElementsSweepArgs),
    /// Validate the optimizer against the exhaustive grid oracle
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct SingleArgs {
    /// Scenario config file (TOML); omitted fields use the built-in defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, default_value = "trials.csv")]
    out: PathBuf,
    /// Number of trials [config default: 10000]
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed [config default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Reflecting elements M [config default: 10]
    #[arg(long)]
    m_elements: Option<usize>,
    /// Eavesdroppers K [config default: 8]
    #[arg(long)]
    k_eves: Option<usize>,
    /// Transmit power cap in Watts [config default: 3]
    #[arg(long)]
    power_max: Option<f64>,
    /// Worker threads; 0 = all cores. Output does not depend on this
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Also dump optimizer traces (<out>_trace.csv) and per-trial phase
    /// profiles (<out>_profiles.jsonl)
    #[arg(long)]
    verbose_trace: bool,
}

#[derive(Args)]
struct PowerSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, default_value = "power_sweep.csv")]
    out: PathBuf,
    /// Power caps in Watts, comma separated, strictly increasing
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3,4")]
    powers: Vec<f64>,
    /// Trials per swept value
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Master seed [config default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Reflecting elements M for this sweep
    #[arg(long, default_value_t = 10)]
    m_elements: usize,
    /// Eavesdroppers K for this sweep
    #[arg(long, default_value_t = 3)]
    k_eves: usize,
    /// Worker threads; 0 = all cores. Output does not depend on this
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ElementsSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, default_value = "elements_sweep.csv")]
    out: PathBuf,
    /// Element counts, comma separated, strictly increasing (0 = no IRS)
    #[arg(long, value_delimiter = ',', default_value = "0,2,4,6,8,10")]
    elements: Vec<usize>,
    /// Trials per swept value
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Transmit power cap in Watts for this sweep
    #[arg(long, default_value_t = 3.0)]
    power_max: f64,
    /// Eavesdroppers K for this sweep
    #[arg(long, default_value_t = 3)]
    k_eves: usize,
    /// Master seed [config default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 = all cores. Output does not depend on this
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random instances to compare on
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Reflecting elements (the oracle is capped at 3)
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Grid levels per phase
    #[arg(long, default_value_t = 64)]
    levels: usize,
    /// Eavesdroppers K
    #[arg(long, default_value_t = 3)]
    k_eves: usize,
    /// Optimizer restarts for the check
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// Master seed [config default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 = all cores. Output does not depend on this
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Single(args) => cmd_single(args),
        Command::PowerSweep(args) => cmd_power_sweep(args),
        Command::ElementsSweep(args) => cmd_elements_sweep(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<ScenarioConfig> {
    match path {
        Some(p) => {
            ScenarioConfig::load(p).with_context(|| format!("loading config {}", p.display()))
        }
        None => Ok(ScenarioConfig::default()),
    }
}

/// Runs `f` on a dedicated pool when `--jobs` is set; results are keyed by
/// trial index either way, so the thread count never changes the output.
fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    if jobs == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building thread pool")?;
        Ok(pool.install(f))
    }
}

fn suffixed_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trials");
    out.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_single(args: SingleArgs) -> anyhow::Result<ExitCode> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(m) = args.m_elements {
        config.m_elements = m;
    }
    if let Some(k) = args.k_eves {
        config.k_eves = k;
    }
    if let Some(p) = args.power_max {
        config.power_max = p;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    config.validate()?;

    let baselines = BaselineSet::default();
    let trials = config.trials;
    let outcomes = with_pool(args.jobs, || {
        montecarlo::run_trials(&config, &baselines, trials)
    })??;

    std::fs::write(&args.out, montecarlo::trials_to_csv(&outcomes, &baselines))
        .with_context(|| format!("writing {}", args.out.display()))?;
    if args.verbose_trace {
        let trace = suffixed_path(&args.out, "_trace.csv");
        std::fs::write(&trace, montecarlo::traces_to_csv(&outcomes))
            .with_context(|| format!("writing {}", trace.display()))?;
        let profiles = suffixed_path(&args.out, "_profiles.jsonl");
        std::fs::write(
            &profiles,
            montecarlo::profiles_to_jsonl(&outcomes, &baselines),
        )
        .with_context(|| format!("writing {}", profiles.display()))?;
    }

    println!("wrote {} trials to {}", trials, args.out.display());
    for baseline in baselines.iter() {
        let s = montecarlo::summarize(&outcomes, baseline).expect("baseline was run");
        println!(
            "{:<14} mean = {} +/- {} (stderr), zero_fraction = {}, trials = {}",
            baseline.label(),
            montecarlo::fmt_sig9(s.mean),
            montecarlo::fmt_sig9(s.stderr),
            montecarlo::fmt_sig9(s.zero_fraction),
            s.trials
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sweep_to_csv(
    config: &ScenarioConfig,
    spec: &SweepSpec,
    jobs: usize,
    out: &Path,
) -> anyhow::Result<()> {
    let result = with_pool(jobs, || montecarlo::run_sweep(config, spec))??;
    std::fs::write(out, result.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} rows ({} values x {} baselines) to {}",
        result.rows.len(),
        spec.values.len(),
        result.rows.len() / spec.values.len(),
        out.display()
    );
    Ok(())
}

fn cmd_power_sweep(args: PowerSweepArgs) -> anyhow::Result<ExitCode> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    config.m_elements = args.m_elements;
    config.k_eves = args.k_eves;
    config.validate()?;

    let spec = SweepSpec {
        swept: SweptField::PowerMax,
        values: args.powers,
        trials: args.trials,
        baselines: BaselineSet::default(),
    };
    run_sweep_to_csv(&config, &spec, args.jobs, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_elements_sweep(args: ElementsSweepArgs) -> anyhow::Result<ExitCode> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    config.power_max = args.power_max;
    config.k_eves = args.k_eves;
    config.validate()?;

    let spec = SweepSpec {
        swept: SweptField::MElements,
        values: args.elements.iter().map(|&m| m as f64).collect(),
        trials: args.trials,
        baselines: BaselineSet::default(),
    };
    run_sweep_to_csv(&config, &spec, args.jobs, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_check(args: OracleCheckArgs) -> anyhow::Result<ExitCode> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    config.m_elements = args.m;
    config.k_eves = args.k_eves;
    config.validate()?;
    if args.instances == 0 {
        anyhow::bail!("invalid argument `instances`: must be >= 1");
    }

    let mut opt_cfg = config.optimizer_config();
    opt_cfg.restarts = args.restarts;
    let seed = config.master_seed;
    let levels = args.levels;

    let results: Vec<(f64, f64)> = with_pool(args.jobs, || {
        (0..args.instances as u64)
            .into_par_iter()
            .map(|i| -> irs_secrecy::Result<(f64, f64)> {
                let mut geometry_rng = derive_stream(seed, i, StreamPurpose::Geometry);
                let topology = config.materialize_topology(&mut geometry_rng);
                topology.validate()?;
                let mut fading_rng = derive_stream(seed, i, StreamPurpose::Fading);
                let realization = draw_realization(
                    &topology,
                    &config.fading,
                    config.m_elements,
                    &mut fading_rng,
                )?;
                let mut optimizer_rng = derive_stream(seed, i, StreamPurpose::Optimizer);
                let (optimized, _) =
                    alternate_optimize(&realization, &config.fading, &opt_cfg, &mut optimizer_rng)?;
                let oracle =
                    oracle_grid_search(&realization, &config.fading, config.power_max, levels)?;
                Ok((optimized.secrecy_capacity, oracle.secrecy_capacity))
            })
            .collect::<irs_secrecy::Result<Vec<_>>>()
    })??;

    let mut passes = 0usize;
    for (i, (achieved, oracle)) in results.iter().enumerate() {
        // Both sides are >= 0; a ~zero oracle optimum cannot be undershot.
        let ratio = if *oracle <= 1e-12 {
            1.0
        } else {
            achieved / oracle
        };
        if ratio >= 0.98 {
            passes += 1;
        }
        println!(
            "instance {i:>4}: achieved = {} oracle = {} ratio = {ratio:.6}",
            montecarlo::fmt_sig9(*achieved),
            montecarlo::fmt_sig9(*oracle),
        );
    }
    let fraction = passes as f64 / args.instances as f64;
    println!(
        "pass fraction {fraction:.3} ({passes}/{} at ratio >= 0.98, m = {}, levels = {})",
        args.instances, args.m, levels
    );
    if fraction >= 0.95 {
        println!("oracle check: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("oracle check: FAIL (need pass fraction >= 0.95)");
        Ok(ExitCode::from(2))
    }
}
