//! Seeded independent trials, paired baselines, and parameter sweeps.
//!
//! Every trial draws one channel realization and evaluates all requested
//! baselines on it (paired comparison), which turns the qualitative
//! IRS-vs-no-IRS gap into a per-trial assertable property and cuts the
//! variance of the measured gaps. Trials derive their random streams from
//! `(master_seed, trial_index)` so results are reproducible regardless of
//! evaluation order or thread count.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::draw_realization;
use crate::config::ScenarioConfig;
use crate::error::{positive, Error, Result};
use crate::irs::PhaseProfile;
use crate::optimizer::{alternate_optimize, outcome_at_optimal_power, OptimizationTrace};
use crate::rng::{derive_stream, StreamPurpose};
use crate::secrecy::SecrecyOutcome;

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// The comparison schemes evaluated on each shared realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// Alternate-optimized power and phases.
    OptimizedIrs,
    /// Direct links only (IRS absent), bang-bang power.
    NoIrs,
    /// One uniform random phase profile, bang-bang power.
    RandomPhase,
}

impl Baseline {
    /// Fixed report order: optimized first, then the references.
    pub const ALL: [Baseline; 3] = [
        Baseline::OptimizedIrs,
        Baseline::NoIrs,
        Baseline::RandomPhase,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Baseline::OptimizedIrs => "optimized_irs",
            Baseline::NoIrs => "no_irs",
            Baseline::RandomPhase => "random_phase",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which baselines a run should evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSet {
    pub optimized_irs: bool,
    pub no_irs: bool,
    pub random_phase: bool,
}

impl Default for BaselineSet {
    fn default() -> Self {
        Self {
            optimized_irs: true,
            no_irs: true,
            random_phase: true,
        }
    }
}

impl BaselineSet {
    pub fn contains(&self, baseline: Baseline) -> bool {
        match baseline {
            Baseline::OptimizedIrs => self.optimized_irs,
            Baseline::NoIrs => self.no_irs,
            Baseline::RandomPhase => self.random_phase,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Baseline> + '_ {
        Baseline::ALL.into_iter().filter(|b| self.contains(*b))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.optimized_irs || self.no_irs || self.random_phase) {
            return Err(Error::invalid_config(
                "baselines",
                "select at least one baseline",
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

/// Per-baseline outcomes of one trial, all on the same realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcomes {
    pub trial_index: u64,
    pub optimized_irs: Option<SecrecyOutcome>,
    pub no_irs: Option<SecrecyOutcome>,
    pub random_phase: Option<SecrecyOutcome>,
    /// Trace of the optimized baseline, for `--verbose-trace` dumps.
    pub optimizer_trace: Option<OptimizationTrace>,
}

impl TrialOutcomes {
    pub fn get(&self, baseline: Baseline) -> Option<&SecrecyOutcome> {
        match baseline {
            Baseline::OptimizedIrs => self.optimized_irs.as_ref(),
            Baseline::NoIrs => self.no_irs.as_ref(),
            Baseline::RandomPhase => self.random_phase.as_ref(),
        }
    }
}

/// Runs one trial: per-trial geometry, one fading draw, every requested
/// baseline evaluated on that same draw.
///
/// The random-phase baseline reads the head of the optimizer stream, so its
/// profile coincides with the optimizer's first restart initialization; the
/// optimizer can therefore never come out behind it.
pub fn run_trial(
    config: &ScenarioConfig,
    trial_index: u64,
    baselines: &BaselineSet,
) -> Result<TrialOutcomes> {
    baselines.validate()?;
    let seed = config.master_seed;

    let mut geometry_rng = derive_stream(seed, trial_index, StreamPurpose::Geometry);
    let topology = config.materialize_topology(&mut geometry_rng);
    topology.validate()?;

    let mut fading_rng = derive_stream(seed, trial_index, StreamPurpose::Fading);
    let realization = draw_realization(
        &topology,
        &config.fading,
        config.m_elements,
        &mut fading_rng,
    )?;

    let mut outcomes = TrialOutcomes {
        trial_index,
        optimized_irs: None,
        no_irs: None,
        random_phase: None,
        optimizer_trace: None,
    };

    if baselines.no_irs {
        outcomes.no_irs = Some(outcome_at_optimal_power(
            &realization.without_irs(),
            &PhaseProfile::empty(),
            &config.fading,
            config.power_max,
        )?);
    }

    if baselines.random_phase {
        // Same draws as the optimizer's first init (fresh stream clone).
        let mut profile_rng = derive_stream(seed, trial_index, StreamPurpose::Optimizer);
        let profile = PhaseProfile::random_uniform(config.m_elements, &mut profile_rng);
        outcomes.random_phase = Some(outcome_at_optimal_power(
            &realization,
            &profile,
            &config.fading,
            config.power_max,
        )?);
    }

    if baselines.optimized_irs {
        let mut optimizer_rng = derive_stream(seed, trial_index, StreamPurpose::Optimizer);
        let cfg = config.optimizer_config();
        let (outcome, trace) =
            alternate_optimize(&realization, &config.fading, &cfg, &mut optimizer_rng)?;
        outcomes.optimized_irs = Some(outcome);
        outcomes.optimizer_trace = Some(trace);
    }

    Ok(outcomes)
}

/// Runs `trials` independent trials in parallel, ordered by trial index.
pub fn run_trials(
    config: &ScenarioConfig,
    baselines: &BaselineSet,
    trials: usize,
) -> Result<Vec<TrialOutcomes>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(config, i, baselines))
        .collect()
}

// ---------------------------------------------------------------------------
// Aggregation and sweeps
// ---------------------------------------------------------------------------

/// Mean/stderr/zero-fraction of the secrecy capacity for one baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineStats {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub zero_fraction: f64,
}

/// Aggregates one baseline across trials; `None` if the baseline was not run.
pub fn summarize(outcomes: &[TrialOutcomes], baseline: Baseline) -> Option<BaselineStats> {
    let caps: Vec<f64> = outcomes
        .iter()
        .map(|t| t.get(baseline).map(|o| o.secrecy_capacity))
        .collect::<Option<Vec<_>>>()?;
    if caps.is_empty() {
        return None;
    }
    let n = caps.len();
    let mean = caps.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = caps.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let zero_fraction = caps.iter().filter(|&&c| c == 0.0).count() as f64 / n as f64;
    Some(BaselineStats {
        mean,
        stderr,
        trials: n,
        zero_fraction,
    })
}

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptField {
    PowerMax,
    MElements,
}

impl SweptField {
    pub fn label(&self) -> &'static str {
        match self {
            SweptField::PowerMax => "power_max",
            SweptField::MElements => "m_elements",
        }
    }
}

/// One parameter sweep: the field, its values, and what to run per value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub swept: SweptField,
    pub values: Vec<f64>,
    pub trials: usize,
    pub baselines: BaselineSet,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid_config(
                "values",
                "sweep needs at least one value",
            ));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid_config(
                "values",
                "sweep values must be strictly increasing",
            ));
        }
        match self.swept {
            SweptField::PowerMax => {
                if !self.values.iter().all(|&v| positive(v)) {
                    return Err(Error::invalid_config("values", "powers must be > 0"));
                }
            }
            SweptField::MElements => {
                if self.values.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
                    return Err(Error::invalid_config(
                        "values",
                        "element counts must be nonnegative integers",
                    ));
                }
            }
        }
        if self.trials < 1 {
            return Err(Error::invalid_config("trials", "must be >= 1"));
        }
        self.baselines.validate()
    }
}

/// One output row: statistics of one baseline at one swept value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub baseline: Baseline,
    pub mean_secrecy: f64,
    pub stderr: f64,
    pub trials: usize,
    pub zero_fraction: f64,
}

/// Sweep output, rows ordered by swept value then baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub swept: SweptField,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub const CSV_HEADER: &'static str =
        "swept_value,baseline,mean_secrecy,stderr,trials,zero_fraction";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_sig9(row.swept_value),
                row.baseline,
                fmt_sig9(row.mean_secrecy),
                fmt_sig9(row.stderr),
                row.trials,
                fmt_sig9(row.zero_fraction),
            ));
        }
        out
    }

    /// Rows of one baseline in value order.
    pub fn baseline_rows(&self, baseline: Baseline) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.baseline == baseline)
            .collect()
    }
}

/// Runs the sweep: for each value, override the swept field, run `trials`
/// paired trials, and aggregate each requested baseline.
pub fn run_sweep(config: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    config.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * 3);
    for &value in &spec.values {
        let mut point = config.clone();
        match spec.swept {
            SweptField::PowerMax => point.power_max = value,
            SweptField::MElements => point.m_elements = value as usize,
        }
        let outcomes = run_trials(&point, &spec.baselines, spec.trials)?;
        for baseline in spec.baselines.iter() {
            let stats = summarize(&outcomes, baseline).expect("baseline was run");
            rows.push(SweepRow {
                swept_value: value,
                baseline,
                mean_secrecy: stats.mean,
                stderr: stats.stderr,
                trials: stats.trials,
                zero_fraction: stats.zero_fraction,
            });
        }
    }
    Ok(SweepResult {
        swept: spec.swept,
        rows,
    })
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

/// Formats a float with 9 significant digits. Integer-valued floats print
/// plain (their digits are all significant); everything else uses scientific
/// notation. Stable across runs, so CSV output is byte-reproducible.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.fract() == 0.0 && x.abs() < 1e9 {
        format!("{x:.0}")
    } else {
        format!("{x:.8e}")
    }
}

pub const TRIALS_CSV_HEADER: &str =
    "trial,baseline,power,secrecy,rate_user,max_eve_rate,active_eve";

/// Per-trial result records, one row per (trial, requested baseline).
pub fn trials_to_csv(outcomes: &[TrialOutcomes], baselines: &BaselineSet) -> String {
    let mut out = String::from(TRIALS_CSV_HEADER);
    out.push('\n');
    for trial in outcomes {
        for baseline in baselines.iter() {
            if let Some(o) = trial.get(baseline) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    trial.trial_index,
                    baseline,
                    fmt_sig9(o.power),
                    fmt_sig9(o.secrecy_capacity),
                    fmt_sig9(o.rate_user),
                    fmt_sig9(o.max_eve_rate()),
                    o.active_eve,
                ));
            }
        }
    }
    out
}

pub const TRACE_CSV_HEADER: &str = "trial,iter,objective";

/// Optimizer outer-loop traces as CSV, for `--verbose-trace`.
pub fn traces_to_csv(outcomes: &[TrialOutcomes]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for trial in outcomes {
        if let Some(trace) = &trial.optimizer_trace {
            for (i, obj) in trace.objective_per_iter.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", trial.trial_index, i, fmt_sig9(*obj)));
            }
        }
    }
    out
}

/// Per-trial phase profiles as JSON lines (amplitudes and phases as two
/// real arrays), one record per (trial, baseline).
pub fn profiles_to_jsonl(outcomes: &[TrialOutcomes], baselines: &BaselineSet) -> String {
    let mut out = String::new();
    for trial in outcomes {
        for baseline in baselines.iter() {
            if let Some(o) = trial.get(baseline) {
                let row = serde_json::json!({
                    "trial": trial.trial_index,
                    "baseline": baseline.label(),
                    "power": o.power,
                    "secrecy": o.secrecy_capacity,
                    "amplitudes": o.profile.amplitudes(),
                    "phases": o.profile.phases(),
                });
                out.push_str(&row.to_string());
                out.push('\n');
            }
        }
    }
    out
}
