//! Trajectories to fixation and Monte Carlo estimates of `E(M_{S_N}(1))`.
//!
//! Every step consumes the stream in the same order: mother, father, dying
//! site (see [`PopulationState::sample_step`]), then one neutral-locus coin.
//! The coin is drawn whether or not gene dropping is tracked, so a weights
//! run and a gene-drop run with the same stream follow the same pedigree.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PopulationConfig, PopulationState, StepEvent};
use crate::rng::stream_rng;
use crate::stats::{self, SampleStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Estimator {
    /// Sum of expected ancestral weights (conditional on the pedigree).
    Weights,
    /// Number of sites whose neutral allele actually descends from site 1.
    GeneDrop,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Weights => "weights",
            Estimator::GeneDrop => "gene_drop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// `M_{S_N}(1)`, equal to `B_{S_N}` since no non-advantaged site is left.
    pub final_weight: f64,
    pub fixation_step: u64,
    /// `(S_1, …, S_N)`, when requested.
    pub sweep_times: Option<Vec<u64>>,
    pub gene_drop_count: Option<usize>,
}

impl SimResult {
    pub fn value(&self, estimator: Estimator) -> f64 {
        match estimator {
            Estimator::Weights => self.final_weight,
            Estimator::GeneDrop => self.gene_drop_count.unwrap_or(0) as f64,
        }
    }
}

/// Neutral-locus ancestor labels for gene dropping; `labels[i]` is the
/// 0-based time-0 site that site `i`'s allele descends from.
struct GeneDrop {
    labels: Vec<u32>,
}

impl GeneDrop {
    fn new(n: usize) -> Self {
        Self {
            labels: (0..n as u32).collect(),
        }
    }

    fn birth(&mut self, event: StepEvent, from_mother: bool) {
        let parent = if from_mother {
            event.mother
        } else {
            event.father
        };
        self.labels[event.killed] = self.labels[parent];
    }

    fn count_of_first(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }
}

fn run<R: Rng + ?Sized>(
    config: &PopulationConfig,
    rng: &mut R,
    record_sweep: bool,
    gene_drop: bool,
) -> Result<SimResult> {
    let mut state = PopulationState::new(config)?;
    let mut drop = gene_drop.then(|| GeneDrop::new(config.size));
    let mut sweep = record_sweep.then(|| {
        let mut s = Vec::with_capacity(config.size);
        s.push(0u64);
        s
    });
    while !state.is_fixed() {
        if state.time() >= config.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: config.max_steps,
            });
        }
        let event = state.sample_step(rng)?;
        let from_mother: bool = rng.random();
        let jumped = state.apply_step(event)?;
        if let Some(d) = drop.as_mut() {
            d.birth(event, from_mother);
        }
        if jumped {
            if let Some(s) = sweep.as_mut() {
                s.push(state.time());
            }
        }
    }
    let (b, c) = state.weight_split();
    debug_assert_eq!(c, 0.0);
    Ok(SimResult {
        final_weight: b,
        fixation_step: state.time(),
        sweep_times: sweep,
        gene_drop_count: drop.map(|d| d.count_of_first()),
    })
}

/// Runs the sweep to fixation tracking expected weights.
pub fn run_to_fixation<R: Rng + ?Sized>(
    config: &PopulationConfig,
    rng: &mut R,
    record_sweep: bool,
) -> Result<SimResult> {
    run(config, rng, record_sweep, false)
}

/// Runs the sweep to fixation tracking both expected weights and gene-drop
/// labels on the same pedigree.
pub fn gene_drop_run<R: Rng + ?Sized>(config: &PopulationConfig, rng: &mut R) -> Result<SimResult> {
    run(config, rng, false, true)
}

/// Gene dropping along a prescribed event sequence with prescribed coins.
/// Stops at fixation or when the events run out.
pub fn gene_drop_forced(
    config: &PopulationConfig,
    events: &[(StepEvent, bool)],
) -> Result<(PopulationState, Vec<u32>)> {
    let mut state = PopulationState::new(config)?;
    let mut drop = GeneDrop::new(config.size);
    for &(event, from_mother) in events {
        if state.is_fixed() {
            break;
        }
        state.apply_step(event)?;
        drop.birth(event, from_mother);
    }
    Ok((state, drop.labels))
}

/// Per-replication values in replication order.
pub fn replicate_values(
    config: &PopulationConfig,
    n_reps: u64,
    seed: u64,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    if n_reps == 0 {
        return Err(Error::InvalidConfig("n_reps must be at least 1".into()));
    }
    config.validate()?;
    (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let res = match estimator {
                Estimator::Weights => run_to_fixation(config, &mut rng, false),
                Estimator::GeneDrop => gene_drop_run(config, &mut rng),
            };
            res.map(|s| s.value(estimator)).map_err(|e| Error::Replication {
                index: r,
                source: Box::new(e),
            })
        })
        .collect()
}

/// `n_reps` independent replications, replication `r` on stream `(seed, r)`,
/// reduced sequentially in index order. With one replication the variance is
/// reported as 0.
pub fn replicate(
    config: &PopulationConfig,
    n_reps: u64,
    seed: u64,
    estimator: Estimator,
) -> Result<SampleStats> {
    stats::aggregate(&replicate_values(config, n_reps, seed, estimator)?)
}

/// Both estimators from the same `n_reps` trajectories.
pub fn replicate_paired(
    config: &PopulationConfig,
    n_reps: u64,
    seed: u64,
) -> Result<(SampleStats, SampleStats)> {
    if n_reps == 0 {
        return Err(Error::InvalidConfig("n_reps must be at least 1".into()));
    }
    config.validate()?;
    let pairs: Vec<(f64, f64)> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            gene_drop_run(config, &mut rng)
                .map(|s| (s.final_weight, s.gene_drop_count.unwrap_or(0) as f64))
                .map_err(|e| Error::Replication {
                    index: r,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let (w, g): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((stats::aggregate(&w)?, stats::aggregate(&g)?))
}

/// `(B', C')` predicted for one step from `state`, conditional on whether `Y`
/// jumps.
pub fn conditional_expectation(state: &PopulationState, jump: bool) -> (f64, f64) {
    let n = state.size() as f64;
    let y = state.n_advantaged() as f64;
    let (b, c) = state.weight_split();
    let father = (b + c) / (2.0 * n);
    if jump {
        (b + b / (2.0 * y) + father, c - c / (n - y))
    } else {
        (b, c - c / (n - y) + c / (2.0 * (n - y)) + father)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalCheck {
    pub jump: bool,
    pub matched: u64,
    pub b_mean: f64,
    pub c_mean: f64,
    pub b_expected: f64,
    pub c_expected: f64,
    pub b_std_error: f64,
    pub c_std_error: f64,
}

/// Samples single steps from `state` by rejection, keeping those whose jump
/// outcome equals `jump`, and reports empirical against predicted means of
/// `B` and `C` after the step.
pub fn validate_conditional_step<R: Rng + ?Sized>(
    state: &PopulationState,
    jump: bool,
    n_trials: u64,
    rng: &mut R,
) -> Result<ConditionalCheck> {
    if state.is_fixed() {
        return Err(Error::Fixated { size: state.size() });
    }
    let mut bs = Vec::new();
    let mut cs = Vec::new();
    for _ in 0..n_trials {
        let event = state.sample_step(rng)?;
        let mut next = state.clone();
        if next.apply_step(event)? == jump {
            let (b, c) = next.weight_split();
            bs.push(b);
            cs.push(c);
        }
    }
    if bs.is_empty() {
        return Err(Error::NoMatchingTrials {
            jump,
            trials: n_trials,
        });
    }
    let b = stats::aggregate(&bs)?;
    let c = stats::aggregate(&cs)?;
    let (b_expected, c_expected) = conditional_expectation(state, jump);
    Ok(ConditionalCheck {
        jump,
        matched: b.n_reps,
        b_mean: b.mean,
        c_mean: c.mean,
        b_expected,
        c_expected,
        b_std_error: b.std_error,
        c_std_error: c.std_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepTimeRow {
    pub k: u64,
    pub mean: f64,
    pub std_error: f64,
    /// `Σ_{j<k} N/j`.
    pub expected: f64,
}

/// Mean sweep times `S_k` over `n_reps` runs against their geometric-sum
/// expectation.
pub fn sweep_time_stats(
    config: &PopulationConfig,
    n_reps: u64,
    seed: u64,
) -> Result<Vec<SweepTimeRow>> {
    if n_reps == 0 {
        return Err(Error::InvalidConfig("n_reps must be at least 1".into()));
    }
    config.validate()?;
    let n = config.size;
    let runs: Vec<Vec<u64>> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            run_to_fixation(config, &mut rng, true)
                .map(|s| s.sweep_times.expect("recorded"))
                .map_err(|e| Error::Replication {
                    index: r,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut expected = 0.0;
    (0..n)
        .map(|i| {
            if i > 0 {
                expected += n as f64 / i as f64;
            }
            let column: Vec<f64> = runs.iter().map(|s| s[i] as f64).collect();
            let st = stats::aggregate(&column)?;
            Ok(SweepTimeRow {
                k: i as u64 + 1,
                mean: st.mean,
                std_error: st.std_error,
                expected,
            })
        })
        .collect()
}
