//! Delayed-acceptance hillclimbing, the basic-hillclimbing baseline, and the
//! local search operators.
//!
//! Delayed acceptance keeps three pieces of state: the current program `Y`,
//! the period's best `N` with score `B`, and the acceptance threshold `T`.
//! Candidates scoring at least `T` replace `Y` (a random walk above the
//! threshold); at the end of each period of `I` evaluations the best is
//! accepted, `T` rises to its score, and search stops the first time a whole
//! period passes with no improvement.

use serde::{Deserialize, Serialize};

use crate::isa::{MachineProfile, Program};
use crate::rng::{rng_from_seed, SearchRng};
use rand::Rng;

/// Operator probabilities and period bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub swap_p: f64,
    pub double_p: f64,
    pub copy_p: f64,
    /// Period length `I` in evaluations.
    pub period: u64,
    pub max_periods: u64,
}

impl Default for SearchParams {
    fn default() -> SearchParams {
        SearchParams { swap_p: 0.1, double_p: 0.9, copy_p: 0.5, period: 75_000, max_periods: 4 }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in
            [("swap_p", self.swap_p), ("double_p", self.double_p), ("copy_p", self.copy_p)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0,1], got {p}"));
            }
        }
        if self.period == 0 {
            return Err("period must be >= 1".into());
        }
        if self.max_periods == 0 {
            return Err("max_periods must be >= 1".into());
        }
        Ok(())
    }

    /// The implied evaluation budget `I * max_periods`.
    pub fn budget(&self) -> u64 {
        self.period.saturating_mul(self.max_periods)
    }
}

/// What one evaluation reports back to search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// The score search optimizes (includes the simplicity bonus).
    pub score: u64,
    /// Points earned before any bonus.
    pub raw: u64,
    /// Fully correct on the training set.
    pub success: bool,
}

/// Scores candidate programs. Must be deterministic; scores are >= 0 by type.
pub trait Evaluator {
    fn evaluate(&mut self, program: &Program) -> Evaluation;
}

impl<F: FnMut(&Program) -> Evaluation> Evaluator for F {
    fn evaluate(&mut self, program: &Program) -> Evaluation {
        self(program)
    }
}

/// Exchange two distinct positions chosen uniformly.
pub fn swap_op(program: &Program, rng: &mut SearchRng) -> Program {
    let len = program.len();
    debug_assert!(len >= 2);
    let i = rng.gen_range(0..len);
    let mut j = rng.gen_range(0..len - 1);
    if j >= i {
        j += 1;
    }
    let mut out = program.clone();
    out.slots_mut().swap(i, j);
    out
}

/// One-point replacement: build a random instruction, optionally copying its
/// opcode and (independently) its operand from random positions of the input,
/// then write it at a random position.
pub fn replacement_op(
    program: &Program,
    rng: &mut SearchRng,
    params: &SearchParams,
    profile: &MachineProfile,
) -> Program {
    let len = program.len();
    let mut w = profile.random_instruction(rng);
    if rng.gen::<f64>() < params.copy_p {
        let i = rng.gen_range(0..len);
        w = w.with_opcode(program.instructions()[i].opcode());
    }
    if rng.gen::<f64>() < params.copy_p {
        let j = rng.gen_range(0..len);
        w = w.with_operand(program.instructions()[j].operand());
    }
    let k = rng.gen_range(0..len);
    let mut out = program.clone();
    out.slots_mut()[k] = w;
    out
}

/// The combined local operator: a swap with probability `swap_p`, otherwise
/// a replacement followed by a second replacement with probability `double_p`.
pub fn loc_op(
    program: &Program,
    rng: &mut SearchRng,
    params: &SearchParams,
    profile: &MachineProfile,
) -> Program {
    if rng.gen::<f64>() < params.swap_p {
        swap_op(program, rng)
    } else {
        let z = replacement_op(program, rng, params, profile);
        if rng.gen::<f64>() < params.double_p {
            replacement_op(&z, rng, params, profile)
        } else {
            z
        }
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchHalt {
    /// A full period passed with no improvement (natural termination).
    NoProgress,
    /// The period cap was reached.
    MaxPeriods,
    /// The external evaluation budget ran out mid-period.
    ExternalBudget,
}

/// One accepted program, recorded at a period boundary (for basic
/// hillclimbing: at each strict improvement).
#[derive(Clone, Debug)]
pub struct Milestone {
    pub period: u64,
    pub evaluations: u64,
    pub score: u64,
    pub raw: u64,
    pub success: bool,
    pub program: Program,
    /// Filled offline by trajectory export; never read by search.
    pub test_raw: Option<u64>,
}

/// The simplest (most opcode-N) fully-correct program seen in a run.
#[derive(Clone, Debug)]
pub struct SimplestSuccess {
    pub program: Program,
    pub noop_count: usize,
    pub found_at_evaluation: u64,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub seed: u64,
    pub params: SearchParams,
    pub milestones: Vec<Milestone>,
    pub final_program: Option<Program>,
    pub final_score: u64,
    pub train_success: bool,
    pub simplest_success: Option<SimplestSuccess>,
    pub total_evaluations: u64,
    pub halt: SearchHalt,
}

/// Hook into the search loop, used by invariant tests and nothing else.
pub trait SearchObserver {
    fn on_evaluation(&mut self, _evaluations: u64, _score: u64, _best: u64, _threshold: u64) {}
    fn on_period_accept(&mut self, _period: u64, _best: u64, _threshold_before: u64) {}
}

struct NullObserver;
impl SearchObserver for NullObserver {}

struct SuccessTracker {
    simplest: Option<SimplestSuccess>,
}

impl SuccessTracker {
    fn new() -> SuccessTracker {
        SuccessTracker { simplest: None }
    }

    fn observe(&mut self, program: &Program, profile: &MachineProfile, evals: u64) {
        let noops = program.count_noops(profile);
        let better = match &self.simplest {
            None => true,
            Some(cur) => noops > cur.noop_count, // ties keep the earlier find
        };
        if better {
            self.simplest = Some(SimplestSuccess {
                program: program.clone(),
                noop_count: noops,
                found_at_evaluation: evals,
            });
        }
    }
}

/// Delayed-acceptance hillclimbing. While the best score is zero each
/// candidate is a fresh random program; afterwards candidates come from
/// `loc_op` applied to the current program. Runs until a period brings no
/// progress, `max_periods` periods complete, or `budget` evaluations are
/// spent; the capped halts return the best-so-far program.
pub fn run_delayed_acceptance(
    evaluator: &mut dyn Evaluator,
    profile: &MachineProfile,
    params: &SearchParams,
    seed: u64,
    budget: u64,
) -> RunRecord {
    run_delayed_acceptance_observed(evaluator, profile, params, seed, budget, &mut NullObserver)
}

pub fn run_delayed_acceptance_observed(
    evaluator: &mut dyn Evaluator,
    profile: &MachineProfile,
    params: &SearchParams,
    seed: u64,
    budget: u64,
    observer: &mut dyn SearchObserver,
) -> RunRecord {
    let mut rng = rng_from_seed(seed);
    let mut threshold = 0u64; // T
    let mut best = 0u64; // B
    let mut in_period = 0u64; // J
    let mut evals = 0u64;
    let mut periods_done = 0u64;

    let mut current: Option<(Program, Evaluation)> = None; // Y
    let mut period_best: Option<(Program, Evaluation)> = None; // N
    let mut milestones = Vec::new();
    let mut tracker = SuccessTracker::new();

    let halt = loop {
        if evals >= budget {
            break SearchHalt::ExternalBudget;
        }
        let candidate = if best == 0 {
            profile.random_program(&mut rng)
        } else {
            loc_op(&current.as_ref().expect("current set once best > 0").0, &mut rng, params, profile)
        };
        let result = evaluator.evaluate(&candidate);
        evals += 1;
        if result.success {
            tracker.observe(&candidate, profile, evals);
        }
        if result.score >= best {
            best = result.score;
            period_best = Some((candidate.clone(), result));
        }
        if result.score >= threshold {
            current = Some((candidate, result));
        }
        observer.on_evaluation(evals, result.score, best, threshold);
        in_period += 1;
        if in_period == params.period {
            if best == threshold {
                break SearchHalt::NoProgress;
            }
            observer.on_period_accept(periods_done + 1, best, threshold);
            let (program, eval) = period_best.clone().expect("best > threshold implies a candidate");
            current = Some((program.clone(), eval));
            threshold = best;
            in_period = 0;
            periods_done += 1;
            milestones.push(Milestone {
                period: periods_done,
                evaluations: evals,
                score: eval.score,
                raw: eval.raw,
                success: eval.success,
                program,
                test_raw: None,
            });
            if periods_done >= params.max_periods {
                break SearchHalt::MaxPeriods;
            }
        }
    };

    // Natural termination returns the current program Y; capped halts
    // surface the best-so-far N.
    let chosen = match halt {
        SearchHalt::NoProgress => current,
        _ => period_best,
    };
    let (final_program, final_eval) = match chosen {
        Some((p, e)) => (Some(p), Some(e)),
        None => (None, None),
    };
    RunRecord {
        seed,
        params: *params,
        milestones,
        final_program,
        final_score: final_eval.map_or(0, |e| e.score),
        train_success: final_eval.is_some_and(|e| e.success),
        simplest_success: tracker.simplest,
        total_evaluations: evals,
        halt,
    }
}

/// Basic hillclimbing baseline: one current program, a candidate is accepted
/// iff its score is at least the current score, and search stops after
/// `period` consecutive evaluations without a strict improvement of the best
/// score (or at the budget). Candidates are fresh random programs until
/// anything scores above zero, mirroring the delayed-acceptance rule.
pub fn run_basic_hillclimbing(
    evaluator: &mut dyn Evaluator,
    profile: &MachineProfile,
    params: &SearchParams,
    seed: u64,
    budget: u64,
) -> RunRecord {
    let mut rng = rng_from_seed(seed);
    let mut evals = 0u64;
    let mut since_improvement = 0u64;
    let mut improvements = 0u64;
    let mut current: Option<(Program, Evaluation)> = None;
    let mut best = 0u64;
    let mut milestones = Vec::new();
    let mut tracker = SuccessTracker::new();

    let halt = loop {
        if evals >= budget {
            break SearchHalt::ExternalBudget;
        }
        let candidate = if best == 0 {
            profile.random_program(&mut rng)
        } else {
            loc_op(&current.as_ref().expect("current set once best > 0").0, &mut rng, params, profile)
        };
        let result = evaluator.evaluate(&candidate);
        evals += 1;
        since_improvement += 1;
        if result.success {
            tracker.observe(&candidate, profile, evals);
        }
        let current_score = current.as_ref().map_or(0, |(_, e)| e.score);
        if result.score >= current_score {
            if result.score > best {
                best = result.score;
                since_improvement = 0;
                improvements += 1;
                milestones.push(Milestone {
                    period: improvements,
                    evaluations: evals,
                    score: result.score,
                    raw: result.raw,
                    success: result.success,
                    program: candidate.clone(),
                    test_raw: None,
                });
            }
            current = Some((candidate, result));
        }
        if since_improvement >= params.period {
            break SearchHalt::NoProgress;
        }
    };

    let (final_program, final_eval) = match current {
        Some((p, e)) => (Some(p), Some(e)),
        None => (None, None),
    };
    RunRecord {
        seed,
        params: *params,
        milestones,
        final_program,
        final_score: final_eval.map_or(0, |e| e.score),
        train_success: final_eval.is_some_and(|e| e.success),
        simplest_success: tracker.simplest,
        total_evaluations: evals,
        halt,
    }
}
