//! Experiment orchestration: the multi-level run protocol, parameter grid
//! search, structured run logs, and trajectory export.
//!
//! Everything here is a pure function of (configuration, seed base). Per-run
//! seeds derive from the seed base and run index alone, so a protocol
//! produces identical reports and logs whether runs execute sequentially or
//! on a worker pool. Wall-clock timing is printed to the console by the CLI
//! and never written into the persisted artifacts.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{generate_set, Benchmark, Split};
use crate::isa::{self, MachineProfile, Program};
use crate::rng::{mix_seed, name_hash};
use crate::scoring::{generalization_test, ProblemSet, TisEvaluator, X86Evaluator};
use crate::search::{
    run_basic_hillclimbing, run_delayed_acceptance, RunRecord, SearchHalt, SearchParams,
};
use crate::tis100::TisProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    DelayedAcceptance,
    BasicHillclimbing,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::DelayedAcceptance => "delayed-acceptance",
            Algorithm::BasicHillclimbing => "basic-hillclimbing",
        }
    }

    pub fn from_name(s: &str) -> Option<Algorithm> {
        match s {
            "delayed-acceptance" | "da" => Some(Algorithm::DelayedAcceptance),
            "basic-hillclimbing" | "bh" => Some(Algorithm::BasicHillclimbing),
            _ => None,
        }
    }
}

/// One resource level of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolLevel {
    pub runs: u64,
    pub period: u64,
    pub max_periods: u64,
}

impl ProtocolLevel {
    pub fn budget(&self) -> u64 {
        self.period.saturating_mul(self.max_periods)
    }
}

/// The published three-level protocol: 100 runs of 300k programs, then 100
/// of 18M, then 30 of 1G.
pub fn default_levels() -> Vec<ProtocolLevel> {
    vec![
        ProtocolLevel { runs: 100, period: 75_000, max_periods: 4 },
        ProtocolLevel { runs: 100, period: 2_000_000, max_periods: 9 },
        ProtocolLevel { runs: 30, period: 100_000_000, max_periods: 10 },
    ]
}

/// Desk-scale preset: one level of 10 runs at the standard period. Only the
/// run count shrinks; benchmark definitions are untouched.
pub fn desk_levels() -> Vec<ProtocolLevel> {
    vec![ProtocolLevel { runs: 10, period: 75_000, max_periods: 4 }]
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub seed_base: u64,
    pub levels: Vec<ProtocolLevel>,
    pub algorithm: Algorithm,
    pub swap_p: f64,
    pub double_p: f64,
    pub copy_p: f64,
    pub threads: usize,
    pub train_count: usize,
    pub test_count: usize,
    /// Rerun capped training successes to natural termination before
    /// measuring the smallest program.
    pub extend_for_smallest: bool,
    /// Operand-range override for the image puzzles.
    pub profile_override: Option<&'static MachineProfile>,
}

impl Default for ProtocolConfig {
    fn default() -> ProtocolConfig {
        ProtocolConfig {
            seed_base: 0,
            levels: default_levels(),
            algorithm: Algorithm::DelayedAcceptance,
            swap_p: 0.1,
            double_p: 0.9,
            copy_p: 0.5,
            threads: 1,
            train_count: Split::Train.default_count(),
            test_count: Split::Test.default_count(),
            extend_for_smallest: true,
            profile_override: None,
        }
    }
}

impl ProtocolConfig {
    fn params(&self, level: ProtocolLevel) -> SearchParams {
        SearchParams {
            swap_p: self.swap_p,
            double_p: self.double_p,
            copy_p: self.copy_p,
            period: level.period,
            max_periods: level.max_periods,
        }
    }
}

/// Seed for a benchmark's generated problem sets under a given seed base.
pub fn problem_set_seed(seed_base: u64, benchmark: Benchmark, split: Split) -> u64 {
    let tag = match split {
        Split::Train => 1,
        Split::Test => 2,
    };
    mix_seed(seed_base ^ name_hash(benchmark.name()), tag)
}

/// Seed for run `run_index` of level `level_index`.
pub fn run_seed(seed_base: u64, level_index: usize, run_index: u64) -> u64 {
    mix_seed(mix_seed(seed_base, level_index as u64), run_index)
}

/// Everything one run contributes to a report.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub run_index: u64,
    pub seed: u64,
    pub record: RunRecord,
    /// Simplest training-success program, after the optional extension.
    pub simplest: Option<Program>,
    pub smallest_size: Option<usize>,
    pub generalizes: Option<bool>,
    pub test_fraction: Option<f64>,
    pub tis_best: Option<(usize, u64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    pub benchmark: String,
    pub algorithm: Algorithm,
    /// 0-based index of the level the report covers (the first with any
    /// training success, or the last attempted).
    pub level_index: usize,
    pub level: ProtocolLevel,
    pub runs: u64,
    pub train_successes: u64,
    pub generalize_successes: u64,
    pub smallest_size: Option<usize>,
    pub tis_best: Option<(usize, u64)>,
}

impl BenchmarkReport {
    pub fn pct_train(&self) -> f64 {
        100.0 * self.train_successes as f64 / self.runs.max(1) as f64
    }

    pub fn pct_generalize(&self) -> f64 {
        100.0 * self.generalize_successes as f64 / self.runs.max(1) as f64
    }

    pub fn csv_header() -> &'static str {
        "benchmark,algorithm,level,runs,period,max_periods,train_successes,pct_train,\
generalize_successes,pct_generalize,smallest_size,tis_size,tis_cycles"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
        format!(
            "{},{},{},{},{},{},{},{:.1},{},{:.1},{},{},{}",
            self.benchmark,
            self.algorithm.name(),
            self.level_index + 1,
            self.runs,
            self.level.period,
            self.level.max_periods,
            self.train_successes,
            self.pct_train(),
            self.generalize_successes,
            self.pct_generalize(),
            opt(self.smallest_size.map(|s| s as u64)),
            opt(self.tis_best.map(|(s, _)| s as u64)),
            opt(self.tis_best.map(|(_, c)| c)),
        )
    }
}

/// Run a closure over `0..jobs` on a small worker pool, collecting results
/// in job order regardless of scheduling.
pub fn run_indexed<T: Send>(
    jobs: usize,
    threads: usize,
    work: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    let threads = threads.max(1).min(jobs.max(1));
    let results: Vec<Mutex<Option<T>>> = (0..jobs).map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let out = work(i);
                *results[i].lock().unwrap() = Some(out);
            });
        }
    });
    results.into_iter().map(|m| m.into_inner().unwrap().expect("worker finished")).collect()
}

enum Problems {
    X86 { train: ProblemSet, test: ProblemSet },
    Tis(TisProblem),
}

fn build_problems(benchmark: Benchmark, config: &ProtocolConfig) -> Problems {
    if benchmark.is_image() {
        return Problems::Tis(benchmark.tis_problem().expect("image benchmark"));
    }
    let train_seed = problem_set_seed(config.seed_base, benchmark, Split::Train);
    let test_seed = problem_set_seed(config.seed_base, benchmark, Split::Test);
    let train = generate_set(benchmark, Split::Train, config.train_count, train_seed);
    let test = generate_set(benchmark, Split::Test, config.test_count, test_seed);
    Problems::X86 { train: train.unwrap_x86(), test: test.unwrap_x86() }
}

fn search_once(
    algorithm: Algorithm,
    evaluator: &mut dyn crate::search::Evaluator,
    profile: &MachineProfile,
    params: &SearchParams,
    seed: u64,
    budget: u64,
) -> RunRecord {
    match algorithm {
        Algorithm::DelayedAcceptance => {
            run_delayed_acceptance(evaluator, profile, params, seed, budget)
        }
        Algorithm::BasicHillclimbing => {
            run_basic_hillclimbing(evaluator, profile, params, seed, budget)
        }
    }
}

fn one_run(
    benchmark: Benchmark,
    problems: &Problems,
    config: &ProtocolConfig,
    level: ProtocolLevel,
    level_index: usize,
    run_index: u64,
) -> RunOutcome {
    let profile = config.profile_override.unwrap_or_else(|| benchmark.profile());
    let params = config.params(level);
    let seed = run_seed(config.seed_base, level_index, run_index);
    let (record, simplest, tis_best) = match problems {
        Problems::X86 { train, .. } => {
            let mut evaluator = X86Evaluator::new(train);
            let mut record = search_once(
                config.algorithm,
                &mut evaluator,
                profile,
                &params,
                seed,
                level.budget(),
            );
            // Capped runs with a training success continue to natural
            // termination, solely to measure the smallest program.
            if config.extend_for_smallest
                && record.train_success
                && record.halt != SearchHalt::NoProgress
            {
                let unlimited = SearchParams { max_periods: u64::MAX, ..params };
                let mut evaluator = X86Evaluator::new(train);
                let extended = search_once(
                    config.algorithm,
                    &mut evaluator,
                    profile,
                    &unlimited,
                    seed,
                    u64::MAX,
                );
                record.simplest_success = extended.simplest_success;
            }
            let simplest = record.simplest_success.as_ref().map(|s| s.program.clone());
            (record, simplest, None)
        }
        Problems::Tis(problem) => {
            let mut evaluator = TisEvaluator::new(problem, profile);
            let record = search_once(
                config.algorithm,
                &mut evaluator,
                profile,
                &params,
                seed,
                level.budget(),
            );
            let simplest = record.simplest_success.as_ref().map(|s| s.program.clone());
            let best = evaluator.best_solved;
            (record, simplest, best)
        }
    };

    let (generalizes, test_fraction) = match (&simplest, problems) {
        (Some(program), Problems::X86 { test, .. }) => {
            let (perfect, fraction) = generalization_test(program, test);
            (Some(perfect), Some(fraction))
        }
        (Some(_), Problems::Tis(_)) => (Some(true), Some(1.0)),
        _ => (None, None),
    };
    let smallest_size = simplest.as_ref().map(|p| p.effective_size(profile));
    RunOutcome {
        run_index,
        seed,
        record,
        simplest,
        smallest_size,
        generalizes,
        test_fraction,
        tis_best,
    }
}

/// Execute the run protocol: levels in order, stopping at the first level
/// with any training success; each successful run's simplest program is
/// evaluated on the test set. Returns the report plus every outcome of the
/// reported level.
pub fn run_protocol(
    benchmark: Benchmark,
    config: &ProtocolConfig,
) -> (BenchmarkReport, Vec<RunOutcome>) {
    assert!(!config.levels.is_empty(), "protocol needs at least one level");
    let problems = build_problems(benchmark, config);
    let mut last: Option<(usize, Vec<RunOutcome>)> = None;
    for (level_index, &level) in config.levels.iter().enumerate() {
        let outcomes = run_indexed(level.runs as usize, config.threads, |i| {
            one_run(benchmark, &problems, config, level, level_index, i as u64)
        });
        let any_success = outcomes.iter().any(|o| o.record.train_success);
        last = Some((level_index, outcomes));
        if any_success {
            break;
        }
    }
    let (level_index, outcomes) = last.expect("at least one level ran");
    let level = config.levels[level_index];
    let train_successes = outcomes.iter().filter(|o| o.record.train_success).count() as u64;
    let generalize_successes =
        outcomes.iter().filter(|o| o.generalizes == Some(true)).count() as u64;
    let smallest_size = outcomes
        .iter()
        .filter(|o| o.record.train_success)
        .filter_map(|o| o.smallest_size)
        .min();
    let tis_best =
        outcomes.iter().filter_map(|o| o.tis_best).min_by_key(|&(size, cycles)| (size, cycles));
    let report = BenchmarkReport {
        benchmark: benchmark.name().to_string(),
        algorithm: config.algorithm,
        level_index,
        level,
        runs: level.runs,
        train_successes,
        generalize_successes,
        smallest_size,
        tis_best,
    };
    (report, outcomes)
}

// ---------------------------------------------------------------------------
// Run logs
// ---------------------------------------------------------------------------

/// One line of the structured run log. Self-contained: programs are stored
/// in their canonical text form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogRecord {
    pub run_index: u64,
    pub seed: u64,
    pub benchmark: String,
    pub algorithm: Algorithm,
    pub level: usize,
    pub params: SearchParams,
    pub budget: u64,
    pub halt: SearchHalt,
    pub total_evaluations: u64,
    pub train_success: bool,
    pub final_score: u64,
    pub final_program: Option<String>,
    pub simplest_program: Option<String>,
    pub smallest_size: Option<usize>,
    pub generalizes: Option<bool>,
    pub test_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tis_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tis_cycles: Option<u64>,
    pub milestones: Vec<LogMilestone>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogMilestone {
    pub period: u64,
    pub evaluations: u64,
    pub score: u64,
    pub raw: u64,
    pub success: bool,
    pub program: String,
}

pub fn log_record(
    benchmark: Benchmark,
    config: &ProtocolConfig,
    level_index: usize,
    outcome: &RunOutcome,
) -> LogRecord {
    let profile = config.profile_override.unwrap_or_else(|| benchmark.profile());
    let level = config.levels[level_index];
    let params = config.params(level);
    let to_text = |p: &Program| isa::serialize(p, profile);
    LogRecord {
        run_index: outcome.run_index,
        seed: outcome.seed,
        benchmark: benchmark.name().to_string(),
        algorithm: config.algorithm,
        level: level_index,
        params,
        budget: level.budget(),
        halt: outcome.record.halt,
        total_evaluations: outcome.record.total_evaluations,
        train_success: outcome.record.train_success,
        final_score: outcome.record.final_score,
        final_program: outcome.record.final_program.as_ref().map(to_text),
        simplest_program: outcome.simplest.as_ref().map(to_text),
        smallest_size: outcome.smallest_size,
        generalizes: outcome.generalizes,
        test_fraction: outcome.test_fraction,
        tis_size: outcome.tis_best.map(|(s, _)| s),
        tis_cycles: outcome.tis_best.map(|(_, c)| c),
        milestones: outcome
            .record
            .milestones
            .iter()
            .map(|m| LogMilestone {
                period: m.period,
                evaluations: m.evaluations,
                score: m.score,
                raw: m.raw,
                success: m.success,
                program: to_text(&m.program),
            })
            .collect(),
    }
}

/// Serialize records as JSON lines, ordered by run index.
pub fn write_run_log(records: &[LogRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("log record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_run_log(text: &str) -> Result<Vec<LogRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

// ---------------------------------------------------------------------------
// Trajectory export
// ---------------------------------------------------------------------------

/// One accepted program of one run: search progress against held-out test
/// performance. Test scores are computed offline from the logged programs;
/// they never feed back into search.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub run_index: u64,
    pub period: u64,
    pub evaluations: u64,
    pub train_pct: f64,
    pub test_pct: f64,
}

pub fn export_trajectory(
    records: &[LogRecord],
    train_max: u64,
    test_set: &ProblemSet,
) -> Result<Vec<TrajectoryRow>, isa::ParseError> {
    let mut rows = Vec::new();
    for record in records {
        for m in &record.milestones {
            let (_, program) = isa::parse_with_profile(&m.program)?;
            let (_, test_fraction) = generalization_test(&program, test_set);
            rows.push(TrajectoryRow {
                run_index: record.run_index,
                period: m.period,
                evaluations: m.evaluations,
                train_pct: 100.0 * m.raw as f64 / train_max.max(1) as f64,
                test_pct: 100.0 * test_fraction,
            });
        }
    }
    rows.sort_by(|a, b| (a.run_index, a.evaluations).cmp(&(b.run_index, b.evaluations)));
    Ok(rows)
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("run,period,evaluations,train_pct,test_pct\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4}\n",
            r.run_index, r.period, r.evaluations, r.train_pct, r.test_pct
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct GridSpec {
    pub swap: Vec<f64>,
    pub double: Vec<f64>,
    pub copy: Vec<f64>,
    pub periods: Vec<u64>,
    pub runs_per_cell: u64,
    pub budget: u64,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec {
            swap: vec![0.0, 0.1],
            double: vec![0.0, 0.1, 0.5, 0.9],
            copy: vec![0.0, 0.1, 0.5],
            periods: vec![3_000, 10_000, 25_000, 75_000, 150_000],
            runs_per_cell: 100,
            budget: 300_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridCell {
    pub swap_p: f64,
    pub double_p: f64,
    pub copy_p: f64,
    pub period: u64,
    /// Runs whose simplest success generalized perfectly, over all
    /// benchmarks.
    pub perfect: u64,
    pub train_successes: u64,
}

pub fn grid_cells(spec: &GridSpec) -> Vec<GridCell> {
    let mut cells = Vec::new();
    for &swap_p in &spec.swap {
        for &double_p in &spec.double {
            for &copy_p in &spec.copy {
                for &period in &spec.periods {
                    cells.push(GridCell {
                        swap_p,
                        double_p,
                        copy_p,
                        period,
                        perfect: 0,
                        train_successes: 0,
                    });
                }
            }
        }
    }
    cells
}

/// Grid search over operator parameters: every cell runs `runs_per_cell`
/// delayed-acceptance runs per benchmark at the cell's period, and cells are
/// ranked by total runs that generalize perfectly. Returns an empty table
/// when `runs_per_cell` is zero.
pub fn grid_search(
    benchmarks: &[Benchmark],
    spec: &GridSpec,
    seed_base: u64,
    threads: usize,
) -> Vec<GridCell> {
    if spec.runs_per_cell == 0 {
        return Vec::new();
    }
    let mut cells = grid_cells(spec);
    let sets: Vec<(ProblemSet, ProblemSet)> = benchmarks
        .iter()
        .map(|&b| {
            assert!(!b.is_image(), "grid search runs on problem-set benchmarks");
            let train = generate_set(
                b,
                Split::Train,
                Split::Train.default_count(),
                problem_set_seed(seed_base, b, Split::Train),
            );
            let test = generate_set(
                b,
                Split::Test,
                Split::Test.default_count(),
                problem_set_seed(seed_base, b, Split::Test),
            );
            (train.unwrap_x86(), test.unwrap_x86())
        })
        .collect();

    for (cell_index, cell) in cells.iter_mut().enumerate() {
        for (bench_index, ((train, test), &benchmark)) in
            sets.iter().zip(benchmarks).enumerate()
        {
            let params = SearchParams {
                swap_p: cell.swap_p,
                double_p: cell.double_p,
                copy_p: cell.copy_p,
                period: cell.period,
                max_periods: (spec.budget / cell.period).max(1),
            };
            let outcomes = run_indexed(spec.runs_per_cell as usize, threads, |i| {
                let seed = mix_seed(
                    mix_seed(seed_base, ((cell_index as u64) << 16) | bench_index as u64),
                    i as u64,
                );
                let mut evaluator = X86Evaluator::new(train);
                let record = run_delayed_acceptance(
                    &mut evaluator,
                    benchmark.profile(),
                    &params,
                    seed,
                    spec.budget,
                );
                let perfect = record
                    .simplest_success
                    .as_ref()
                    .map(|s| generalization_test(&s.program, test).0)
                    .unwrap_or(false);
                (record.train_success, perfect)
            });
            cell.train_successes += outcomes.iter().filter(|(t, _)| *t).count() as u64;
            cell.perfect += outcomes.iter().filter(|(_, p)| *p).count() as u64;
        }
    }
    cells.sort_by(|a, b| {
        (b.perfect, b.train_successes).cmp(&(a.perfect, a.train_successes)).then_with(|| {
            (a.swap_p, a.double_p, a.copy_p, a.period)
                .partial_cmp(&(b.swap_p, b.double_p, b.copy_p, b.period))
                .unwrap()
        })
    });
    cells
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut out = String::from("swap_p,double_p,copy_p,period,perfect,train_successes\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.swap_p, c.double_p, c.copy_p, c.period, c.perfect, c.train_successes
        ));
    }
    out
}
