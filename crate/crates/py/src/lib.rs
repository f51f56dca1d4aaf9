//! Python bindings: expose the program text format, the interpreters, the
//! benchmark generators, and single synthesis runs.
//!
//! Build with `cargo build --release -p loopsynth-py`; the resulting
//! `libloopsynth_py.so` imports as the module `loopsynth_py` (see
//! `python/smoke_test.py` for a loader).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use loopsynth_core::benchmarks::{self, generate_set, Benchmark, GeneratedSet, Split};
use loopsynth_core::harness::{problem_set_seed, run_protocol, Algorithm, ProtocolConfig, ProtocolLevel};
use loopsynth_core::isa::{self, MachineProfile};
use loopsynth_core::rng::rng_from_seed;
use loopsynth_core::scoring::{self, read_problem_set};
use loopsynth_core::tis100;
use loopsynth_core::x86;

fn value_err(msg: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn parse_benchmark(name: &str) -> PyResult<Benchmark> {
    Benchmark::from_name(name).ok_or_else(|| value_err(format!("unknown benchmark `{name}`")))
}

fn parse_split(name: &str) -> PyResult<Split> {
    Split::from_name(name).ok_or_else(|| value_err("split must be 'train' or 'test'"))
}

/// Names of all benchmarks.
#[pyfunction]
fn list_benchmarks() -> Vec<&'static str> {
    benchmarks::ALL.iter().map(|b| b.name()).collect()
}

/// Names of the machine profiles.
#[pyfunction]
fn list_profiles() -> Vec<&'static str> {
    MachineProfile::all().iter().map(|p| p.name()).collect()
}

/// One-line description of a benchmark.
#[pyfunction]
fn describe_benchmark(name: &str) -> PyResult<String> {
    let b = parse_benchmark(name)?;
    Ok(format!("{} [{}]: {}", b.name(), b.profile().name(), b.description()))
}

/// Built-in reference programs: `comb-sort` (x86 subset) or `pattern1-fill`
/// (image machine), in the canonical text format.
#[pyfunction]
fn fixture_program(name: &str) -> PyResult<String> {
    match name {
        "comb-sort" => Ok(benchmarks::comb_sort_text()),
        "pattern1-fill" => Ok(benchmarks::pattern1_fill_text()),
        _ => Err(value_err("fixture must be 'comb-sort' or 'pattern1-fill'")),
    }
}

/// A uniformly random program for a profile, serialized.
#[pyfunction]
fn random_program(profile: &str, seed: u64) -> PyResult<String> {
    let profile = MachineProfile::from_name(profile)
        .ok_or_else(|| value_err(format!("unknown profile `{profile}`")))?;
    let mut rng = rng_from_seed(seed);
    Ok(isa::serialize(&profile.random_program(&mut rng), profile))
}

/// Count of the profile's no-effect opcode in a program text.
#[pyfunction]
fn count_noops(program_text: &str) -> PyResult<usize> {
    let (profile, program) = isa::parse_with_profile(program_text).map_err(value_err)?;
    Ok(program.count_noops(profile))
}

/// Generate a problem-set file (or a target-image grid for the image
/// puzzles) as text.
#[pyfunction]
#[pyo3(signature = (benchmark, split="train", count=None, seed=0))]
fn generate_problems(
    benchmark: &str,
    split: &str,
    count: Option<usize>,
    seed: u64,
) -> PyResult<String> {
    let benchmark = parse_benchmark(benchmark)?;
    let split = parse_split(split)?;
    let count = count.unwrap_or_else(|| split.default_count());
    Ok(match generate_set(benchmark, split, count, seed) {
        GeneratedSet::X86(set) => scoring::write_problem_set(&set),
        GeneratedSet::Tis(problem) => problem.target.render(),
    })
}

/// Score a program against a problem-set text (as produced by
/// `generate_problems`).
#[pyfunction]
fn score_against<'py>(
    py: Python<'py>,
    program_text: &str,
    problems_text: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let (profile, program) = isa::parse_with_profile(program_text).map_err(value_err)?;
    let set = read_problem_set(problems_text).map_err(value_err)?;
    if set.profile.name() != profile.name() {
        return Err(value_err("program and problem set use different profiles"));
    }
    let score = scoring::eval_program(&program, &set);
    let (perfect, fraction) = scoring::generalization_test(&program, &set);
    let out = PyDict::new_bound(py);
    out.set_item("raw", score.raw)?;
    out.set_item("max", set.max_score())?;
    out.set_item("fully_correct", score.fully_correct)?;
    out.set_item("with_bonus", score.with_bonus)?;
    out.set_item("perfect", perfect)?;
    out.set_item("fraction", fraction)?;
    Ok(out)
}

/// Run an x86-subset program on explicit inputs and return the final state.
#[pyfunction]
#[pyo3(signature = (program_text, arrays, scalars=vec![], bound=10_000))]
fn run_x86<'py>(
    py: Python<'py>,
    program_text: &str,
    arrays: Vec<Vec<i64>>,
    scalars: Vec<i64>,
    bound: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (profile, program) = isa::parse_with_profile(program_text).map_err(value_err)?;
    let layout = x86::InputLayout { scalars, arrays, row_size: None };
    let state = x86::init_state(&layout).map_err(value_err)?;
    let (state, halt) = x86::execute(&program, profile, state, bound);
    let out = PyDict::new_bound(py);
    out.set_item("regs", state.regs.to_vec())?;
    out.set_item("memory", state.memory)?;
    out.set_item("halt", format!("{halt:?}"))?;
    out.set_item("loopcount_used", state.loopcount_used)?;
    Ok(out)
}

/// Run an image-machine program against one of the image puzzles.
#[pyfunction]
#[pyo3(signature = (program_text, benchmark="image-pattern-1", cycle_bound=10_000))]
fn run_image<'py>(
    py: Python<'py>,
    program_text: &str,
    benchmark: &str,
    cycle_bound: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (profile, program) = isa::parse_with_profile(program_text).map_err(value_err)?;
    let target = parse_benchmark(benchmark)?
        .target_image()
        .ok_or_else(|| value_err("benchmark is not an image puzzle"))?;
    let result = tis100::execute(&program, profile, &target, cycle_bound);
    let out = PyDict::new_bound(py);
    out.set_item("solved", result.solved)?;
    out.set_item("best_match", result.best_match)?;
    out.set_item("cycles_used", result.cycles_used)?;
    out.set_item("size", program.effective_size(profile))?;
    Ok(out)
}

/// One synthesis run; returns the record as a dict (program texts included).
#[pyfunction]
#[pyo3(signature = (benchmark, seed=0, period=75_000, max_periods=4,
                    algorithm="delayed-acceptance", train_count=200, test_count=2000))]
#[allow(clippy::too_many_arguments)]
fn synthesize<'py>(
    py: Python<'py>,
    benchmark: &str,
    seed: u64,
    period: u64,
    max_periods: u64,
    algorithm: &str,
    train_count: usize,
    test_count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let benchmark = parse_benchmark(benchmark)?;
    let algorithm = Algorithm::from_name(algorithm)
        .ok_or_else(|| value_err("algorithm must be 'delayed-acceptance' or 'basic-hillclimbing'"))?;
    let config = ProtocolConfig {
        seed_base: seed,
        levels: vec![ProtocolLevel { runs: 1, period, max_periods }],
        algorithm,
        train_count,
        test_count,
        extend_for_smallest: false,
        ..Default::default()
    };
    let (report, outcomes) = run_protocol(benchmark, &config);
    let outcome = &outcomes[0];
    let profile = benchmark.profile();
    let out = PyDict::new_bound(py);
    out.set_item("benchmark", benchmark.name())?;
    out.set_item("algorithm", algorithm.name())?;
    out.set_item("seed", seed)?;
    out.set_item("evaluations", outcome.record.total_evaluations)?;
    out.set_item("halt", format!("{:?}", outcome.record.halt))?;
    out.set_item("train_success", outcome.record.train_success)?;
    out.set_item("final_score", outcome.record.final_score)?;
    out.set_item("generalizes", outcome.generalizes)?;
    out.set_item("smallest_size", outcome.smallest_size)?;
    out.set_item(
        "final_program",
        outcome.record.final_program.as_ref().map(|p| isa::serialize(p, profile)),
    )?;
    out.set_item(
        "simplest_program",
        outcome.simplest.as_ref().map(|p| isa::serialize(p, profile)),
    )?;
    if let Some((size, cycles)) = report.tis_best {
        out.set_item("tis_size", size)?;
        out.set_item("tis_cycles", cycles)?;
    }
    Ok(out)
}

/// Seed used for a benchmark's generated split under a protocol seed base.
#[pyfunction]
fn split_seed(seed_base: u64, benchmark: &str, split: &str) -> PyResult<u64> {
    Ok(problem_set_seed(seed_base, parse_benchmark(benchmark)?, parse_split(split)?))
}

#[pymodule]
fn loopsynth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(list_benchmarks, m)?)?;
    m.add_function(wrap_pyfunction!(list_profiles, m)?)?;
    m.add_function(wrap_pyfunction!(describe_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_program, m)?)?;
    m.add_function(wrap_pyfunction!(random_program, m)?)?;
    m.add_function(wrap_pyfunction!(count_noops, m)?)?;
    m.add_function(wrap_pyfunction!(generate_problems, m)?)?;
    m.add_function(wrap_pyfunction!(score_against, m)?)?;
    m.add_function(wrap_pyfunction!(run_x86, m)?)?;
    m.add_function(wrap_pyfunction!(run_image, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(split_seed, m)?)?;
    Ok(())
}
