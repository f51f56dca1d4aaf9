//! Program scoring over training and test sets.
//!
//! A program earns one point per fully-correct output integer: the scalar
//! result in R0 if the problem requires one, and each cell of the designated
//! output region. There is no partial credit within an integer; comparison
//! is exact 64-bit equality. Fully-correct programs additionally earn one
//! point per opcode-N occurrence, so simplification pressure exists only
//! after full training correctness.

use std::fmt::Write as _;

use thiserror::Error;

use crate::isa::{self, MachineProfile, Program};
use crate::search::{Evaluation, Evaluator};
use crate::tis100::{self, TisProblem};
use crate::x86::{DecodedProgram, InitError, InputLayout, REG_COUNT};

/// Where a problem's array output lives in memory and what it should be.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedRegion {
    pub offset: usize,
    pub values: Vec<i64>,
}

/// One input/output example with its execution time bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub input: InputLayout,
    pub bound: u64,
    pub expected_scalar: Option<i64>,
    pub expected_region: Option<ExpectedRegion>,
    init_regs: [i64; REG_COUNT],
}

impl ProblemInstance {
    pub fn new(
        input: InputLayout,
        bound: u64,
        expected_scalar: Option<i64>,
        expected_region: Option<ExpectedRegion>,
    ) -> Result<ProblemInstance, InitError> {
        let init_regs = crate::x86::initial_registers(&input)?;
        if let Some(region) = &expected_region {
            let total: usize = input.arrays.iter().map(Vec::len).sum();
            assert!(
                region.offset + region.values.len() <= total,
                "expected region must lie inside the instance memory"
            );
        }
        assert!(
            expected_scalar.is_some() || expected_region.is_some(),
            "instance must expect a scalar or an array region"
        );
        Ok(ProblemInstance { input, bound, expected_scalar, expected_region, init_regs })
    }

    pub fn init_regs(&self) -> [i64; REG_COUNT] {
        self.init_regs
    }

    /// Copy the instance's initial memory image into a scratch buffer.
    pub fn fill_memory(&self, scratch: &mut Vec<i64>) {
        scratch.clear();
        for array in &self.input.arrays {
            scratch.extend_from_slice(array);
        }
    }

    /// Points available from this instance.
    pub fn max_points(&self) -> u64 {
        self.expected_scalar.is_some() as u64
            + self.expected_region.as_ref().map_or(0, |r| r.values.len() as u64)
    }
}

/// A collection of instances for one benchmark split.
#[derive(Clone, Debug)]
pub struct ProblemSet {
    pub benchmark: String,
    pub profile: &'static MachineProfile,
    pub seed: u64,
    pub instances: Vec<ProblemInstance>,
    max_score: u64,
}

impl ProblemSet {
    pub fn new(
        benchmark: impl Into<String>,
        profile: &'static MachineProfile,
        seed: u64,
        instances: Vec<ProblemInstance>,
    ) -> ProblemSet {
        let max_score = instances.iter().map(ProblemInstance::max_points).sum();
        ProblemSet { benchmark: benchmark.into(), profile, seed, instances, max_score }
    }

    /// Maximum attainable raw score: one point per required integer.
    pub fn max_score(&self) -> u64 {
        self.max_score
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// A program's score on a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Score {
    pub raw: u64,
    pub fully_correct: bool,
    pub with_bonus: u64,
}

/// Run one instance to halt (whatever the reason) and count the points the
/// final state earns.
pub fn score_instance(
    decoded: &DecodedProgram,
    instance: &ProblemInstance,
    scratch: &mut Vec<i64>,
) -> u64 {
    instance.fill_memory(scratch);
    let mut regs = instance.init_regs;
    let _ = decoded.run(&mut regs, scratch, instance.bound);
    let mut points = 0u64;
    if let Some(expected) = instance.expected_scalar {
        points += (regs[0] == expected) as u64;
    }
    if let Some(region) = &instance.expected_region {
        let actual = &scratch[region.offset..region.offset + region.values.len()];
        points += actual.iter().zip(&region.values).filter(|(a, e)| a == e).count() as u64;
    }
    points
}

/// Score a program over a whole set, applying the simplicity bonus when it
/// is fully correct.
pub fn eval_program(program: &Program, set: &ProblemSet) -> Score {
    let decoded = DecodedProgram::decode(program, set.profile);
    let mut scratch = Vec::new();
    let raw: u64 = set.instances.iter().map(|inst| score_instance(&decoded, inst, &mut scratch)).sum();
    let fully_correct = raw == set.max_score && !set.is_empty();
    let with_bonus =
        if fully_correct { raw + program.count_noops(set.profile) as u64 } else { raw };
    Score { raw, fully_correct, with_bonus }
}

/// Test-set generalization: perfect iff every instance is fully correct
/// within its time bound. Returns the fraction of points earned as well.
/// An empty set is vacuously perfect.
pub fn generalization_test(program: &Program, set: &ProblemSet) -> (bool, f64) {
    let decoded = DecodedProgram::decode(program, set.profile);
    let mut scratch = Vec::new();
    let mut raw = 0u64;
    let mut perfect = true;
    for instance in &set.instances {
        let points = score_instance(&decoded, instance, &mut scratch);
        raw += points;
        if points != instance.max_points() {
            perfect = false;
        }
    }
    let fraction = if set.max_score == 0 { 1.0 } else { raw as f64 / set.max_score as f64 };
    (perfect, fraction)
}

/// Reusable evaluator over an x86 problem set; owns the scratch buffers so
/// per-candidate evaluation allocates nothing.
pub struct X86Evaluator<'a> {
    set: &'a ProblemSet,
    decoded: DecodedProgram,
    scratch: Vec<i64>,
}

impl<'a> X86Evaluator<'a> {
    pub fn new(set: &'a ProblemSet) -> X86Evaluator<'a> {
        X86Evaluator { set, decoded: DecodedProgram::empty(), scratch: Vec::new() }
    }
}

impl Evaluator for X86Evaluator<'_> {
    fn evaluate(&mut self, program: &Program) -> Evaluation {
        self.decoded.decode_into(program, self.set.profile);
        let mut raw = 0u64;
        for instance in &self.set.instances {
            raw += score_instance(&self.decoded, instance, &mut self.scratch);
        }
        let success = raw == self.set.max_score && !self.set.is_empty();
        let score =
            if success { raw + program.count_noops(self.set.profile) as u64 } else { raw };
        Evaluation { score, raw, success }
    }
}

/// Evaluator for image puzzles: the raw score is the best match count, full
/// correctness means the target was painted exactly. Tracks the best
/// (size, cycles) pair over solved candidates, cycles minimized at the
/// smallest size seen.
pub struct TisEvaluator<'a> {
    problem: &'a TisProblem,
    profile: &'static MachineProfile,
    decoded: tis100::DecodedTisProgram,
    pub best_solved: Option<(usize, u64)>,
}

impl<'a> TisEvaluator<'a> {
    pub fn new(problem: &'a TisProblem, profile: &'static MachineProfile) -> TisEvaluator<'a> {
        TisEvaluator {
            problem,
            profile,
            decoded: tis100::DecodedTisProgram::empty(),
            best_solved: None,
        }
    }
}

impl Evaluator for TisEvaluator<'_> {
    fn evaluate(&mut self, program: &Program) -> Evaluation {
        self.decoded.decode_into(program, self.profile);
        let out = self.decoded.run(&self.problem.target, self.problem.cycle_bound);
        let raw = out.best_match as u64;
        if out.solved {
            let size = program.effective_size(self.profile);
            let better = match self.best_solved {
                None => true,
                Some((s, c)) => size < s || (size == s && out.cycles_used < c),
            };
            if better {
                self.best_solved = Some((size, out.cycles_used));
            }
        }
        let score =
            if out.solved { raw + program.count_noops(self.profile) as u64 } else { raw };
        Evaluation { score, raw, success: out.solved }
    }
}

#[derive(Debug, Error)]
pub enum SetFormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: bad integer `{token}`")]
    BadInt { line: usize, token: String },
    #[error("unsupported format version `{0}`")]
    BadVersion(String),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("instance {index}: {source}")]
    BadInstance { index: usize, source: InitError },
}

/// Render a problem set in the versioned text format. Integers are decimal
/// and the format round-trips bit-exact.
///
/// ```text
/// problemset v1
/// benchmark: fast-sort
/// profile: x86-mem
/// seed: 42
/// count: 2
///
/// instance 0
/// bound 13
/// array 3 1 2
/// expect-mem 0 : 1 2 3
/// end
/// ```
/// Other instance lines: `scalar <v>` (one per scalar input), `rowsize <m>`
/// for a 2d array, `expect-r0 <v>` for a required scalar result.
pub fn write_problem_set(set: &ProblemSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "problemset v1");
    let _ = writeln!(out, "benchmark: {}", set.benchmark);
    let _ = writeln!(out, "profile: {}", set.profile.name());
    let _ = writeln!(out, "seed: {}", set.seed);
    let _ = writeln!(out, "count: {}", set.instances.len());
    for (i, inst) in set.instances.iter().enumerate() {
        let _ = writeln!(out, "\ninstance {i}");
        let _ = writeln!(out, "bound {}", inst.bound);
        for s in &inst.input.scalars {
            let _ = writeln!(out, "scalar {s}");
        }
        for array in &inst.input.arrays {
            out.push_str("array");
            for v in array {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        if let Some(m) = inst.input.row_size {
            let _ = writeln!(out, "rowsize {m}");
        }
        if let Some(v) = inst.expected_scalar {
            let _ = writeln!(out, "expect-r0 {v}");
        }
        if let Some(region) = &inst.expected_region {
            let _ = write!(out, "expect-mem {} :", region.offset);
            for v in &region.values {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out.push_str("end\n");
    }
    out
}

pub fn read_problem_set(text: &str) -> Result<ProblemSet, SetFormatError> {
    let syntax = |line: usize, msg: &str| SetFormatError::Syntax { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate().peekable();

    let mut header = |prefix: &str| -> Result<String, SetFormatError> {
        for (i, raw) in lines.by_ref() {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            return raw
                .strip_prefix(prefix)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| syntax(i + 1, &format!("expected `{prefix} ...`")));
        }
        Err(syntax(0, &format!("missing `{prefix}` header")))
    };

    let version = header("problemset")?;
    if version != "v1" {
        return Err(SetFormatError::BadVersion(version));
    }
    let benchmark = header("benchmark:")?;
    let profile_name = header("profile:")?;
    let profile = MachineProfile::from_name(&profile_name)
        .ok_or(SetFormatError::UnknownProfile(profile_name))?;
    let seed: u64 = header("seed:")?
        .parse()
        .map_err(|_| syntax(0, "seed must be an unsigned integer"))?;
    let count: usize = header("count:")?
        .parse()
        .map_err(|_| syntax(0, "count must be an unsigned integer"))?;

    let parse_ints = |line: usize, toks: &str| -> Result<Vec<i64>, SetFormatError> {
        toks.split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| SetFormatError::BadInt { line, token: t.to_string() })
            })
            .collect()
    };

    let mut instances = Vec::with_capacity(count);
    let mut current: Option<(InputLayout, Option<u64>, Option<i64>, Option<ExpectedRegion>)> = None;
    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let (key, rest) = raw.split_once(' ').unwrap_or((raw, ""));
        match key {
            "instance" => {
                if current.is_some() {
                    return Err(syntax(line, "nested `instance` without `end`"));
                }
                current = Some((
                    InputLayout { scalars: vec![], arrays: vec![], row_size: None },
                    None,
                    None,
                    None,
                ));
            }
            "bound" | "scalar" | "array" | "rowsize" | "expect-r0" | "expect-mem" | "end" => {
                let (layout, bound, scalar, region) =
                    current.as_mut().ok_or_else(|| syntax(line, "field outside `instance`"))?;
                match key {
                    "bound" => {
                        *bound = Some(rest.trim().parse().map_err(|_| {
                            SetFormatError::BadInt { line, token: rest.trim().to_string() }
                        })?)
                    }
                    "scalar" => layout.scalars.push(
                        rest.trim().parse().map_err(|_| SetFormatError::BadInt {
                            line,
                            token: rest.trim().to_string(),
                        })?,
                    ),
                    "array" => layout.arrays.push(parse_ints(line, rest)?),
                    "rowsize" => {
                        layout.row_size = Some(rest.trim().parse().map_err(|_| {
                            SetFormatError::BadInt { line, token: rest.trim().to_string() }
                        })?)
                    }
                    "expect-r0" => {
                        *scalar = Some(rest.trim().parse().map_err(|_| {
                            SetFormatError::BadInt { line, token: rest.trim().to_string() }
                        })?)
                    }
                    "expect-mem" => {
                        let (offset, values) = rest
                            .split_once(':')
                            .ok_or_else(|| syntax(line, "expect-mem needs `<offset> : <values>`"))?;
                        *region = Some(ExpectedRegion {
                            offset: offset.trim().parse().map_err(|_| {
                                SetFormatError::BadInt { line, token: offset.trim().to_string() }
                            })?,
                            values: parse_ints(line, values)?,
                        });
                    }
                    _ => {
                        let (layout, bound, scalar, region) = current.take().unwrap();
                        let bound =
                            bound.ok_or_else(|| syntax(line, "instance missing `bound`"))?;
                        let index = instances.len();
                        instances.push(
                            ProblemInstance::new(layout, bound, scalar, region)
                                .map_err(|source| SetFormatError::BadInstance { index, source })?,
                        );
                    }
                }
            }
            _ => return Err(syntax(line, &format!("unknown field `{key}`"))),
        }
    }
    if current.is_some() {
        return Err(syntax(0, "unterminated `instance` block"));
    }
    if instances.len() != count {
        return Err(syntax(
            0,
            &format!("header declares {count} instances, found {}", instances.len()),
        ));
    }
    Ok(ProblemSet::new(benchmark, profile, seed, instances))
}

/// Score text used by the `exec` subcommand and tests.
pub fn describe_score(program: &Program, set: &ProblemSet) -> String {
    let score = eval_program(program, set);
    let (perfect, fraction) = generalization_test(program, set);
    format!(
        "benchmark: {}\ninstances: {}\npoints: {} / {}\nfraction: {:.4}\nfully_correct: {}\nperfect: {}\nwith_bonus: {}\nnoops: {}\n",
        set.benchmark,
        set.len(),
        score.raw,
        set.max_score(),
        fraction,
        score.fully_correct,
        perfect,
        score.with_bonus,
        isa::count_noops(program, set.profile),
    )
}
