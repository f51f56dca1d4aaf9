//! The benchmark catalog: per-benchmark profiles, input shapes, reference
//! oracles, instance generators, and time-bound formulas.
//!
//! Time bounds follow one rule: `floor(f(n) + 1)` where `n` is the total
//! input size (arrays plus any preallocated output space) and every `lg`
//! is taken as `lg(n+1)`. The image puzzles use a flat 10000-cycle budget.

pub mod generate;
pub mod oracles;

use crate::isa::{self, MachineProfile, Program, TIS_P1999, TIS_P21, TIS_P401, X86_MEM, X86_SCALAR};
use crate::tis100::{TargetImage, TisProblem};
use crate::x86;

pub use generate::{generate_set, GeneratedSet};

/// Train/test split; a few benchmarks use different sizes or bounds per side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn from_name(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }

    /// Default instance counts: 200 training and 2000 test examples.
    pub fn default_count(&self) -> usize {
        match self {
            Split::Train => 200,
            Split::Test => 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Benchmark {
    CubeElements,
    FourthPower,
    SumSqOfElem,
    ProdSqOfElem,
    SumAbs,
    NegativeToZero,
    VectorsSummed,
    LastIndexOfZero,
    CountOdds,
    MirrorImage,
    SumOfSquares,
    CollatzNumbers,
    BinarySearch,
    IntegerSqrt,
    Merge,
    SlowSort,
    FastSort,
    TopologicalSort,
    DagSources,
    ImageTestPattern1,
    ImageTestPattern2,
}

use Benchmark::*;

pub static ALL: [Benchmark; 21] = [
    CubeElements,
    FourthPower,
    SumSqOfElem,
    ProdSqOfElem,
    SumAbs,
    NegativeToZero,
    VectorsSummed,
    LastIndexOfZero,
    CountOdds,
    MirrorImage,
    SumOfSquares,
    CollatzNumbers,
    BinarySearch,
    IntegerSqrt,
    Merge,
    SlowSort,
    FastSort,
    TopologicalSort,
    DagSources,
    ImageTestPattern1,
    ImageTestPattern2,
];

/// The five warm-up array problems used for parameter grid search.
pub static PRELIMINARY: [Benchmark; 5] =
    [CubeElements, FourthPower, SumSqOfElem, ProdSqOfElem, SumAbs];

impl Benchmark {
    pub fn name(&self) -> &'static str {
        match self {
            CubeElements => "cube-elements",
            FourthPower => "fourth-power",
            SumSqOfElem => "sum-sq-of-elem",
            ProdSqOfElem => "prod-sq-of-elem",
            SumAbs => "sum-abs",
            NegativeToZero => "negative-to-zero",
            VectorsSummed => "vectors-summed",
            LastIndexOfZero => "last-index-of-zero",
            CountOdds => "count-odds",
            MirrorImage => "mirror-image",
            SumOfSquares => "sum-of-squares",
            CollatzNumbers => "collatz-numbers",
            BinarySearch => "binary-search",
            IntegerSqrt => "integer-sqrt",
            Merge => "merge",
            SlowSort => "slow-sort",
            FastSort => "fast-sort",
            TopologicalSort => "topological-sort",
            DagSources => "dag-sources",
            ImageTestPattern1 => "image-pattern-1",
            ImageTestPattern2 => "image-pattern-2",
        }
    }

    pub fn from_name(name: &str) -> Option<Benchmark> {
        ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn description(&self) -> &'static str {
        match self {
            CubeElements => "cube each element of a (in place)",
            FourthPower => "raise each element of a to the 4th power (in place)",
            SumSqOfElem => "return the sum of a[i]^2",
            ProdSqOfElem => "return the product of a[i]^2",
            SumAbs => "return the sum of |a[i]|",
            NegativeToZero => "b[i] = max(a[i], 0)",
            VectorsSummed => "c[i] = a[i] + b[i]",
            LastIndexOfZero => "return the largest i with a[i] = 0",
            CountOdds => "return the count of odd a[i]",
            MirrorImage => "return 1 iff a is the reverse of b",
            SumOfSquares => "given x, return 1^2 + 2^2 + ... + x^2",
            CollatzNumbers => "return the number of Collatz steps from x to 1",
            BinarySearch => "given x and sorted a, return i with a[i] = x",
            IntegerSqrt => "given x >= 0, return floor(sqrt(x))",
            Merge => "merge sorted a and b into sorted c",
            SlowSort => "sort a ascending in place, quadratic time allowed",
            FastSort => "sort a ascending in place within a subquadratic bound",
            TopologicalSort => {
                "set b[i] to the smallest L >= 0 with b[j] < L for every edge j->i"
            }
            DagSources => "b[i] = 1 iff vertex i has no incoming edge",
            ImageTestPattern1 => "paint the 30x18 image solid color 3",
            ImageTestPattern2 => "paint a checkerboard: color 3 where x+y is even",
        }
    }

    /// True for the image puzzles, which score against a target image
    /// instead of a problem set.
    pub fn is_image(&self) -> bool {
        matches!(self, ImageTestPattern1 | ImageTestPattern2)
    }

    /// The profile this benchmark searches in. Scalar-input problems have no
    /// memory block (P=10); the image puzzles default to the operand range
    /// they were solved with.
    pub fn profile(&self) -> &'static MachineProfile {
        match self {
            SumOfSquares | CollatzNumbers | IntegerSqrt => &X86_SCALAR,
            ImageTestPattern1 => &TIS_P1999,
            ImageTestPattern2 => &TIS_P401,
            _ => &X86_MEM,
        }
    }

    /// Execution bound for an instance of size `n` (for the scalar-bounded
    /// problems `n` is the input value itself).
    pub fn time_bound(&self, n: u64, split: Split) -> u64 {
        let nf = n as f64;
        let f = match self {
            CubeElements | FourthPower | SumSqOfElem | ProdSqOfElem | SumAbs => 2.0 * nf,
            NegativeToZero | VectorsSummed | LastIndexOfZero | CountOdds | MirrorImage
            | SumOfSquares | CollatzNumbers => 300.0,
            BinarySearch | IntegerSqrt => 2.0 * ((n + 1) as f64).log2(),
            Merge | TopologicalSort | DagSources => 2.0 * nf,
            SlowSort => 2.0 * nf * nf,
            FastSort => match split {
                Split::Train => 2.0 * nf * ((n + 1) as f64).log2(),
                Split::Test => nf.powf(5.0 / 3.0),
            },
            ImageTestPattern1 | ImageTestPattern2 => return 10_000,
        };
        (f + 1.0) as u64
    }

    /// Target image for the image puzzles.
    pub fn target_image(&self) -> Option<TargetImage> {
        match self {
            ImageTestPattern1 => Some(TargetImage::from_fn(|_, _| 3)),
            ImageTestPattern2 => {
                Some(TargetImage::from_fn(|x, y| if (x + y) % 2 == 0 { 3 } else { 0 }))
            }
            _ => None,
        }
    }

    pub fn tis_problem(&self) -> Option<TisProblem> {
        self.target_image().map(|target| TisProblem { target, cycle_bound: 10_000 })
    }
}

/// A comb sort in the x86 subset, transcribed so every jump target lands on
/// an even slot (targets are `2 * operand` here). R1 holds n-1, R2 holds n;
/// R3 is the pass index, R0 the gapped partner, R4 scratch. Each pass
/// shrinks the gap by 3/4 and compares mem[R3] with mem[R0] = mem[R3+gap+1];
/// the program never exits on its own and sorts within its loopcount budget.
pub fn comb_sort_program() -> Program {
    let pairs: &[(u8, u16)] = &[
        (x86::OP_ARG, 3),   //  0:             dest R3 (pad keeps scope)
        (x86::OP_ARG, 3),   //  1:             dest R3
        (x86::OP_MOV, 12),  //  2: A: R3 := 0
        (x86::OP_ARG, 2),   //  3:             dest R2
        (x86::OP_IMUL, 15), //  4:    R2 *= 3
        (x86::OP_SHR, 14),  //  5:    R2 >>= 2 (gap := 3*gap/4)
        (x86::OP_ARG, 0),   //  6:             dest R0
        (x86::OP_MOV, 2),   //  7:    R0 := R2
        (x86::OP_ADD, 13),  //  8: B: R0 += 1
        (x86::OP_CMP, 1),   //  9:    flags(R0 - R1)
        (x86::OP_JG, 1),    // 10:    pass done -> A (slot 2)
        (x86::OP_ARG, 4),   // 11:             dest R4
        (x86::OP_MOV, 6),   // 12:    R4 := mem[R0]
        (x86::OP_SUB, 9),   // 13:    R4 -= mem[R3], flags
        (x86::OP_JG, 10),   // 14:    already ordered -> C (slot 20)
        (x86::OP_ARG, 4),   // 15:             pad (scope empty)
        (x86::OP_ARG, 6),   // 16:             dest mem[R0]
        (x86::OP_MOV, 9),   // 17:    mem[R0] := mem[R3]
        (x86::OP_ARG, 9),   // 18:             dest mem[R3]
        (x86::OP_ADD, 4),   // 19:    mem[R3] += R4 (completes the swap)
        (x86::OP_INC, 3),   // 20: C: R3 += 1
        (x86::OP_JNZ, 4),   // 21:    next pair -> B (slot 8)
    ];
    let mut insns: Vec<_> =
        pairs.iter().map(|&(op, arg)| X86_MEM.instruction(op, arg).unwrap()).collect();
    while insns.len() < X86_MEM.program_len {
        insns.push(X86_MEM.instruction(x86::OP_ARG, 0).unwrap());
    }
    Program::new(insns, &X86_MEM).unwrap()
}

pub fn comb_sort_text() -> String {
    isa::serialize(&comb_sort_program(), &X86_MEM)
}

/// Known-correct row-filling solution for the solid color-3 image, written
/// in the P=21 profile. BAK carries the row index: each pass sends X=0 and
/// Y=row, paints 30 pixels of color 3, resets the imager, and wraps. Used
/// as the reference oracle for the simulator, not as a synthesis result.
pub fn pattern1_fill_program() -> Program {
    use crate::tis100::*;
    let pairs: &[(u8, u16)] = &[
        (OP_MOVD, 10), //  0: X := 0
        (OP_SWP, 0),   //  1: ACC := row
        (OP_MOVAD, 0), //  2: Y := row
        (OP_ADD, 11),  //  3: row + 1
        (OP_SAV, 0),   //  4: BAK := row + 1
        (OP_MOVA, 20), //  5: ACC := 10
        (OP_ADD, 20),  //  6: ACC := 20
        (OP_ADD, 20),  //  7: ACC := 30 (paint counter)
        (OP_MOVD, 13), //  8: paint color 3
        (OP_SUB, 11),  //  9: counter -= 1
        (OP_JNZ, 12),  // 10: -> slot 8 until 30 paints
        (OP_MOVD, 9),  // 11: send -1, reset imager
        (OP_JMP, 0),   // 12: next row
        (OP_NOP, 0),   // 13:
        (OP_NOP, 0),   // 14:
    ];
    let insns: Vec<_> =
        pairs.iter().map(|&(op, arg)| TIS_P21.instruction(op, arg).unwrap()).collect();
    Program::new(insns, &TIS_P21).unwrap()
}

pub fn pattern1_fill_text() -> String {
    isa::serialize(&pattern1_fill_program(), &TIS_P21)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tis100;
    use crate::x86::{execute, X86State};

    #[test]
    fn names_roundtrip() {
        for b in ALL {
            assert_eq!(Benchmark::from_name(b.name()), Some(b));
        }
        assert_eq!(Benchmark::from_name("no-such"), None);
    }

    #[test]
    fn bound_formula_examples() {
        // hand-checked values of floor(f(n) + 1) with lg(n+1)
        assert_eq!(CubeElements.time_bound(3, Split::Train), 7);
        assert_eq!(CountOdds.time_bound(50, Split::Train), 301);
        assert_eq!(FastSort.time_bound(3, Split::Train), 13);
        assert_eq!(FastSort.time_bound(100, Split::Train), 1332);
        assert_eq!(FastSort.time_bound(100, Split::Test), 2155);
        assert_eq!(BinarySearch.time_bound(10, Split::Train), 7);
        assert_eq!(SlowSort.time_bound(10, Split::Train), 201);
        assert_eq!(ImageTestPattern1.time_bound(0, Split::Train), 10_000);
    }

    #[test]
    fn comb_sort_counts() {
        let p = comb_sort_program();
        assert_eq!(p.count_noops(&X86_MEM), 18);
        assert_eq!(p.effective_size(&X86_MEM), 14);
    }

    #[test]
    fn comb_sort_sorts_small_array() {
        let p = comb_sort_program();
        let layout = crate::x86::InputLayout {
            scalars: vec![],
            arrays: vec![vec![3, 1, 2]],
            row_size: None,
        };
        let state = crate::x86::init_state(&layout).unwrap();
        assert_eq!(state.regs[1], 2, "R1 = last index");
        assert_eq!(state.regs[2], 3, "R2 = n");
        let bound = FastSort.time_bound(3, Split::Train);
        assert_eq!(bound, 13);
        let (final_state, halt) = execute(&p, &X86_MEM, state, bound);
        assert_eq!(final_state.memory, vec![1, 2, 3]);
        assert_eq!(halt, crate::x86::HaltReason::LoopcountExceeded);
    }

    #[test]
    fn comb_sort_text_parses_back() {
        let text = comb_sort_text();
        let (profile, program) = isa::parse_with_profile(&text).unwrap();
        assert_eq!(profile.name(), "x86-mem");
        assert_eq!(program, comb_sort_program());
    }

    #[test]
    fn pattern1_reference_solves_target() {
        let problem = ImageTestPattern1.tis_problem().unwrap();
        let out = tis100::execute(&pattern1_fill_program(), &TIS_P21, &problem.target, 10_000);
        assert!(out.solved, "reference fill must paint the full target");
        assert_eq!(out.best_match, 540);
        assert!(out.cycles_used <= 10_000, "cycles: {}", out.cycles_used);
    }

    #[test]
    fn checkerboard_target_shape() {
        let img = ImageTestPattern2.target_image().unwrap();
        assert_eq!(img.pixel(0, 0), 3);
        assert_eq!(img.pixel(1, 0), 0);
        assert_eq!(img.pixel(1, 1), 3);
        let threes = img.pixels().iter().filter(|&&c| c == 3).count();
        assert_eq!(threes, 270);
    }

    #[test]
    fn fast_sort_random_arrays_within_train_bound() {
        // quick version of the golden check: 60 arrays at the train bound
        let p = comb_sort_program();
        let mut rng = crate::rng::rng_from_seed(41);
        for _ in 0..60 {
            let n = rand::Rng::gen_range(&mut rng, 1..=60usize);
            let array: Vec<i64> = (0..n).map(|_| generate::k_bit_value(&mut rng, 63)).collect();
            let mut expected = array.clone();
            expected.sort_unstable();
            let layout = crate::x86::InputLayout {
                scalars: vec![],
                arrays: vec![array],
                row_size: None,
            };
            let bound = FastSort.time_bound(n as u64, Split::Train);
            let state = crate::x86::init_state(&layout).unwrap();
            let (final_state, _) = execute(&p, &X86_MEM, state, bound);
            assert_eq!(final_state.memory, expected, "failed at n={n}");
        }
    }

    #[test]
    fn x86_state_is_reusable_for_exec() {
        // exercises the public state constructor alongside the layout path
        let state = X86State::new([0; 6], vec![1, 2, 3]);
        assert_eq!(state.memory.len(), 3);
    }
}
