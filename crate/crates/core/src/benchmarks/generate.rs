//! Instance generators.
//!
//! Sizes are uniform over each benchmark's range: array problems train up to
//! length 21 (length 6 for the five warm-up problems) and test up to 2001,
//! graphs train up to 9x9 and test up to 201x201, Binary Search and Fast
//! Sort train up to 1001 and 201 and test up to 100,001. Each instance of
//! the adapted benchmarks picks one k in [1,63] and draws its values with k
//! bits; the warm-up problems use up to 31 bits and a random sign; locally
//! regenerated established benchmarks follow their published value ranges
//! (elements in [-1000, 1000], or [-50, 50] for the zero-seeking problem).
//! For extrapolation benchmarks the first test instance is pinned at the
//! maximum size, so every test set contains an instance larger than anything
//! seen in training.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{oracles, Benchmark, Split};
use crate::rng::{rng_from_seed, SearchRng};
use crate::scoring::{ExpectedRegion, ProblemInstance, ProblemSet};
use crate::tis100::TisProblem;
use crate::x86::InputLayout;

/// Uniform value with `k` random bits, i.e. in `[0, 2^k)`.
pub fn k_bit_value(rng: &mut SearchRng, k: u32) -> i64 {
    debug_assert!((1..=63).contains(&k));
    (rng.gen::<u64>() >> (64 - k)) as i64
}

/// Element range of the established benchmark suite's published instances;
/// the zero-seeking problem uses [-50, 50] instead.
fn established_value(rng: &mut SearchRng) -> i64 {
    rng.gen_range(-1000..=1000)
}

fn signed_k_bit(rng: &mut SearchRng, k: u32) -> i64 {
    let v = k_bit_value(rng, k);
    if rng.gen::<bool>() {
        v
    } else {
        v.wrapping_neg()
    }
}

/// A problem set for search, or the target image for the TIS-100 puzzles.
#[derive(Clone, Debug)]
pub enum GeneratedSet {
    X86(ProblemSet),
    Tis(TisProblem),
}

impl GeneratedSet {
    pub fn as_x86(&self) -> Option<&ProblemSet> {
        match self {
            GeneratedSet::X86(set) => Some(set),
            GeneratedSet::Tis(_) => None,
        }
    }

    pub fn unwrap_x86(self) -> ProblemSet {
        match self {
            GeneratedSet::X86(set) => set,
            GeneratedSet::Tis(_) => panic!("expected an x86 problem set"),
        }
    }

    pub fn unwrap_tis(self) -> TisProblem {
        match self {
            GeneratedSet::Tis(p) => p,
            GeneratedSet::X86(_) => panic!("expected an image problem"),
        }
    }
}

/// Generate `count` instances for a benchmark split from a seed. Image
/// puzzles ignore `count` and return their fixed target.
pub fn generate_set(benchmark: Benchmark, split: Split, count: usize, seed: u64) -> GeneratedSet {
    if let Some(problem) = benchmark.tis_problem() {
        return GeneratedSet::Tis(problem);
    }
    let mut rng = rng_from_seed(seed);
    let instances =
        (0..count).map(|index| instance(benchmark, split, index, &mut rng)).collect();
    GeneratedSet::X86(ProblemSet::new(benchmark.name(), benchmark.profile(), seed, instances))
}

/// Size ranges per benchmark; `true` pins the first test instance at the
/// maximum (extrapolation benchmarks only).
fn size_spec(benchmark: Benchmark, split: Split) -> (usize, bool) {
    use Benchmark::*;
    match (benchmark, split) {
        (CubeElements | FourthPower | SumSqOfElem | ProdSqOfElem | SumAbs, Split::Train) => {
            (6, false)
        }
        (CubeElements | FourthPower | SumSqOfElem | ProdSqOfElem | SumAbs, Split::Test) => {
            (2001, true)
        }
        (
            NegativeToZero | VectorsSummed | LastIndexOfZero | CountOdds | MirrorImage,
            _,
        ) => (50, false),
        (BinarySearch, Split::Train) => (1001, false),
        (BinarySearch, Split::Test) => (100_001, true),
        (Merge | SlowSort, Split::Train) => (21, false),
        (Merge | SlowSort, Split::Test) => (2001, true),
        (FastSort, Split::Train) => (201, false),
        (FastSort, Split::Test) => (100_001, true),
        (TopologicalSort | DagSources, Split::Train) => (9, false),
        (TopologicalSort | DagSources, Split::Test) => (201, true),
        _ => unreachable!("scalar and image benchmarks have no size range"),
    }
}

fn draw_size(benchmark: Benchmark, split: Split, index: usize, rng: &mut SearchRng) -> usize {
    let (max, pin_first) = size_spec(benchmark, split);
    if pin_first && index == 0 {
        max
    } else {
        rng.gen_range(1..=max)
    }
}

fn in_place(
    benchmark: Benchmark,
    split: Split,
    input: Vec<i64>,
    expected: Vec<i64>,
) -> ProblemInstance {
    let bound = benchmark.time_bound(input.len() as u64, split);
    ProblemInstance::new(
        InputLayout { scalars: vec![], arrays: vec![input], row_size: None },
        bound,
        None,
        Some(ExpectedRegion { offset: 0, values: expected }),
    )
    .unwrap()
}

fn array_to_scalar(
    benchmark: Benchmark,
    split: Split,
    arrays: Vec<Vec<i64>>,
    expected: i64,
) -> ProblemInstance {
    let n: usize = arrays.iter().map(Vec::len).sum();
    let bound = benchmark.time_bound(n as u64, split);
    ProblemInstance::new(
        InputLayout { scalars: vec![], arrays, row_size: None },
        bound,
        Some(expected),
        None,
    )
    .unwrap()
}

fn with_output_array(
    benchmark: Benchmark,
    split: Split,
    inputs: Vec<Vec<i64>>,
    expected: Vec<i64>,
) -> ProblemInstance {
    let offset: usize = inputs.iter().map(Vec::len).sum();
    let mut arrays = inputs;
    arrays.push(vec![0i64; expected.len()]);
    let n: usize = arrays.iter().map(Vec::len).sum();
    let bound = benchmark.time_bound(n as u64, split);
    ProblemInstance::new(
        InputLayout { scalars: vec![], arrays, row_size: None },
        bound,
        None,
        Some(ExpectedRegion { offset, values: expected }),
    )
    .unwrap()
}

/// Sorted values built from non-negative gaps (duplicates allowed).
fn sorted_with_gaps(rng: &mut SearchRng, len: usize, distinct: bool) -> Vec<i64> {
    let k = rng.gen_range(1..=40);
    let mut cur = k_bit_value(rng, 16);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(cur);
        cur += k_bit_value(rng, k) + distinct as i64;
    }
    out
}

/// Random DAG built from a target layering: every level below the maximum
/// is occupied, each vertex above level zero gets one minimal edge from the
/// level below, and extra forward edges are added with a per-instance
/// density.
fn random_dag(rng: &mut SearchRng, v: usize) -> (Vec<i64>, Vec<i64>) {
    let max_level = rng.gen_range(0..v);
    let mut order: Vec<usize> = (0..v).collect();
    order.shuffle(rng);
    let mut levels = vec![0i64; v];
    for (rank, &vertex) in order.iter().enumerate() {
        levels[vertex] =
            if rank <= max_level { rank as i64 } else { rng.gen_range(0..=max_level) as i64 };
    }
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); max_level + 1];
    for (vertex, &level) in levels.iter().enumerate() {
        by_level[level as usize].push(vertex);
    }
    let mut edges = vec![0i64; v * v];
    for i in 0..v {
        let level = levels[i];
        if level > 0 {
            let below = &by_level[level as usize - 1];
            let j = below[rng.gen_range(0..below.len())];
            edges[j * v + i] = 1;
        }
    }
    let density: f64 = rng.gen();
    for j in 0..v {
        for i in 0..v {
            if levels[j] < levels[i] && edges[j * v + i] == 0 && rng.gen::<f64>() < density {
                edges[j * v + i] = 1;
            }
        }
    }
    (edges, levels)
}

fn graph_instance(
    benchmark: Benchmark,
    split: Split,
    v: usize,
    rng: &mut SearchRng,
) -> ProblemInstance {
    let (edges, levels) = random_dag(rng, v);
    let expected = match benchmark {
        Benchmark::TopologicalSort => {
            debug_assert_eq!(oracles::topological_levels(v, &edges), levels);
            oracles::topological_levels(v, &edges)
        }
        _ => oracles::dag_sources(v, &edges),
    };
    let n = v * v + v;
    let bound = benchmark.time_bound(n as u64, split);
    ProblemInstance::new(
        InputLayout { scalars: vec![], arrays: vec![edges, vec![0i64; v]], row_size: Some(v) },
        bound,
        None,
        Some(ExpectedRegion { offset: v * v, values: expected }),
    )
    .unwrap()
}

fn instance(
    benchmark: Benchmark,
    split: Split,
    index: usize,
    rng: &mut SearchRng,
) -> ProblemInstance {
    use Benchmark::*;
    match benchmark {
        CubeElements | FourthPower | SumSqOfElem | ProdSqOfElem | SumAbs => {
            let len = draw_size(benchmark, split, index, rng);
            let k = rng.gen_range(1..=31);
            let a: Vec<i64> = (0..len).map(|_| signed_k_bit(rng, k)).collect();
            match benchmark {
                CubeElements => in_place(benchmark, split, a.clone(), oracles::cube_elements(&a)),
                FourthPower => in_place(benchmark, split, a.clone(), oracles::fourth_power(&a)),
                SumSqOfElem => {
                    let out = oracles::sum_sq_of_elem(&a);
                    array_to_scalar(benchmark, split, vec![a], out)
                }
                ProdSqOfElem => {
                    let out = oracles::prod_sq_of_elem(&a);
                    array_to_scalar(benchmark, split, vec![a], out)
                }
                _ => {
                    let out = oracles::sum_abs(&a);
                    array_to_scalar(benchmark, split, vec![a], out)
                }
            }
        }
        NegativeToZero => {
            let len = draw_size(benchmark, split, index, rng);
            let a: Vec<i64> = (0..len).map(|_| established_value(rng)).collect();
            let expected = oracles::negative_to_zero(&a);
            with_output_array(benchmark, split, vec![a], expected)
        }
        VectorsSummed => {
            let len = draw_size(benchmark, split, index, rng);
            let a: Vec<i64> = (0..len).map(|_| established_value(rng)).collect();
            let b: Vec<i64> = (0..len).map(|_| established_value(rng)).collect();
            let expected = oracles::vectors_summed(&a, &b);
            with_output_array(benchmark, split, vec![a, b], expected)
        }
        LastIndexOfZero => {
            let len = draw_size(benchmark, split, index, rng);
            let mut a: Vec<i64> = (0..len).map(|_| rng.gen_range(-50..=50)).collect();
            if !a.contains(&0) {
                let at = rng.gen_range(0..len);
                a[at] = 0;
            }
            let expected = oracles::last_index_of_zero(&a).expect("a zero is guaranteed");
            array_to_scalar(benchmark, split, vec![a], expected)
        }
        CountOdds => {
            let len = draw_size(benchmark, split, index, rng);
            let a: Vec<i64> = (0..len).map(|_| established_value(rng)).collect();
            let expected = oracles::count_odds(&a);
            array_to_scalar(benchmark, split, vec![a], expected)
        }
        MirrorImage => {
            let len = draw_size(benchmark, split, index, rng);
            let a: Vec<i64> = (0..len).map(|_| established_value(rng)).collect();
            let b: Vec<i64> = match rng.gen_range(0..4u8) {
                0 | 1 => a.iter().rev().copied().collect(),
                2 => {
                    // near miss: mirror with one cell disturbed
                    let mut b: Vec<i64> = a.iter().rev().copied().collect();
                    let at = rng.gen_range(0..len);
                    b[at] = b[at].wrapping_add(1);
                    b
                }
                _ => (0..len).map(|_| established_value(rng)).collect(),
            };
            let expected = oracles::mirror_image(&a, &b);
            array_to_scalar(benchmark, split, vec![a, b], expected)
        }
        SumOfSquares => {
            let x = rng.gen_range(1..=100i64);
            let bound = benchmark.time_bound(x as u64, split);
            ProblemInstance::new(
                InputLayout { scalars: vec![x], arrays: vec![], row_size: None },
                bound,
                Some(oracles::sum_of_squares(x)),
                None,
            )
            .unwrap()
        }
        CollatzNumbers => {
            let x = rng.gen_range(1..=10_000i64);
            let bound = benchmark.time_bound(x as u64, split);
            ProblemInstance::new(
                InputLayout { scalars: vec![x], arrays: vec![], row_size: None },
                bound,
                Some(oracles::collatz_steps(x)),
                None,
            )
            .unwrap()
        }
        BinarySearch => {
            let len = draw_size(benchmark, split, index, rng);
            let a = sorted_with_gaps(rng, len, true);
            let at = rng.gen_range(0..len);
            let x = a[at];
            let expected = oracles::binary_search(x, &a).expect("x is present");
            let bound = benchmark.time_bound(len as u64, split);
            ProblemInstance::new(
                InputLayout { scalars: vec![x], arrays: vec![a], row_size: None },
                bound,
                Some(expected),
                None,
            )
            .unwrap()
        }
        IntegerSqrt => {
            let k = rng.gen_range(1..=63);
            let x = k_bit_value(rng, k);
            let bound = benchmark.time_bound(x as u64, split);
            ProblemInstance::new(
                InputLayout { scalars: vec![x], arrays: vec![], row_size: None },
                bound,
                Some(oracles::integer_sqrt(x)),
                None,
            )
            .unwrap()
        }
        Merge => {
            let total = draw_size(benchmark, split, index, rng);
            let la = rng.gen_range(0..=total);
            let a = sorted_with_gaps(rng, la, false);
            let b = sorted_with_gaps(rng, total - la, false);
            let expected = oracles::merge(&a, &b);
            with_output_array(benchmark, split, vec![a, b], expected)
        }
        SlowSort | FastSort => {
            let len = draw_size(benchmark, split, index, rng);
            let k = rng.gen_range(1..=63);
            let a: Vec<i64> = (0..len).map(|_| k_bit_value(rng, k)).collect();
            let expected = oracles::sorted(&a);
            in_place(benchmark, split, a, expected)
        }
        TopologicalSort | DagSources => {
            let v = draw_size(benchmark, split, index, rng);
            graph_instance(benchmark, split, v, rng)
        }
        ImageTestPattern1 | ImageTestPattern2 => unreachable!("handled by generate_set"),
    }
}
