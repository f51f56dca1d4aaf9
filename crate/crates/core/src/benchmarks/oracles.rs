//! Reference oracles: direct implementations of each benchmark's required
//! output. Arithmetic wraps modulo 2^64 exactly like the interpreter, so
//! expected outputs stay comparable bit-for-bit even when inputs are large.

pub fn cube_elements(a: &[i64]) -> Vec<i64> {
    a.iter().map(|&x| x.wrapping_mul(x).wrapping_mul(x)).collect()
}

pub fn fourth_power(a: &[i64]) -> Vec<i64> {
    a.iter()
        .map(|&x| {
            let sq = x.wrapping_mul(x);
            sq.wrapping_mul(sq)
        })
        .collect()
}

pub fn sum_sq_of_elem(a: &[i64]) -> i64 {
    a.iter().fold(0i64, |acc, &x| acc.wrapping_add(x.wrapping_mul(x)))
}

pub fn prod_sq_of_elem(a: &[i64]) -> i64 {
    a.iter().fold(1i64, |acc, &x| acc.wrapping_mul(x.wrapping_mul(x)))
}

pub fn sum_abs(a: &[i64]) -> i64 {
    a.iter().fold(0i64, |acc, &x| acc.wrapping_add(x.wrapping_abs()))
}

pub fn negative_to_zero(a: &[i64]) -> Vec<i64> {
    a.iter().map(|&x| x.max(0)).collect()
}

pub fn vectors_summed(a: &[i64], b: &[i64]) -> Vec<i64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x.wrapping_add(y)).collect()
}

/// Largest index holding zero; the generator guarantees one exists.
pub fn last_index_of_zero(a: &[i64]) -> Option<i64> {
    a.iter().rposition(|&x| x == 0).map(|i| i as i64)
}

pub fn count_odds(a: &[i64]) -> i64 {
    a.iter().filter(|&&x| x & 1 != 0).count() as i64
}

pub fn mirror_image(a: &[i64], b: &[i64]) -> i64 {
    let mirrored = a.len() == b.len() && a.iter().zip(b.iter().rev()).all(|(x, y)| x == y);
    mirrored as i64
}

pub fn sum_of_squares(x: i64) -> i64 {
    (1..=x).fold(0i64, |acc, i| acc.wrapping_add(i.wrapping_mul(i)))
}

/// Steps to reach 1, counting each halving and each 3x+1 as one step.
pub fn collatz_steps(mut x: i64) -> i64 {
    assert!(x >= 1);
    let mut steps = 0;
    while x != 1 {
        x = if x % 2 == 0 { x / 2 } else { 3 * x + 1 };
        steps += 1;
    }
    steps
}

/// Index of `x` in the sorted array `a`; the generator keeps elements
/// distinct so the answer is unique.
pub fn binary_search(x: i64, a: &[i64]) -> Option<i64> {
    a.binary_search(&x).ok().map(|i| i as i64)
}

pub fn integer_sqrt(x: i64) -> i64 {
    assert!(x >= 0);
    let x = x as u64;
    let mut r = (x as f64).sqrt() as u64;
    while r > 0 && r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r as i64
}

pub fn merge(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn sorted(a: &[i64]) -> Vec<i64> {
    let mut out = a.to_vec();
    out.sort_unstable();
    out
}

/// Longest-path layering of a DAG given as a row-major v*v edge matrix
/// (`edges[j*v + i] = 1` means an edge j -> i): b[i] is the smallest L >= 0
/// such that b[j] < L for every predecessor j.
pub fn topological_levels(v: usize, edges: &[i64]) -> Vec<i64> {
    debug_assert_eq!(edges.len(), v * v);
    let mut levels = vec![0i64; v];
    // relax repeatedly; a DAG stabilizes within v passes
    for _ in 0..v {
        let mut changed = false;
        for i in 0..v {
            let mut need = 0i64;
            for j in 0..v {
                if edges[j * v + i] == 1 && levels[j] + 1 > need {
                    need = levels[j] + 1;
                }
            }
            if levels[i] != need {
                levels[i] = need;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    levels
}

/// b[i] = 1 iff column i of the edge matrix is all zero.
pub fn dag_sources(v: usize, edges: &[i64]) -> Vec<i64> {
    (0..v)
        .map(|i| (0..v).all(|j| edges[j * v + i] == 0) as i64)
        .collect()
}
