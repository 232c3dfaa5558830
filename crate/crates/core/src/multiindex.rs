//! Strictly increasing multi-indices over `{0, …, m−1}`, stored as bitmasks
//! and enumerated in lexicographic order of their sorted tuples.

/// All subsets of size `p` of `{0..m}` in lexicographic order.
pub fn combos(m: usize, p: usize) -> Vec<u32> {
    fn rec(start: usize, m: usize, left: usize, mask: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for i in start..m {
            if m - i < left {
                break;
            }
            rec(i + 1, m, left - 1, mask | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if p <= m {
        rec(0, m, p, 0, &mut out);
    }
    out
}

pub fn binomial(m: usize, p: usize) -> usize {
    if p > m {
        return 0;
    }
    (0..p).fold(1, |acc, i| acc * (m - i) / (i + 1))
}

/// Position of `mask` inside `combos(m, popcount(mask))`.
pub fn position(m: usize, mask: u32) -> usize {
    // Lexicographic rank of a combination.
    let p = mask.count_ones() as usize;
    let elems: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
    let mut rank = 0;
    let mut prev = 0usize;
    for (slot, &e) in elems.iter().enumerate() {
        for skipped in prev..e {
            rank += binomial(m - skipped - 1, p - slot - 1);
        }
        prev = e + 1;
    }
    rank
}

/// Sign of the permutation sorting the concatenation `(I, J)` of two disjoint
/// increasing index sets.
pub fn concat_sign(a: u32, b: u32) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        // elements of a greater than j
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn elements(mask: u32) -> impl Iterator<Item = usize> {
    let mut bits = mask;
    std::iter::from_fn(move || {
        if bits == 0 {
            None
        } else {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        }
    })
}

/// Product term `out[k] += sign · left[i] · right[j]` of a wedge between
/// degree-`p` and degree-`q` components.
#[derive(Debug, Clone, Copy)]
pub struct WedgeTerm {
    pub out: usize,
    pub left: usize,
    pub right: usize,
    pub sign: f64,
}

pub fn wedge_terms(m: usize, p: usize, q: usize) -> Vec<WedgeTerm> {
    let mut terms = Vec::new();
    for (out, &kmask) in combos(m, p + q).iter().enumerate() {
        for (left, &imask) in combos(m, p).iter().enumerate() {
            if imask & !kmask != 0 {
                continue;
            }
            let jmask = kmask & !imask;
            terms.push(WedgeTerm { out, left, right: position(m, jmask), sign: concat_sign(imask, jmask) });
        }
    }
    terms
}
