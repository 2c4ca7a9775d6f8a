use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{EdError, Result};

/// Default cap on the number of items any enumerator will materialize.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// A coset representative of `𝔖_n / ∏ 𝔖_{s_j}`: position `i` carries block
/// label `labels[i] ∈ {1, …, p+1}`, and label `j` occurs `block_sizes[j-1]`
/// times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockAssignment {
    pub labels: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

impl BlockAssignment {
    /// The sorted assignment `(1^{s_1}, 2^{s_2}, …)`.
    pub fn identity(block_sizes: &[usize]) -> Self {
        let labels = block_sizes
            .iter()
            .enumerate()
            .flat_map(|(j, &s)| std::iter::repeat_n(j + 1, s))
            .collect();
        Self {
            labels,
            block_sizes: block_sizes.to_vec(),
        }
    }

    pub fn is_valid(&self) -> bool {
        let mut counts = vec![0usize; self.block_sizes.len()];
        for &l in &self.labels {
            if l == 0 || l > counts.len() {
                return false;
            }
            counts[l - 1] += 1;
        }
        counts == self.block_sizes
    }
}

impl fmt::Display for BlockAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// `C(m, r)` as an exact 128-bit integer; `None` on overflow.
pub fn binomial(m: usize, r: usize) -> Option<u128> {
    if r > m {
        return Some(0);
    }
    let r = r.min(m - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (m-i) / (i+1) stays integral at every step
        acc = acc.checked_mul((m - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `n! / ∏ s_j!` with `n = Σ s_j`; `None` on overflow.
pub fn multinomial(sizes: &[usize]) -> Option<u128> {
    let mut total = 0usize;
    let mut acc: u128 = 1;
    for &s in sizes {
        total += s;
        acc = acc.checked_mul(binomial(total, s)?)?;
    }
    Some(acc)
}

fn check_cap(count: Option<u128>, cap: u64) -> Result<usize> {
    match count {
        Some(c) if c <= cap as u128 => Ok(c as usize),
        Some(c) => Err(EdError::Overflow { count: c, cap }),
        None => Err(EdError::Overflow {
            count: u128::MAX,
            cap,
        }),
    }
}

pub fn block_assignments(block_sizes: &[usize]) -> Result<Vec<BlockAssignment>> {
    block_assignments_capped(block_sizes, ENUMERATION_CAP)
}

/// All distinct label vectors with the given block sizes, in lexicographic
/// order.
pub fn block_assignments_capped(block_sizes: &[usize], cap: u64) -> Result<Vec<BlockAssignment>> {
    if block_sizes.contains(&0) {
        return Err(EdError::InvalidParameter(
            "block sizes must be positive".into(),
        ));
    }
    let count = check_cap(multinomial(block_sizes), cap)?;
    let mut current = BlockAssignment::identity(block_sizes).labels;
    let mut out = Vec::with_capacity(count);
    loop {
        out.push(BlockAssignment {
            labels: current.clone(),
            block_sizes: block_sizes.to_vec(),
        });
        if !next_permutation(&mut current) {
            break;
        }
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// Advances to the next lexicographic multiset permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

pub fn k_subsets(m: usize, r: usize) -> Result<Vec<Vec<usize>>> {
    k_subsets_capped(m, r, ENUMERATION_CAP)
}

/// All `r`-element subsets of `{1, …, m}` in lexicographic order.
pub fn k_subsets_capped(m: usize, r: usize, cap: u64) -> Result<Vec<Vec<usize>>> {
    if r > m {
        return Err(EdError::InvalidParameter(format!(
            "subset size {r} exceeds ground set size {m}"
        )));
    }
    let count = check_cap(binomial(m, r), cap)?;
    let mut out = Vec::with_capacity(count);
    let mut current: Vec<usize> = (1..=r).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still be incremented
        let Some(i) = (0..r).rev().find(|&i| current[i] < m - r + i + 1) else {
            break;
        };
        current[i] += 1;
        for j in i + 1..r {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

pub fn sign_vectors(k: usize) -> Result<Vec<Vec<i8>>> {
    sign_vectors_capped(k, ENUMERATION_CAP)
}

/// All of `{+1, −1}^k`, lexicographic with `+1` ordered before `−1`.
pub fn sign_vectors_capped(k: usize, cap: u64) -> Result<Vec<Vec<i8>>> {
    let count = check_cap(if k < 128 { Some(1u128 << k) } else { None }, cap)?;
    Ok((0..count)
        .map(|idx| {
            (0..k)
                .map(|pos| {
                    if (idx >> (k - 1 - pos)) & 1 == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect()
        })
        .collect())
}
