//! Permutations of `{1..N}` with sign tracking.

use crate::error::{Error, Result};
use crate::MAX_ORDER;

/// A permutation of `{0..n-1}` (0-based internally) together with its sign.
///
/// `mapping[j]` is the image of position `j`. The sign is `+1` for even
/// permutations and `-1` for odd ones and always equals the parity of the
/// mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
    sign: i32,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            mapping: (0..n).collect(),
            sign: 1,
        }
    }

    /// Builds a permutation from a 0-based mapping, computing the sign by
    /// counting inversions.
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::arg(format!(
                    "not a bijection on 0..{n}: {mapping:?}"
                )));
            }
            seen[m] = true;
        }
        let sign = parity_by_inversions(&mapping);
        Ok(Permutation { mapping, sign })
    }

    pub fn order(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn sign(&self) -> i32 {
        self.sign
    }

    /// Gathers `xs` through the permutation: `result[j] = xs[mapping[j]]`.
    pub fn gather<T: Copy>(&self, xs: &[T]) -> Vec<T> {
        debug_assert_eq!(xs.len(), self.mapping.len());
        self.mapping.iter().map(|&m| xs[m]).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0usize; self.mapping.len()];
        for (j, &m) in self.mapping.iter().enumerate() {
            inv[m] = j;
        }
        Permutation {
            mapping: inv,
            sign: self.sign,
        }
    }

    /// Enumerates all permutations of `{0..n-1}` via iterative Heap's
    /// algorithm, tracking the sign incrementally (one transposition per
    /// generated element).
    pub fn all(n: usize) -> Result<Vec<Permutation>> {
        if n == 0 || n > MAX_ORDER {
            return Err(Error::OrderTooLarge {
                order: n,
                max: MAX_ORDER,
            });
        }
        let mut out = Vec::with_capacity((1..=n).product());
        let mut items: Vec<usize> = (0..n).collect();
        let mut sign = 1i32;
        let mut counters = vec![0usize; n];
        out.push(Permutation {
            mapping: items.clone(),
            sign,
        });
        let mut i = 1;
        while i < n {
            if counters[i] < i {
                let j = if i % 2 == 0 { 0 } else { counters[i] };
                items.swap(j, i);
                sign = -sign;
                out.push(Permutation {
                    mapping: items.clone(),
                    sign,
                });
                counters[i] += 1;
                i = 1;
            } else {
                counters[i] = 0;
                i += 1;
            }
        }
        Ok(out)
    }
}

fn parity_by_inversions(mapping: &[usize]) -> i32 {
    let mut inversions = 0usize;
    for i in 0..mapping.len() {
        for j in i + 1..mapping.len() {
            if mapping[i] > mapping[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    #[test]
    fn enumerates_n_factorial_distinct_permutations() {
        for n in 1..=6 {
            let perms = Permutation::all(n).unwrap();
            assert_eq!(perms.len(), factorial(n));
            let mut seen: Vec<&[usize]> = perms.iter().map(|p| p.mapping()).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), factorial(n));
        }
    }

    #[test]
    fn heap_sign_matches_inversion_parity() {
        for n in 1..=7 {
            for p in Permutation::all(n).unwrap() {
                assert_eq!(p.sign(), parity_by_inversions(p.mapping()), "{:?}", p);
            }
        }
    }

    #[test]
    fn signed_sum_over_group_vanishes_for_n_ge_2() {
        for n in 2..=6 {
            let total: i32 = Permutation::all(n).unwrap().iter().map(|p| p.sign()).sum();
            assert_eq!(total, 0);
        }
    }

    #[test]
    fn gather_permutes_positions() {
        let p = Permutation::from_mapping(vec![2, 0, 1]).unwrap();
        assert_eq!(p.gather(&[10, 20, 30]), vec![30, 10, 20]);
        assert_eq!(p.sign(), 1); // (0 1 2) -> (2 0 1) is a 3-cycle, even
    }

    #[test]
    fn inverse_composes_to_identity() {
        for p in Permutation::all(4).unwrap() {
            let inv = p.inverse();
            let roundtrip: Vec<usize> = (0..4).map(|j| p.mapping()[inv.mapping()[j]]).collect();
            assert_eq!(roundtrip, vec![0, 1, 2, 3]);
            assert_eq!(inv.sign(), p.sign());
        }
    }

    #[test]
    fn rejects_non_bijections_and_oversize() {
        assert!(Permutation::from_mapping(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_mapping(vec![0, 3]).is_err());
        assert!(Permutation::all(9).is_err());
        assert!(Permutation::all(0).is_err());
    }
}
