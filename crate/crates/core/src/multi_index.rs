//! Strictly increasing multi-indices, the index set of the antisymmetric basis.

use crate::error::{Error, Result};

/// A strictly increasing tuple `1 <= k_1 < ... < k_N` of 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    /// Validates strict monotonicity and the 1-based lower bound. The upper
    /// bound is checked against a concrete dimension at the point of use via
    /// [`MultiIndex::check_dim`].
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::arg("multi-index must have at least one entry"));
        }
        if entries[0] < 1 {
            return Err(Error::arg("multi-index entries are 1-based"));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg(format!(
                "multi-index must be strictly increasing, got {entries:?}"
            )));
        }
        Ok(MultiIndex { entries })
    }

    /// The full index `(1, 2, ..., n)`.
    pub fn full(n: usize) -> Result<Self> {
        MultiIndex::new((1..=n).collect())
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let max = *self.entries.last().expect("non-empty");
        if max > dim {
            return Err(Error::arg(format!(
                "multi-index {:?} exceeds dimension {dim}",
                self.entries
            )));
        }
        Ok(())
    }

    pub fn contains(&self, k: usize) -> bool {
        self.entries.binary_search(&k).is_ok()
    }

    /// Enumerates the full multi-index set for the given order and dimension
    /// in lexicographic order. Empty when `dim < order`; the count is always
    /// `binom(dim, order)`.
    pub fn enumerate(order: usize, dim: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if order == 0 || dim < order {
            return out;
        }
        let mut current: Vec<usize> = (1..=order).collect();
        loop {
            out.push(MultiIndex {
                entries: current.clone(),
            });
            // advance to the lexicographic successor
            let mut pos = order;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if current[pos] < dim - (order - 1 - pos) {
                    current[pos] += 1;
                    for p in pos + 1..order {
                        current[p] = current[p - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}
