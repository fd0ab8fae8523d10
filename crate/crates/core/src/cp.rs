//! CP (canonical polyadic) format: sums of outer products of factor vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::perm::Permutation;
use crate::tensor::DenseTensor;

/// A rank-`p` CP decomposition: `p` tuples of `N` factor vectors, the `i`-th
/// tuple contributing the outer product of its vectors. Rank 0 is the zero
/// tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CpDecomposition {
    dims: Vec<usize>,
    /// `factors[i][j]` is the mode-`j` vector of tuple `i`, length `dims[j]`.
    factors: Vec<Vec<Vec<Complex64>>>,
}

impl CpDecomposition {
    pub fn new(dims: Vec<usize>, factors: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("CP order must be positive"));
        }
        if dims.contains(&0) {
            return Err(Error::arg("zero mode dimension"));
        }
        for (i, tuple) in factors.iter().enumerate() {
            if tuple.len() != dims.len() {
                return Err(Error::dim(format!(
                    "tuple {i} has {} vectors, expected {}",
                    tuple.len(),
                    dims.len()
                )));
            }
            for (j, vec) in tuple.iter().enumerate() {
                if vec.len() != dims[j] {
                    return Err(Error::dim(format!(
                        "tuple {i} mode {} has length {}, expected {}",
                        j + 1,
                        vec.len(),
                        dims[j]
                    )));
                }
            }
        }
        Ok(CpDecomposition { dims, factors })
    }

    /// Rank-0 decomposition of the zero tensor.
    pub fn zero(dims: Vec<usize>) -> Result<Self> {
        CpDecomposition::new(dims, Vec::new())
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<Vec<Complex64>>] {
        &self.factors
    }

    pub fn is_cubical(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Expands the decomposition into a dense tensor:
    /// `X(k_1..k_N) = sum_i prod_j x_{ij}(k_j)`.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let mut out = DenseTensor::zeros(&self.dims)?;
        for tuple in &self.factors {
            // progressive outer product, row-major
            let mut acc: Vec<Complex64> = tuple[0].clone();
            for vec in &tuple[1..] {
                let mut next = Vec::with_capacity(acc.len() * vec.len());
                for &a in &acc {
                    for &v in vec {
                        next.push(a * v);
                    }
                }
                acc = next;
            }
            let entries: Vec<Complex64> = out
                .entries()
                .iter()
                .zip(&acc)
                .map(|(x, y)| x + y)
                .collect();
            out = DenseTensor::from_entries(&self.dims, entries)?;
        }
        out.check_finite()?;
        Ok(out)
    }

    /// Projects a CP form onto the antisymmetric subspace, producing `p * N!`
    /// tuples: for each input tuple and each permutation `pi`, the factor
    /// vectors are reordered by `pi` and scaled by `sgn(pi)/N!` (the scale is
    /// folded into the first factor). Expanding the result densely equals
    /// antisymmetrizing the dense expansion of the input.
    pub fn antisymmetrize(&self) -> Result<CpDecomposition> {
        if !self.is_cubical() {
            return Err(Error::dim(format!(
                "antisymmetrization requires equal mode dims, got {:?}",
                self.dims
            )));
        }
        let n = self.order();
        let perms = Permutation::all(n)?;
        let scale = 1.0 / perms.len() as f64;
        let mut factors = Vec::with_capacity(self.factors.len() * perms.len());
        for tuple in &self.factors {
            for pi in &perms {
                let mut new_tuple: Vec<Vec<Complex64>> = (0..n)
                    .map(|j| tuple[pi.mapping()[j]].clone())
                    .collect();
                let coeff = Complex64::new(pi.sign() as f64 * scale, 0.0);
                for v in new_tuple[0].iter_mut() {
                    *v *= coeff;
                }
                factors.push(new_tuple);
            }
        }
        CpDecomposition::new(self.dims.clone(), factors)
    }

    /// Embeds a decomposition over `C^n` into `C^dim` on the support of the
    /// multi-index: entry `l` of each factor becomes entry `k_l` of the
    /// output factor, all other entries zero.
    pub fn embed(&self, k: &MultiIndex, dim: usize) -> Result<CpDecomposition> {
        let n = self.order();
        if !self.is_cubical() || self.dims[0] != n {
            return Err(Error::dim(format!(
                "embed expects an order-{n} decomposition with mode dims {n}, got {:?}",
                self.dims
            )));
        }
        if k.order() != n {
            return Err(Error::dim(format!(
                "multi-index order {} does not match decomposition order {n}",
                k.order()
            )));
        }
        k.check_dim(dim)?;
        let factors = self
            .factors
            .iter()
            .map(|tuple| {
                tuple
                    .iter()
                    .map(|vec| {
                        let mut big = vec![Complex64::ZERO; dim];
                        for (l, &v) in vec.iter().enumerate() {
                            big[k.entries()[l] - 1] = v;
                        }
                        big
                    })
                    .collect()
            })
            .collect();
        CpDecomposition::new(vec![dim; n], factors)
    }

    /// Restricts a decomposition over `C^dim` to the entries indexed by the
    /// multi-index, the inverse of [`CpDecomposition::embed`] on the
    /// `k`-support.
    pub fn restrict(&self, k: &MultiIndex) -> Result<CpDecomposition> {
        let n = self.order();
        if k.order() != n {
            return Err(Error::dim(format!(
                "multi-index order {} does not match decomposition order {n}",
                k.order()
            )));
        }
        if !self.is_cubical() {
            return Err(Error::dim("restrict expects equal mode dims"));
        }
        k.check_dim(self.dims[0])?;
        let factors = self
            .factors
            .iter()
            .map(|tuple| {
                tuple
                    .iter()
                    .map(|vec| k.entries().iter().map(|&kl| vec[kl - 1]).collect())
                    .collect()
            })
            .collect();
        CpDecomposition::new(vec![n; n], factors)
    }
}
