//! Antisymmetrization of dense tensors and the antisymmetric tensor basis.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::perm::Permutation;
use crate::tensor::DenseTensor;

/// Relative tolerance (against the max-abs entry) at which a tensor is
/// accepted as antisymmetric. Two orders above the accumulation error of the
/// signed permutation sums at order <= 8.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Applies the signed average over all index permutations:
/// `out(k_1..k_N) = (1/N!) sum_pi sgn(pi) X(k_pi(1), ..., k_pi(N))`.
///
/// Requires equal mode dimensions. The output is antisymmetric to machine
/// precision; for `K < N` it is the zero tensor.
pub fn antisymmetrize(x: &DenseTensor) -> Result<DenseTensor> {
    if !x.is_cubical() {
        return Err(Error::dim(format!(
            "antisymmetrize requires equal mode dims, got {:?}",
            x.dims()
        )));
    }
    let n = x.order();
    let perms = Permutation::all(n)?;
    let scale = 1.0 / perms.len() as f64;
    let mut out = DenseTensor::zeros(x.dims())?;
    for index in x.indices() {
        let mut acc = Complex64::ZERO;
        for pi in &perms {
            let permuted = pi.gather(&index);
            acc += Complex64::new(pi.sign() as f64, 0.0) * x.get(&permuted)?;
        }
        out.set(&index, acc * scale)?;
    }
    out.check_finite()?;
    Ok(out)
}

/// Checks antisymmetry up to `tol * max_abs`, returning the worst violating
/// transposition pair on failure. Adjacent transpositions generate the whole
/// symmetric group, so checking them suffices.
pub fn check_antisymmetric(x: &DenseTensor, tol: f64) -> Result<()> {
    if !x.is_cubical() {
        return Err(Error::dim(format!(
            "antisymmetry is defined for equal mode dims, got {:?}",
            x.dims()
        )));
    }
    let n = x.order();
    let threshold = tol * x.max_abs().max(f64::MIN_POSITIVE);
    let mut worst: Option<(Vec<usize>, Vec<usize>, f64)> = None;
    for index in x.indices() {
        for j in 0..n.saturating_sub(1) {
            let mut swapped = index.clone();
            swapped.swap(j, j + 1);
            let violation = (x.get(&index)? + x.get(&swapped)?).norm();
            if violation > threshold
                && worst.as_ref().map(|w| violation > w.2).unwrap_or(true)
            {
                worst = Some((index.clone(), swapped, violation));
            }
        }
    }
    match worst {
        None => Ok(()),
        Some((index, swapped, violation)) => Err(Error::NotAntisymmetric {
            index,
            swapped,
            violation,
            tolerance: threshold,
        }),
    }
}

/// The basis tensor `E_k` of the antisymmetric subspace: `+1` on even
/// permutations of `k`, `-1` on odd ones, `0` elsewhere (`N!` nonzeros).
pub fn basis_tensor(k: &MultiIndex, dim: usize) -> Result<DenseTensor> {
    k.check_dim(dim)?;
    let n = k.order();
    let mut out = DenseTensor::zeros(&vec![dim; n])?;
    for pi in Permutation::all(n)? {
        let index = pi.gather(k.entries());
        out.set(&index, Complex64::new(pi.sign() as f64, 0.0))?;
    }
    Ok(out)
}

/// The determinant tensor: `basis_tensor((1..N), K = N)`.
pub fn determinant_tensor(n: usize) -> Result<DenseTensor> {
    basis_tensor(&MultiIndex::full(n)?, n)
}

/// Expands an antisymmetric tensor in the basis `{E_k}`: returns the
/// coefficient `c_k = X(k_1..k_N)` for every multi-index `k`. The map has
/// exactly `binom(K, N)` entries and `sum_k c_k E_k` reconstructs `X`.
///
/// The input is checked for antisymmetry at [`ANTISYMMETRY_TOL`].
pub fn antisym_expand(x: &DenseTensor) -> Result<BTreeMap<MultiIndex, Complex64>> {
    check_antisymmetric(x, ANTISYMMETRY_TOL)?;
    let n = x.order();
    let dim = x.dims()[0];
    let mut map = BTreeMap::new();
    for k in MultiIndex::enumerate(n, dim) {
        let c = x.get(k.entries())?;
        map.insert(k, c);
    }
    Ok(map)
}

/// Zeroes every entry having any coordinate outside the index set of `k`.
/// For antisymmetric `X` the result equals `c_k * E_k`.
pub fn support_restrict(x: &DenseTensor, k: &MultiIndex) -> Result<DenseTensor> {
    if !x.is_cubical() {
        return Err(Error::dim("support_restrict requires equal mode dims"));
    }
    k.check_dim(x.dims()[0])?;
    let mut out = DenseTensor::zeros(x.dims())?;
    for index in x.indices() {
        if index.iter().all(|&c| k.contains(c)) {
            out.set(&index, x.get(&index)?)?;
        }
    }
    Ok(out)
}
