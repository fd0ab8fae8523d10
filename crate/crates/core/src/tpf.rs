//! Tensor product functions over a finite function basis.
//!
//! A TPF `f = sum_i psi_i1 (x) ... (x) psi_iN` with every `psi_ij` in the
//! span of `K` basis functions is identified with an order-`N` coefficient
//! tensor; the TPF rank in that basis equals the CP rank of the tensor. This
//! module realizes the correspondence in both directions, function-level
//! antisymmetrization, and the Slater construction.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::antisym::antisymmetrize;
use crate::cp::CpDecomposition;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::tensor::DenseTensor;

type BasisFn = dyn Fn(usize, f64) -> Complex64 + Send + Sync;

/// Domain descriptor for a 1-block function basis.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    Abstract(String),
}

/// A finite basis `{phi_1, ..., phi_K}` given by an evaluation callable.
/// Orthonormality is never assumed; independence can be checked with
/// [`gram_independence_check`].
#[derive(Clone)]
pub struct FunctionBasis {
    size: usize,
    domain: Domain,
    eval: Arc<BasisFn>,
}

impl std::fmt::Debug for FunctionBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionBasis")
            .field("size", &self.size)
            .field("domain", &self.domain)
            .finish()
    }
}

impl FunctionBasis {
    pub fn new<F>(size: usize, domain: Domain, eval: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64 + Send + Sync + 'static,
    {
        if size < 1 {
            return Err(Error::arg("basis must contain at least one function"));
        }
        Ok(FunctionBasis {
            size,
            domain,
            eval: Arc::new(eval),
        })
    }

    /// The monomial basis `{1, x, x^2, ...}` on an interval.
    pub fn monomials(size: usize, a: f64, b: f64) -> Result<Self> {
        FunctionBasis::new(size, Domain::Interval(a, b), |k, x| {
            Complex64::new(x.powi(k as i32 - 1), 0.0)
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Evaluates `phi_k` (1-based) at a point.
    pub fn evaluate(&self, k: usize, x: f64) -> Result<Complex64> {
        if k < 1 || k > self.size {
            return Err(Error::arg(format!(
                "basis index {k} out of range 1..={}",
                self.size
            )));
        }
        Ok((self.eval)(k, x))
    }

    /// Fixed-seed uniform draws over the domain interval.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let (a, b) = match self.domain {
            Domain::Interval(a, b) => (a, b),
            Domain::Abstract(_) => {
                return Err(Error::arg("cannot sample an abstract domain"));
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count).map(|_| rng.random_range(a..b)).collect())
    }

    /// N-tuples of domain samples.
    pub fn sample_tuples(&self, count: usize, order: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let flat = self.sample_points(count * order, seed)?;
        Ok(flat.chunks(order).map(|c| c.to_vec()).collect())
    }
}

/// A TPF over a finite basis, represented by coefficients: either a CP form
/// (tuples of coefficient vectors, one per separable term) or a dense
/// coefficient tensor, or both. When both are present they agree within
/// 1e-12.
#[derive(Debug, Clone)]
pub struct TpfFunction {
    order: usize,
    basis: FunctionBasis,
    cp: Option<CpDecomposition>,
    dense: Option<DenseTensor>,
}

impl TpfFunction {
    pub fn from_cp(basis: FunctionBasis, cp: CpDecomposition) -> Result<Self> {
        if cp.dims().iter().any(|&d| d != basis.size()) {
            return Err(Error::dim(format!(
                "CP mode dims {:?} must equal the basis size {}",
                cp.dims(),
                basis.size()
            )));
        }
        Ok(TpfFunction {
            order: cp.order(),
            basis,
            cp: Some(cp),
            dense: None,
        })
    }

    pub fn from_dense(basis: FunctionBasis, dense: DenseTensor) -> Result<Self> {
        if dense.dims().iter().any(|&d| d != basis.size()) {
            return Err(Error::dim(format!(
                "tensor dims {:?} must equal the basis size {}",
                dense.dims(),
                basis.size()
            )));
        }
        Ok(TpfFunction {
            order: dense.order(),
            basis,
            cp: None,
            dense: Some(dense),
        })
    }

    /// Attaches both representations, validating that they agree.
    pub fn with_both(basis: FunctionBasis, cp: CpDecomposition, dense: DenseTensor) -> Result<Self> {
        let diff = cp.to_dense()?.max_abs_diff(&dense)?;
        if diff > 1e-12 {
            return Err(Error::Numeric(format!(
                "CP and dense representations disagree by {diff:.3e}"
            )));
        }
        let mut f = TpfFunction::from_cp(basis, cp)?;
        f.dense = Some(dense);
        Ok(f)
    }

    /// A TPF with random complex coefficients, for experiments and tests.
    pub fn random(basis: FunctionBasis, order: usize, rank: usize, seed: u64) -> Result<Self> {
        let k = basis.size();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors = (0..rank)
            .map(|_| {
                (0..order)
                    .map(|_| {
                        (0..k)
                            .map(|_| {
                                Complex64::new(
                                    rng.random_range(-1.0..1.0),
                                    rng.random_range(-1.0..1.0),
                                )
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let cp = CpDecomposition::new(vec![k; order], factors)?;
        TpfFunction::from_cp(basis, cp)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis(&self) -> &FunctionBasis {
        &self.basis
    }

    pub fn cp(&self) -> Option<&CpDecomposition> {
        self.cp.as_ref()
    }

    pub fn dense(&self) -> Option<&DenseTensor> {
        self.dense.as_ref()
    }

    /// Number of separable terms of the CP representation, when present.
    pub fn rank(&self) -> Option<usize> {
        self.cp.as_ref().map(|cp| cp.rank())
    }

    /// The coefficient tensor `X(k_1..k_N) = sum_i prod_j c_{ij k_j}` of the
    /// CP representation. Errors when only a dense representation is held.
    pub fn to_tensor(&self) -> Result<DenseTensor> {
        match &self.cp {
            Some(cp) => cp.to_dense(),
            None => Err(Error::arg(
                "TPF holds no CP representation; the tensor construction needs one",
            )),
        }
    }

    /// Evaluates the TPF at N-tuples of domain points, using whichever
    /// representation is present (CP preferred).
    pub fn evaluate(&self, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        let k = self.basis.size();
        let mut out = Vec::with_capacity(points.len());
        for point in points {
            if point.len() != self.order {
                return Err(Error::dim(format!(
                    "point has {} coordinates, TPF order is {}",
                    point.len(),
                    self.order
                )));
            }
            // phi values per mode and basis index
            let mut phi = vec![vec![Complex64::ZERO; k]; self.order];
            for (j, &r) in point.iter().enumerate() {
                for kk in 1..=k {
                    phi[j][kk - 1] = self.basis.evaluate(kk, r)?;
                }
            }
            let value = match (&self.cp, &self.dense) {
                (Some(cp), _) => {
                    let mut acc = Complex64::ZERO;
                    for tuple in cp.factors() {
                        let mut prod = Complex64::ONE;
                        for (j, coeffs) in tuple.iter().enumerate() {
                            let psi: Complex64 = coeffs
                                .iter()
                                .zip(&phi[j])
                                .map(|(c, p)| c * p)
                                .sum();
                            prod *= psi;
                        }
                        acc += prod;
                    }
                    acc
                }
                (None, Some(dense)) => {
                    let mut acc = Complex64::ZERO;
                    for index in dense.indices() {
                        let mut prod = dense.get(&index)?;
                        if prod == Complex64::ZERO {
                            continue;
                        }
                        for (j, &kk) in index.iter().enumerate() {
                            prod *= phi[j][kk - 1];
                        }
                        acc += prod;
                    }
                    acc
                }
                (None, None) => unreachable!("constructors guarantee a representation"),
            };
            out.push(value);
        }
        Ok(out)
    }

    /// Function-level antisymmetrization: the coefficient tensor of the
    /// result equals the antisymmetrized coefficient tensor of the input.
    pub fn antisymmetrized(&self) -> Result<TpfFunction> {
        match (&self.cp, &self.dense) {
            (Some(cp), _) => TpfFunction::from_cp(self.basis.clone(), cp.antisymmetrize()?),
            (None, Some(dense)) => {
                TpfFunction::from_dense(self.basis.clone(), antisymmetrize(dense)?)
            }
            (None, None) => unreachable!(),
        }
    }

    /// TPF text format: header `tpf N K p`, then `p * N` lines of `K`
    /// `re im` coefficient pairs (term-major, mode-minor).
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let cp = self.cp.as_ref().ok_or_else(|| {
            Error::arg("TPF file format stores the CP representation; none present")
        })?;
        writeln!(
            w,
            "tpf {} {} {}",
            self.order,
            self.basis.size(),
            cp.rank()
        )?;
        for tuple in cp.factors() {
            for vec in tuple {
                let mut first = true;
                for z in vec {
                    if !first {
                        write!(w, " ")?;
                    }
                    write!(w, "{:.17e} {:.17e}", z.re, z.im)?;
                    first = false;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    /// Reads the TPF text format against a caller-supplied basis whose size
    /// must match the header.
    pub fn read_text<R: BufRead>(r: R, basis: FunctionBasis) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty tpf file"))??;
        let mut tok = header.split_whitespace();
        if tok.next() != Some("tpf") {
            return Err(Error::parse(1, "expected `tpf` header"));
        }
        let parse = |t: Option<&str>, what: &str| -> Result<usize> {
            t.ok_or_else(|| Error::parse(1, format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|_| Error::parse(1, format!("bad {what}")))
        };
        let order = parse(tok.next(), "order")?;
        let k = parse(tok.next(), "basis size")?;
        let rank = parse(tok.next(), "rank")?;
        if k != basis.size() {
            return Err(Error::dim(format!(
                "file basis size {k} does not match supplied basis size {}",
                basis.size()
            )));
        }
        let mut factors = Vec::with_capacity(rank);
        let mut current: Vec<Vec<Complex64>> = Vec::with_capacity(order);
        for (no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(no + 2, format!("bad number `{t}`")))
                })
                .collect::<Result<_>>()?;
            if nums.len() != 2 * k {
                return Err(Error::parse(
                    no + 2,
                    format!("expected {} numbers, got {}", 2 * k, nums.len()),
                ));
            }
            current.push(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
            if current.len() == order {
                factors.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() || factors.len() != rank {
            return Err(Error::parse(
                0,
                format!(
                    "expected {} coefficient lines, found {}",
                    rank * order,
                    factors.len() * order + current.len()
                ),
            ));
        }
        let cp = CpDecomposition::new(vec![k; order], factors)?;
        TpfFunction::from_cp(basis, cp)
    }
}

/// Builds a TPF from a CP decomposition over the basis coefficient space;
/// its TPF rank is at most `cp.rank()`, and converting back with
/// [`TpfFunction::to_tensor`] reproduces the dense expansion exactly.
pub fn tensor_to_tpf(cp: CpDecomposition, basis: FunctionBasis) -> Result<TpfFunction> {
    TpfFunction::from_cp(basis, cp)
}

/// The Slater-determinant TPF of `N` orbitals given by coefficient vectors:
/// `N!` separable terms, term `pi` carrying `sgn(pi)` with mode `j` holding
/// orbital `pi(j)`.
///
/// The result is the unnormalized determinant (no `1/N!` or `1/sqrt(N!)`),
/// so the coefficient tensor of unit orbitals `e_{k_1}, ..., e_{k_N}` is
/// exactly the basis tensor `E_k` with entries of modulus 1.
pub fn slater_tpf(orbitals: &[Vec<Complex64>], basis: FunctionBasis) -> Result<TpfFunction> {
    let n = orbitals.len();
    let k = basis.size();
    if n < 1 {
        return Err(Error::arg("need at least one orbital"));
    }
    if k < n {
        return Err(Error::arg(format!(
            "basis size {k} below orbital count {n}: no nonzero antisymmetric function exists"
        )));
    }
    for (i, orb) in orbitals.iter().enumerate() {
        if orb.len() != k {
            return Err(Error::dim(format!(
                "orbital {i} has {} coefficients, basis size is {k}",
                orb.len()
            )));
        }
    }
    let mut factors = Vec::new();
    for pi in Permutation::all(n)? {
        let mut tuple: Vec<Vec<Complex64>> = (0..n)
            .map(|j| orbitals[pi.mapping()[j]].clone())
            .collect();
        if pi.sign() < 0 {
            for v in tuple[0].iter_mut() {
                *v = -*v;
            }
        }
        factors.push(tuple);
    }
    let cp = CpDecomposition::new(vec![k; n], factors)?;
    TpfFunction::from_cp(basis, cp)
}

/// Linear-independence check for the product functions `Phi_k = (x)_j
/// phi_{k_j}`: builds their evaluation matrix at the sample tuples (one row
/// per sample, one column per multi-index in `{1..K}^N`) and compares the
/// extreme singular values. Requires at least `K^N` samples.
pub fn gram_independence_check(
    basis: &FunctionBasis,
    order: usize,
    samples: &[Vec<f64>],
) -> Result<(f64, bool)> {
    let k = basis.size();
    let cols = k
        .checked_pow(order as u32)
        .ok_or_else(|| Error::arg("K^N overflows"))?;
    if samples.len() < cols {
        return Err(Error::arg(format!(
            "need at least K^N = {cols} sample tuples, got {}",
            samples.len()
        )));
    }
    let mut data = Vec::with_capacity(samples.len() * cols);
    for point in samples {
        if point.len() != order {
            return Err(Error::dim(format!(
                "sample tuple has {} coordinates, expected {order}",
                point.len()
            )));
        }
        let mut phi = vec![vec![Complex64::ZERO; k]; order];
        for (j, &r) in point.iter().enumerate() {
            for kk in 1..=k {
                phi[j][kk - 1] = basis.evaluate(kk, r)?;
            }
        }
        // odometer over {0..K-1}^N, row-major
        let mut index = vec![0usize; order];
        loop {
            let mut prod = Complex64::ONE;
            for (j, &kk) in index.iter().enumerate() {
                prod *= phi[j][kk];
            }
            data.push(prod);
            let mut j = order;
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                index[j] += 1;
                if index[j] < k {
                    break;
                }
                index[j] = 0;
            }
            if index.iter().all(|&v| v == 0) {
                break;
            }
        }
    }
    let matrix = nalgebra::DMatrix::from_row_slice(samples.len(), cols, &data);
    let svd = matrix.svd(false, false);
    let max_sv = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let min_sv = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let independent = min_sv > 1e-8 * max_sv;
    Ok((min_sv, independent))
}
