//! Alternating-least-squares CP fitting and heuristic rank search.
//!
//! ALS fixes all factor matrices but one and solves the normal equations of
//! the corresponding linear least-squares problem, cycling over modes. A
//! failed fit at rank `p` is *not* a certificate that the rank exceeds `p`
//! (border-rank phenomena make infeasibility undecidable by fitting), so
//! every [`RankReport`] carries `heuristic = true` together with the exact
//! analytic bounds where they apply.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::antisym::{check_antisymmetric, ANTISYMMETRY_TOL};
use crate::bounds::antisym_rank_bounds;
use crate::cp::CpDecomposition;
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Options for [`als_fit`] and [`rank_search`].
#[derive(Debug, Clone)]
pub struct AlsOptions {
    /// Maximum ALS sweeps per restart.
    pub max_sweeps: usize,
    /// Relative residual at which a fit counts as exact for rank estimation.
    pub rel_tol: f64,
    /// Minimum residual improvement per sweep before a restart stalls out.
    pub stall_tol: f64,
    /// Independent random restarts per rank; the lowest final residual wins,
    /// ties broken by the lowest restart index.
    pub restarts: usize,
    /// Base seed; each restart derives its own deterministic stream.
    pub seed: u64,
    /// Ridge term added to the Gram diagonal of every least-squares solve,
    /// guarding rank-deficient Khatri-Rao systems.
    pub regularization: f64,
}

impl Default for AlsOptions {
    fn default() -> Self {
        AlsOptions {
            max_sweeps: 2000,
            rel_tol: 1e-8,
            stall_tol: 1e-12,
            restarts: 16,
            seed: 0,
            regularization: 1e-12,
        }
    }
}

impl AlsOptions {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol <= 0.0 || self.stall_tol <= 0.0 || self.regularization <= 0.0 {
            return Err(Error::arg("ALS tolerances must be positive"));
        }
        if self.restarts < 1 {
            return Err(Error::arg("ALS needs at least one restart"));
        }
        if self.max_sweeps < 1 {
            return Err(Error::arg("ALS needs at least one sweep"));
        }
        Ok(())
    }
}

/// Result of a heuristic rank search.
#[derive(Debug, Clone)]
pub struct RankReport {
    /// Smallest rank whose best residual met `rel_tol`, if any.
    pub estimated_rank: Option<usize>,
    /// Best-of-restarts relative residual per rank tried.
    pub residuals: BTreeMap<usize, f64>,
    /// Restarts executed per rank.
    pub restarts_used: usize,
    /// Analytic lower bound (1 when no antisymmetric bound applies).
    pub lower_bound: u128,
    /// Analytic or trivial upper bound.
    pub upper_bound: u128,
    /// Always true: ALS failure is never a rank certificate.
    pub heuristic: bool,
}

impl RankReport {
    /// CSV block: a comment line with the bounds, then
    /// `rank,best_residual,restarts_used` rows in increasing rank order.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# lower={} upper={} heuristic=true\n",
            self.lower_bound, self.upper_bound
        );
        out.push_str("rank,best_residual,restarts_used\n");
        for (rank, residual) in &self.residuals {
            out.push_str(&format!("{rank},{residual:e},{}\n", self.restarts_used));
        }
        out
    }
}

struct Factors {
    mats: Vec<DMatrix<Complex64>>, // per mode: K_j x p
}

impl Factors {
    fn random(dims: &[usize], rank: usize, rng: &mut ChaCha8Rng) -> Self {
        let normal = StandardNormal;
        let mats = dims
            .iter()
            .map(|&k| {
                DMatrix::from_fn(k, rank, |_, _| {
                    Complex64::new(normal.sample(rng), normal.sample(rng))
                })
            })
            .collect();
        Factors { mats }
    }

    /// Copies a lower-rank decomposition into the leading columns, leaving
    /// the padding columns zero. A zero column stays zero under ALS updates,
    /// which preserves the warm start's residual and guarantees residual
    /// monotonicity of the rank chain.
    fn warm(dims: &[usize], rank: usize, warm: &CpDecomposition) -> Self {
        let mats = dims
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let mut m = DMatrix::from_element(k, rank, Complex64::ZERO);
                for (i, tuple) in warm.factors().iter().enumerate().take(rank) {
                    for (row, &v) in tuple[j].iter().enumerate() {
                        m[(row, i)] = v;
                    }
                }
                m
            })
            .collect();
        Factors { mats }
    }

    fn to_cp(&self, dims: &[usize]) -> Result<CpDecomposition> {
        let rank = self.mats[0].ncols();
        let factors = (0..rank)
            .map(|i| {
                self.mats
                    .iter()
                    .map(|m| m.column(i).iter().copied().collect())
                    .collect()
            })
            .collect();
        CpDecomposition::new(dims.to_vec(), factors)
    }

    /// Relative Frobenius residual against `x` (whose norm is passed in).
    fn residual(&self, x: &DenseTensor, x_norm: f64) -> f64 {
        let rank = self.mats[0].ncols();
        let mut err = 0.0f64;
        for (flat, index) in x.indices().enumerate() {
            let mut approx = Complex64::ZERO;
            for i in 0..rank {
                let mut prod = Complex64::ONE;
                for (j, &k) in index.iter().enumerate() {
                    prod *= self.mats[j][(k - 1, i)];
                }
                approx += prod;
            }
            err += (x.entries()[flat] - approx).norm_sqr();
        }
        err.sqrt() / x_norm
    }
}

fn restart_seed(base: u64, restart: usize) -> u64 {
    base.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Normal-equations update of one factor matrix, all rows jointly.
fn update_mode(
    x: &DenseTensor,
    factors: &mut Factors,
    mode: usize,
    ridge: Complex64,
) -> Result<()> {
    let dims = x.dims();
    let rank = factors.mats[0].ncols();

    // Gram = Hadamard product over the other modes' A^H A
    let mut gram = DMatrix::from_element(rank, rank, Complex64::ONE);
    for (m, mat) in factors.mats.iter().enumerate() {
        if m == mode {
            continue;
        }
        let g = mat.ad_mul(mat);
        gram.zip_apply(&g, |a, b| *a *= b);
    }
    for i in 0..rank {
        gram[(i, i)] += ridge;
    }

    // M[t, i] = sum over entries with mode coordinate t of
    //           X(idx) * prod_{m != mode} conj(A_m[idx_m, i])
    let mut mtt = DMatrix::from_element(rank, dims[mode], Complex64::ZERO);
    for (flat, index) in x.indices().enumerate() {
        let value = x.entries()[flat];
        if value == Complex64::ZERO {
            continue;
        }
        let t = index[mode] - 1;
        for i in 0..rank {
            let mut w = Complex64::ONE;
            for (m, &k) in index.iter().enumerate() {
                if m != mode {
                    w *= factors.mats[m][(k - 1, i)].conj();
                }
            }
            mtt[(i, t)] += value * w;
        }
    }

    let lu = gram.lu();
    let solved = lu.solve(&mtt).ok_or_else(|| {
        Error::Numeric("linear-solve breakdown in ALS despite ridge regularization".into())
    })?;
    let solved = solved.transpose();
    if solved.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite ALS factor update".into()));
    }
    factors.mats[mode] = solved;
    Ok(())
}

/// One ALS run from a given starting point; returns the final residual.
fn als_sweeps(
    x: &DenseTensor,
    x_norm: f64,
    factors: &mut Factors,
    opts: &AlsOptions,
) -> Result<f64> {
    let n_modes = x.dims().len();
    let ridge = Complex64::new(opts.regularization, 0.0);
    // polish well past rel_tol so exact fits land near machine precision;
    // the stall criterion cuts off swamped runs long before max_sweeps
    let target = (opts.rel_tol * 1e-2).min(1e-13);

    let mut prev = factors.residual(x, x_norm);
    let mut done = prev <= target;
    if !done {
        for _sweep in 0..opts.max_sweeps {
            for mode in 0..n_modes {
                update_mode(x, factors, mode, ridge)?;
            }
            let res = factors.residual(x, x_norm);
            if res <= target {
                prev = res;
                done = true;
                break;
            }
            if prev - res < opts.stall_tol {
                prev = res.min(prev);
                break;
            }
            prev = res;
        }
    }
    let _ = done;

    // the ridge floors the attainable residual near the regularization
    // scale; one unregularized sweep recovers exact fits, kept only when it
    // strictly improves
    let mut trial = Factors {
        mats: factors.mats.clone(),
    };
    let mut polished = true;
    for mode in 0..n_modes {
        if update_mode(x, &mut trial, mode, Complex64::ZERO).is_err() {
            polished = false;
            break;
        }
    }
    if polished {
        let res = trial.residual(x, x_norm);
        if res.is_finite() && res < prev {
            *factors = trial;
            prev = res;
        }
    }
    Ok(prev)
}

/// Best-of-restarts ALS fit at a fixed rank. Returns the decomposition and
/// its relative residual `||X - X_fit||_F / ||X||_F`. Deterministic for a
/// fixed seed.
pub fn als_fit(x: &DenseTensor, rank: usize, opts: &AlsOptions) -> Result<(CpDecomposition, f64)> {
    als_fit_warm(x, rank, opts, None)
}

/// [`als_fit`] with an optional warm start occupying restart 0 (padded with
/// zero columns up to `rank`).
pub fn als_fit_warm(
    x: &DenseTensor,
    rank: usize,
    opts: &AlsOptions,
    warm: Option<&CpDecomposition>,
) -> Result<(CpDecomposition, f64)> {
    opts.validate()?;
    let x_norm = x.frobenius_norm();
    if x_norm == 0.0 {
        return if rank == 0 {
            Ok((CpDecomposition::zero(x.dims().to_vec())?, 0.0))
        } else {
            Err(Error::Degenerate(
                "cannot fit a positive-rank decomposition to the zero tensor".into(),
            ))
        };
    }
    if rank == 0 {
        return Ok((CpDecomposition::zero(x.dims().to_vec())?, 1.0));
    }

    let mut best: Option<(CpDecomposition, f64)> = None;
    for restart in 0..opts.restarts {
        let mut factors = match (restart, warm) {
            (0, Some(w)) if w.rank() <= rank => Factors::warm(x.dims(), rank, w),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(opts.seed, restart));
                Factors::random(x.dims(), rank, &mut rng)
            }
        };
        let residual = als_sweeps(x, x_norm, &mut factors, opts)?;
        if !residual.is_finite() {
            continue;
        }
        // strict inequality: ties keep the earlier restart
        if best.as_ref().map(|(_, b)| residual < *b).unwrap_or(true) {
            best = Some((factors.to_cp(x.dims())?, residual));
        }
    }
    best.ok_or_else(|| Error::Numeric("all ALS restarts diverged".into()))
}

/// Sweeps ranks from the analytic lower bound (or 1) up to `p_max`, fitting
/// each with [`als_fit_warm`] chained on the previous rank's best
/// decomposition. The estimated rank is the smallest rank whose best
/// residual meets `opts.rel_tol`; "not found" is a valid outcome.
pub fn rank_search(x: &DenseTensor, p_max: usize, opts: &AlsOptions) -> Result<RankReport> {
    opts.validate()?;
    if p_max < 1 {
        return Err(Error::arg("p_max must be at least 1"));
    }
    if x.frobenius_norm() == 0.0 {
        return Ok(RankReport {
            estimated_rank: Some(0),
            residuals: BTreeMap::new(),
            restarts_used: opts.restarts,
            lower_bound: 0,
            upper_bound: 0,
            heuristic: true,
        });
    }

    let antisymmetric = x.is_cubical() && check_antisymmetric(x, ANTISYMMETRY_TOL).is_ok();
    let (lower_bound, upper_bound) = if antisymmetric {
        match antisym_rank_bounds(x.order(), x.dims()[0]) {
            Ok(b) => b,
            Err(_) => (1, trivial_upper_bound(x.dims())),
        }
    } else {
        (1, trivial_upper_bound(x.dims()))
    };

    let start = (lower_bound.min(p_max as u128).max(1)) as usize;
    let mut residuals = BTreeMap::new();
    let mut estimated_rank = None;
    let mut previous: Option<CpDecomposition> = None;
    for rank in start..=p_max {
        let (cp, residual) = als_fit_warm(x, rank, opts, previous.as_ref())?;
        residuals.insert(rank, residual);
        if estimated_rank.is_none() && residual <= opts.rel_tol {
            estimated_rank = Some(rank);
        }
        previous = Some(cp);
    }

    Ok(RankReport {
        estimated_rank,
        residuals,
        restarts_used: opts.restarts,
        lower_bound,
        upper_bound,
        heuristic: true,
    })
}

/// `min_n prod_{m != n} K_m`, the generic CP-rank upper bound.
fn trivial_upper_bound(dims: &[usize]) -> u128 {
    (0..dims.len())
        .map(|n| {
            dims.iter()
                .enumerate()
                .filter(|&(m, _)| m != n)
                .map(|(_, &d)| d as u128)
                .product::<u128>()
        })
        .min()
        .unwrap_or(0)
}
