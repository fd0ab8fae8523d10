//! Separable functions on a 1D quadrature grid and their contractions:
//! overlaps, swap overlaps, and soft-Coulomb energy functionals.
//!
//! A separable function is `f = sum_i psi_i1 (x) ... (x) psi_iN` with every
//! mode factor tabulated (values and first derivatives) on the grid nodes.
//! An optional permutation structure represents antisymmetrized sums without
//! recomputing values: each structure entry `(coeff, sigma)` contributes the
//! terms `coeff * prod_l psi_{i, sigma(l)}(r_l)`, so permutations act on mode
//! pairing at contraction time.
//!
//! N-dimensional inner products reduce to products of 1D weighted sums; the
//! two-body terms reduce to 2D sums over one mode pair with all other modes
//! contracted to 1D overlaps. All 1D mode-overlap tables are built once per
//! evaluation, then pairs are looped.

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::quad::QuadratureGrid;
use crate::scalar::Scalar;
use crate::system::{two_body_potential, System1D};

/// Permutation-structure guard: `N!` term expansion is kept desk-scale.
pub const MAX_PERM_MODES: usize = 6;

/// Imaginary-part policy for physical scalars: after asserting
/// `|Im| <= REL * |Re| + ABS`, the imaginary part is dropped.
const IM_REL: f64 = 1e-10;
const IM_ABS: f64 = 1e-12;

/// Norms at or below this are treated as a degenerate ansatz.
pub const DEGENERATE_NORM: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct PermStructure {
    /// `(coefficient, mode assignment)`: mode `l` reads factor slot
    /// `assign[l]` of each term.
    pub entries: Vec<(f64, Vec<usize>)>,
}

/// A rank-`p` separable function of `N` modes tabulated on a fixed grid.
#[derive(Debug, Clone)]
pub struct SeparableFunction<S: Scalar> {
    n_modes: usize,
    rank: usize,
    n_nodes: usize,
    /// Factor values, indexed `a = i * n_modes + j`, each of length `n_nodes`.
    values: Vec<Vec<S>>,
    /// First derivatives, same indexing and shapes as `values`.
    derivs: Vec<Vec<S>>,
    perms: Option<PermStructure>,
}

/// An expanded separable term: base term index, scalar coefficient, and the
/// factor slot used by each mode.
#[derive(Debug, Clone)]
pub(crate) struct ExpTerm {
    pub base: usize,
    pub coeff: f64,
    pub assign: Vec<usize>,
}

impl<S: Scalar> SeparableFunction<S> {
    /// Builds from per-term, per-mode node tabulations `values[i][j]` and
    /// matching derivatives.
    pub fn new(values: Vec<Vec<Vec<S>>>, derivs: Vec<Vec<Vec<S>>>) -> Result<Self> {
        let rank = values.len();
        if rank == 0 {
            return Err(Error::arg("separable function needs at least one term"));
        }
        let n_modes = values[0].len();
        if n_modes == 0 {
            return Err(Error::arg("separable function needs at least one mode"));
        }
        let n_nodes = values[0]
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::arg("empty mode"))?;
        if derivs.len() != rank {
            return Err(Error::dim("derivs term count differs from values"));
        }
        let mut flat_values = Vec::with_capacity(rank * n_modes);
        let mut flat_derivs = Vec::with_capacity(rank * n_modes);
        for (i, (term_v, term_d)) in values.into_iter().zip(derivs).enumerate() {
            if term_v.len() != n_modes || term_d.len() != n_modes {
                return Err(Error::dim(format!("term {i} has inconsistent mode count")));
            }
            for (j, (v, d)) in term_v.into_iter().zip(term_d).enumerate() {
                if v.len() != n_nodes || d.len() != n_nodes {
                    return Err(Error::dim(format!(
                        "term {i} mode {j} has inconsistent node count"
                    )));
                }
                flat_values.push(v);
                flat_derivs.push(d);
            }
        }
        Ok(SeparableFunction {
            n_modes,
            rank,
            n_nodes,
            values: flat_values,
            derivs: flat_derivs,
            perms: None,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn has_permutation_structure(&self) -> bool {
        self.perms.is_some()
    }

    pub(crate) fn values_at(&self, term: usize, mode_slot: usize) -> &[S] {
        &self.values[term * self.n_modes + mode_slot]
    }

    pub(crate) fn derivs_at(&self, term: usize, mode_slot: usize) -> &[S] {
        &self.derivs[term * self.n_modes + mode_slot]
    }

    pub(crate) fn arrays(&self) -> usize {
        self.rank * self.n_modes
    }

    pub(crate) fn value_array(&self, a: usize) -> &[S] {
        &self.values[a]
    }

    pub(crate) fn deriv_array(&self, a: usize) -> &[S] {
        &self.derivs[a]
    }

    /// Attaches the antisymmetrizer's permutation structure: one entry
    /// `(sgn(sigma)/N!, sigma)` per permutation. Values are not recomputed.
    pub fn antisymmetrized(&self) -> Result<Self> {
        if self.n_modes > MAX_PERM_MODES {
            return Err(Error::OrderTooLarge {
                order: self.n_modes,
                max: MAX_PERM_MODES,
            });
        }
        if self.perms.is_some() {
            return Err(Error::arg("function already carries a permutation structure"));
        }
        let perms = Permutation::all(self.n_modes)?;
        let scale = 1.0 / perms.len() as f64;
        let entries = perms
            .iter()
            .map(|p| (p.sign() as f64 * scale, p.mapping().to_vec()))
            .collect();
        let mut out = self.clone();
        out.perms = Some(PermStructure { entries });
        Ok(out)
    }

    /// Materializes the permutation structure into explicit terms
    /// (`rank * |perms|` of them), folding each coefficient into the first
    /// mode's values and derivatives. Used as the expansion oracle.
    pub fn expand_permutations(&self) -> Result<Self> {
        let terms = self.expanded_terms();
        let mut values = Vec::with_capacity(terms.len());
        let mut derivs = Vec::with_capacity(terms.len());
        for t in &terms {
            let mut term_v = Vec::with_capacity(self.n_modes);
            let mut term_d = Vec::with_capacity(self.n_modes);
            for l in 0..self.n_modes {
                let mut v = self.values_at(t.base, t.assign[l]).to_vec();
                let mut d = self.derivs_at(t.base, t.assign[l]).to_vec();
                if l == 0 {
                    for x in v.iter_mut() {
                        *x = x.scale(t.coeff);
                    }
                    for x in d.iter_mut() {
                        *x = x.scale(t.coeff);
                    }
                }
                term_v.push(v);
                term_d.push(d);
            }
            values.push(term_v);
            derivs.push(term_d);
        }
        SeparableFunction::new(values, derivs)
    }

    pub(crate) fn expanded_terms(&self) -> Vec<ExpTerm> {
        let identity: Vec<usize> = (0..self.n_modes).collect();
        match &self.perms {
            None => (0..self.rank)
                .map(|i| ExpTerm {
                    base: i,
                    coeff: 1.0,
                    assign: identity.clone(),
                })
                .collect(),
            Some(ps) => {
                let mut out = Vec::with_capacity(self.rank * ps.entries.len());
                for i in 0..self.rank {
                    for (coeff, assign) in &ps.entries {
                        out.push(ExpTerm {
                            base: i,
                            coeff: *coeff,
                            assign: assign.clone(),
                        });
                    }
                }
                out
            }
        }
    }

    fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if grid.len() != self.n_nodes {
            return Err(Error::dim(format!(
                "function tabulated on {} nodes, grid has {}",
                self.n_nodes,
                grid.len()
            )));
        }
        Ok(())
    }
}

/// Cross table of weighted 1D sums between the factor arrays of a bra
/// function and a ket function: `T[a, b] = sum_x w(x) conj(bra_a(x)) ket_b(x)`.
pub(crate) fn cross_table<S: Scalar>(
    bra: &[Vec<S>],
    ket: &[Vec<S>],
    weights: &[f64],
) -> Vec<S> {
    let cols = ket.len();
    let mut out = vec![S::zero(); bra.len() * cols];
    for (a, va) in bra.iter().enumerate() {
        for (b, vb) in ket.iter().enumerate() {
            let mut acc = S::zero();
            for ((&x, &y), &w) in va.iter().zip(vb.iter()).zip(weights.iter()) {
                acc += x.conj() * y.scale(w);
            }
            out[a * cols + b] = acc;
        }
    }
    out
}

/// `<f, g>` on the grid: the N-dimensional L2 inner product reduced to
/// products of 1D quadratures, respecting permutation structures on either
/// side. Conjugation is on `f`.
pub fn overlap<S: Scalar>(
    f: &SeparableFunction<S>,
    g: &SeparableFunction<S>,
    grid: &QuadratureGrid,
) -> Result<S> {
    f.check_grid(grid)?;
    g.check_grid(grid)?;
    if f.n_modes != g.n_modes {
        return Err(Error::dim(format!(
            "mode counts differ: {} vs {}",
            f.n_modes, g.n_modes
        )));
    }
    let table = cross_table(&f.values, &g.values, grid.weights());
    let cols = g.arrays();
    let terms_f = f.expanded_terms();
    let terms_g = g.expanded_terms();
    let mut acc = S::zero();
    for tf in &terms_f {
        for tg in &terms_g {
            let mut prod = S::from_re(tf.coeff * tg.coeff);
            for l in 0..f.n_modes {
                let a = tf.base * f.n_modes + tf.assign[l];
                let b = tg.base * g.n_modes + tg.assign[l];
                prod *= table[a * cols + b];
            }
            acc += prod;
        }
    }
    Ok(acc)
}

#[allow(clippy::needless_range_loop)]
/// `<f, f o T_ij>` where `T_ij` swaps coordinates `i` and `j` (1-based):
/// computed separably by re-pairing modes `i` and `j` across terms. Equals
/// `-<f,f>` for exactly antisymmetric `f` and `+<f,f>` for symmetric `f`.
pub fn swap_overlap<S: Scalar>(
    f: &SeparableFunction<S>,
    i: usize,
    j: usize,
    grid: &QuadratureGrid,
) -> Result<S> {
    f.check_grid(grid)?;
    if i < 1 || j > f.n_modes || i >= j {
        return Err(Error::arg(format!(
            "swap indices must satisfy 1 <= i < j <= {}, got ({i}, {j})",
            f.n_modes
        )));
    }
    let table = cross_table(&f.values, &f.values, grid.weights());
    let cols = f.arrays();
    let mut tau: Vec<usize> = (0..f.n_modes).collect();
    tau.swap(i - 1, j - 1);
    let terms = f.expanded_terms();
    let mut acc = S::zero();
    for tf in &terms {
        for tg in &terms {
            let mut prod = S::from_re(tf.coeff * tg.coeff);
            for l in 0..f.n_modes {
                let a = tf.base * f.n_modes + tf.assign[l];
                let b = tg.base * f.n_modes + tg.assign[tau[l]];
                prod *= table[a * cols + b];
            }
            acc += prod;
        }
    }
    Ok(acc)
}

/// The four quadratic forms of the soft-Coulomb Rayleigh quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    /// `1/2 sum_i <d_i f, d_i f>` (gradient form of the kinetic energy).
    pub kinetic: f64,
    /// `sum_i <f, v(r_i) f>`.
    pub one_body: f64,
    /// `sum_{i<j} <f, w(r_i, r_j) f>`.
    pub two_body: f64,
    /// `<f, f>`.
    pub norm: f64,
}

impl EnergyTerms {
    pub fn rayleigh(&self) -> f64 {
        (self.kinetic + self.one_body + self.two_body) / self.norm
    }
}

/// Reusable buffers for energy evaluations on a fixed grid: the weighted
/// two-body kernel matrix and the product/contraction scratch.
pub struct EnergyWorkspace<S: Scalar> {
    n_nodes: usize,
    /// `kernel[x * n + y] = w_x w_y / sqrt(1 + (node_x - node_y)^2)`.
    kernel: Vec<S>,
}

impl<S: Scalar> EnergyWorkspace<S> {
    pub fn new(grid: &QuadratureGrid) -> Self {
        let n = grid.len();
        let nodes = grid.nodes();
        let weights = grid.weights();
        let mut kernel = vec![S::zero(); n * n];
        for x in 0..n {
            for y in 0..n {
                kernel[x * n + y] =
                    S::from_re(weights[x] * weights[y] * two_body_potential(nodes[x], nodes[y]));
            }
        }
        EnergyWorkspace { n_nodes: n, kernel }
    }

    pub(crate) fn kernel(&self) -> &[S] {
        &self.kernel
    }
}

/// Per-evaluation contraction state shared by the forward energy and the
/// gradient engine.
pub(crate) struct Contraction<S: Scalar> {
    pub n_modes: usize,
    pub arrays: usize,
    /// plain overlaps `S[a,b]`
    pub s: Vec<S>,
    /// derivative overlaps `D[a,b]`
    pub d: Vec<S>,
    /// one-body-weighted overlaps `V[a,b]`
    pub v: Vec<S>,
    /// weighted one-body vector `wv[x] = w_x v(node_x)` (kept for backward)
    pub wv: Vec<f64>,
    /// ids of array pairs needing two-body products; `row_of[d] = row in u/z`
    pub row_of: Vec<usize>,
    pub used: Vec<usize>,
    /// products `u[row, x] = conj(val_a(x)) val_b(x)` for used pairs
    pub u: Vec<S>,
    /// `z = u * kernel`
    pub z: Vec<S>,
}

pub(crate) const NO_ROW: usize = usize::MAX;

impl<S: Scalar> Contraction<S> {
    pub(crate) fn build(
        f: &SeparableFunction<S>,
        system: &System1D,
        grid: &QuadratureGrid,
        ws: &EnergyWorkspace<S>,
        terms: &[ExpTerm],
    ) -> Result<Self> {
        f.check_grid(grid)?;
        if ws.n_nodes != grid.len() {
            return Err(Error::dim("workspace built for a different grid"));
        }
        let n_modes = f.n_modes();
        let arrays = f.arrays();
        let g = grid.len();

        let s = cross_table(&f.values, &f.values, grid.weights());
        let d = cross_table(&f.derivs, &f.derivs, grid.weights());
        let wv: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&x, &w)| w * system.one_body_potential(x))
            .collect();
        let v = cross_table(&f.values, &f.values, &wv);

        // two-body products only for array pairs that actually occur
        let mut row_of = vec![NO_ROW; arrays * arrays];
        let mut used = Vec::new();
        if n_modes >= 2 {
            for tf in terms {
                for tg in terms {
                    for l in 0..n_modes {
                        let a = tf.base * n_modes + tf.assign[l];
                        let b = tg.base * n_modes + tg.assign[l];
                        let id = a * arrays + b;
                        if row_of[id] == NO_ROW {
                            row_of[id] = used.len();
                            used.push(id);
                        }
                    }
                }
            }
        }
        let rows = used.len();
        let mut u = vec![S::zero(); rows * g];
        for (row, &id) in used.iter().enumerate() {
            let (a, b) = (id / arrays, id % arrays);
            let va = f.value_array(a);
            let vb = f.value_array(b);
            let dst = &mut u[row * g..(row + 1) * g];
            for x in 0..g {
                dst[x] = va[x].conj() * vb[x];
            }
        }
        let z = if rows > 0 {
            S::gemm(rows, g, g, &u, &ws.kernel)
        } else {
            Vec::new()
        };

        Ok(Contraction {
            n_modes,
            arrays,
            s,
            d,
            v,
            wv,
            row_of,
            used,
            u,
            z,
        })
    }

    pub(crate) fn s_at(&self, a: usize, b: usize) -> S {
        self.s[a * self.arrays + b]
    }

    /// Two-body 2D quadrature for bra pair `d = (a_l, b_l)` against ket pair
    /// `e = (a_m, b_m)`: `dot(z[d], u[e])`.
    pub(crate) fn two_body_at(&self, d: (usize, usize), e: (usize, usize), n_nodes: usize) -> S {
        let rd = self.row_of[d.0 * self.arrays + d.1];
        let re = self.row_of[e.0 * self.arrays + e.1];
        debug_assert!(rd != NO_ROW && re != NO_ROW);
        let zr = &self.z[rd * n_nodes..(rd + 1) * n_nodes];
        let ur = &self.u[re * n_nodes..(re + 1) * n_nodes];
        let mut acc = S::zero();
        for (zz, uu) in zr.iter().zip(ur.iter()) {
            acc += *zz * *uu;
        }
        acc
    }
}

pub(crate) struct EnergyParts<S> {
    pub norm: S,
    pub kinetic: S,
    pub one_body: S,
    pub two_body: S,
    /// normalized-swap numerators `<f, f o T_ij>` per pair `i < j`, when
    /// requested
    pub swaps: Vec<S>,
}

#[allow(clippy::needless_range_loop)]
/// Assembles all quadratic forms from the contraction tables by looping
/// expanded term pairs. `N <= MAX_PERM_MODES + rank` keeps this loop cheap
/// relative to the 2D kernel contraction.
pub(crate) fn assemble<S: Scalar>(
    con: &Contraction<S>,
    terms: &[ExpTerm],
    n_nodes: usize,
    want_swaps: bool,
) -> EnergyParts<S> {
    let n = con.n_modes;
    let arrays = con.arrays;
    let mut norm = S::zero();
    let mut kinetic = S::zero();
    let mut one_body = S::zero();
    let mut two_body = S::zero();
    let n_pairs = n * (n - 1) / 2;
    let mut swaps = vec![S::zero(); if want_swaps { n_pairs } else { 0 }];

    let mut sl = vec![S::zero(); n];
    let mut pre = vec![S::zero(); n + 1];
    let mut suf = vec![S::zero(); n + 1];

    for tf in terms {
        for tg in terms {
            let cc = tf.coeff * tg.coeff;
            for l in 0..n {
                let a = tf.base * n + tf.assign[l];
                let b = tg.base * n + tg.assign[l];
                sl[l] = con.s[a * arrays + b];
            }
            pre[0] = S::one();
            for l in 0..n {
                pre[l + 1] = pre[l] * sl[l];
            }
            suf[n] = S::one();
            for l in (0..n).rev() {
                suf[l] = suf[l + 1] * sl[l];
            }
            norm += pre[n].scale(cc);

            for l in 0..n {
                let a = tf.base * n + tf.assign[l];
                let b = tg.base * n + tg.assign[l];
                let excl = pre[l] * suf[l + 1];
                kinetic += (con.d[a * arrays + b] * excl).scale(0.5 * cc);
                one_body += (con.v[a * arrays + b] * excl).scale(cc);
            }

            if n >= 2 {
                for l in 0..n {
                    for m in l + 1..n {
                        let mut excl = S::one();
                        for q in 0..n {
                            if q != l && q != m {
                                excl *= sl[q];
                            }
                        }
                        let d = (tf.base * n + tf.assign[l], tg.base * n + tg.assign[l]);
                        let e = (tf.base * n + tf.assign[m], tg.base * n + tg.assign[m]);
                        two_body += (con.two_body_at(d, e, n_nodes) * excl).scale(cc);
                    }
                }
            }

            if want_swaps {
                let mut pair = 0usize;
                for i in 0..n {
                    for j in i + 1..n {
                        let mut prod = S::from_re(cc);
                        for l in 0..n {
                            let lt = if l == i {
                                j
                            } else if l == j {
                                i
                            } else {
                                l
                            };
                            let a = tf.base * n + tf.assign[l];
                            let b = tg.base * n + tg.assign[lt];
                            prod *= con.s[a * arrays + b];
                        }
                        swaps[pair] += prod;
                        pair += 1;
                    }
                }
            }
        }
    }

    EnergyParts {
        norm,
        kinetic,
        one_body,
        two_body,
        swaps,
    }
}

pub(crate) fn real_part_checked<S: Scalar>(value: S, what: &str) -> Result<f64> {
    let re = value.re();
    let im = value.im();
    if im.abs() > IM_REL * re.abs() + IM_ABS {
        return Err(Error::Numeric(format!(
            "{what} has non-negligible imaginary part {im:.3e} (real {re:.3e})"
        )));
    }
    if !re.is_finite() {
        return Err(Error::Numeric(format!("{what} is non-finite")));
    }
    Ok(re)
}

/// Kinetic, one-body, two-body, and norm quadratic forms of `f` for a
/// system on a grid. All outputs are real up to the imaginary-part policy;
/// a norm at or below [`DEGENERATE_NORM`] is an error.
pub fn energy_terms<S: Scalar>(
    f: &SeparableFunction<S>,
    system: &System1D,
    grid: &QuadratureGrid,
) -> Result<EnergyTerms> {
    let ws = EnergyWorkspace::new(grid);
    energy_terms_with(f, system, grid, &ws)
}

/// [`energy_terms`] with a caller-owned workspace (reused across evaluations
/// in training loops).
pub fn energy_terms_with<S: Scalar>(
    f: &SeparableFunction<S>,
    system: &System1D,
    grid: &QuadratureGrid,
    ws: &EnergyWorkspace<S>,
) -> Result<EnergyTerms> {
    let terms = f.expanded_terms();
    let con = Contraction::build(f, system, grid, ws, &terms)?;
    let parts = assemble(&con, &terms, grid.len(), false);
    let norm = real_part_checked(parts.norm, "norm")?;
    if norm <= DEGENERATE_NORM {
        return Err(Error::Degenerate(format!(
            "norm {norm:.3e} at or below {DEGENERATE_NORM:.0e}; the ansatz is numerically zero"
        )));
    }
    Ok(EnergyTerms {
        kinetic: real_part_checked(parts.kinetic, "kinetic energy")?,
        one_body: real_part_checked(parts.one_body, "one-body energy")?,
        two_body: real_part_checked(parts.two_body, "two-body energy")?,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre_grid;
    use num_complex::Complex64;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn default_grid() -> QuadratureGrid {
        gauss_legendre_grid(-10.0, 10.0, 30, 30).unwrap()
    }

    /// Tabulates analytic mode functions (value, derivative) on the grid.
    fn tabulate<F: Fn(f64) -> (f64, f64)>(
        grid: &QuadratureGrid,
        f: F,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut v = Vec::with_capacity(grid.len());
        let mut d = Vec::with_capacity(grid.len());
        for &x in grid.nodes() {
            let (fv, fd) = f(x);
            v.push(Complex64::new(fv, 0.0));
            d.push(Complex64::new(fd, 0.0));
        }
        (v, d)
    }

    fn gaussian(center: f64, sigma: f64) -> impl Fn(f64) -> (f64, f64) {
        move |x| {
            let u = (x - center) / sigma;
            let v = (-0.5 * u * u).exp();
            (v, -u / sigma * v)
        }
    }

    fn random_sep(
        rng: &mut ChaCha8Rng,
        grid: &QuadratureGrid,
        n_modes: usize,
        rank: usize,
    ) -> SeparableFunction<Complex64> {
        // random smooth modes: complex mixtures of a few gaussians
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        for _ in 0..rank {
            let mut term_v = Vec::new();
            let mut term_d = Vec::new();
            for _ in 0..n_modes {
                let c1 = rng.random_range(-2.0..2.0);
                let c2 = rng.random_range(-2.0..2.0);
                let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let g1 = gaussian(c1, 1.0);
                let g2 = gaussian(c2, 0.7);
                let mut v = Vec::with_capacity(grid.len());
                let mut d = Vec::with_capacity(grid.len());
                for &x in grid.nodes() {
                    let (v1, d1) = g1(x);
                    let (v2, d2) = g2(x);
                    v.push(a * v1 + b * v2);
                    d.push(a * d1 + b * d2);
                }
                term_v.push(v);
                term_d.push(d);
            }
            values.push(term_v);
            derivs.push(term_d);
        }
        SeparableFunction::new(values, derivs).unwrap()
    }

    /// Brute-force full-grid evaluation of an N=2 separable function.
    fn eval_2d(f: &SeparableFunction<Complex64>, x: usize, y: usize) -> Complex64 {
        let terms = f.expanded_terms();
        let mut acc = Complex64::ZERO;
        for t in &terms {
            let vx = f.values_at(t.base, t.assign[0])[x];
            let vy = f.values_at(t.base, t.assign[1])[y];
            acc += Complex64::new(t.coeff, 0.0) * vx * vy;
        }
        acc
    }

    #[test]
    fn norm_of_gaussian_product_is_positive_real() {
        let grid = default_grid();
        let (v, d) = tabulate(&grid, gaussian(0.0, 1.0));
        let f = SeparableFunction::new(vec![vec![v.clone(), v]], vec![vec![d.clone(), d]]).unwrap();
        let n = overlap(&f, &f, &grid).unwrap();
        assert!(n.re > 0.0);
        assert!(n.im.abs() < 1e-14);
    }

    #[test]
    fn disjoint_bumps_are_orthogonal() {
        let grid = default_grid();
        let (v1, d1) = tabulate(&grid, gaussian(-5.0, 0.2));
        let (v2, d2) = tabulate(&grid, gaussian(5.0, 0.2));
        let f = SeparableFunction::new(vec![vec![v1, d1.clone()]], vec![vec![d1.clone(), d1]])
            .unwrap();
        let g = SeparableFunction::new(vec![vec![v2, d2.clone()]], vec![vec![d2.clone(), d2]])
            .unwrap();
        let o = overlap(&f, &g, &grid).unwrap();
        assert!(o.norm() <= 1e-14);
    }

    #[test]
    fn overlap_matches_full_grid_oracle_n2() {
        let grid = default_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_sep(&mut rng, &grid, 2, 2);
        let g = random_sep(&mut rng, &grid, 2, 2);
        let fast = overlap(&f, &g, &grid).unwrap();
        // brute-force tensor-grid integration at 900^2 points
        let w = grid.weights();
        let mut slow = Complex64::ZERO;
        for x in 0..grid.len() {
            for y in 0..grid.len() {
                slow += Complex64::new(w[x] * w[y], 0.0)
                    * eval_2d(&f, x, y).conj()
                    * eval_2d(&g, x, y);
            }
        }
        let rel = (fast - slow).norm() / slow.norm();
        assert!(rel <= 1e-10, "rel err {rel}");
    }

    #[test]
    fn overlap_is_hermitian() {
        let grid = default_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_sep(&mut rng, &grid, 3, 2);
        let g = random_sep(&mut rng, &grid, 3, 2);
        let fg = overlap(&f, &g, &grid).unwrap();
        let gf = overlap(&g, &f, &grid).unwrap();
        assert!((fg - gf.conj()).norm() <= 1e-12 * fg.norm().max(1.0));
    }

    #[test]
    fn permutation_structure_equals_explicit_expansion() {
        let grid = default_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n_modes in 2..=3usize {
            let f = random_sep(&mut rng, &grid, n_modes, 2);
            let anti = f.antisymmetrized().unwrap();
            let expanded = anti.expand_permutations().unwrap();
            assert_eq!(expanded.rank(), 2 * (1..=n_modes).product::<usize>());

            let a = overlap(&anti, &anti, &grid).unwrap();
            let b = overlap(&expanded, &expanded, &grid).unwrap();
            assert!(
                (a - b).norm() <= 1e-12 * a.norm().max(1e-30),
                "norms differ: {a} vs {b}"
            );

            let sys = System1D::helium_hydride();
            let sys = if n_modes == 2 {
                sys
            } else {
                System1D::lithium()
            };
            let ea = energy_terms(&anti, &sys, &grid).unwrap();
            let eb = energy_terms(&expanded, &sys, &grid).unwrap();
            for (x, y) in [
                (ea.kinetic, eb.kinetic),
                (ea.one_body, eb.one_body),
                (ea.two_body, eb.two_body),
                (ea.norm, eb.norm),
            ] {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-30), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn swap_overlap_signs() {
        let grid = default_grid();
        // antisymmetrized two-mode function: swap overlap = -norm
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = random_sep(&mut rng, &grid, 2, 1).antisymmetrized().unwrap();
        let n = overlap(&f, &f, &grid).unwrap();
        let s = swap_overlap(&f, 1, 2, &grid).unwrap();
        assert!((s + n).norm() <= 1e-10 * n.norm());

        // symmetric function (identical modes): swap overlap = +norm
        let (v, d) = tabulate(&grid, gaussian(0.3, 1.1));
        let g = SeparableFunction::new(
            vec![vec![v.clone(), v]],
            vec![vec![d.clone(), d]],
        )
        .unwrap();
        let n = overlap(&g, &g, &grid).unwrap();
        let s = swap_overlap(&g, 1, 2, &grid).unwrap();
        assert!((s - n).norm() <= 1e-12 * n.norm());
    }

    #[test]
    fn swap_overlap_matches_full_grid_oracle() {
        let grid = default_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_sep(&mut rng, &grid, 2, 2);
        let fast = swap_overlap(&f, 1, 2, &grid).unwrap();
        let w = grid.weights();
        let mut slow = Complex64::ZERO;
        for x in 0..grid.len() {
            for y in 0..grid.len() {
                slow += Complex64::new(w[x] * w[y], 0.0)
                    * eval_2d(&f, x, y).conj()
                    * eval_2d(&f, y, x);
            }
        }
        let rel = (fast - slow).norm() / slow.norm();
        assert!(rel <= 1e-10, "rel err {rel}");
        assert!(swap_overlap(&f, 2, 2, &grid).is_err());
        assert!(swap_overlap(&f, 0, 1, &grid).is_err());
    }

    #[test]
    fn free_gaussian_kinetic_ratio_is_quarter() {
        // <(1/2)|psi'|^2> / <psi,psi> = 1/4 for psi = exp(-x^2/2)
        let grid = default_grid();
        let (v, d) = tabulate(&grid, gaussian(0.0, 1.0));
        let f = SeparableFunction::new(vec![vec![v]], vec![vec![d]]).unwrap();
        let free = System1D::new(1, vec![]).unwrap();
        let e = energy_terms(&f, &free, &grid).unwrap();
        assert!((e.kinetic / e.norm - 0.25).abs() <= 1e-10);
        assert_eq!(e.one_body, 0.0);
        assert_eq!(e.two_body, 0.0);
    }

    #[test]
    fn separated_bumps_feel_softened_repulsion() {
        let grid = default_grid();
        let dist = 4.0;
        let (v1, d1) = tabulate(&grid, gaussian(-dist / 2.0, 0.05));
        let (v2, d2) = tabulate(&grid, gaussian(dist / 2.0, 0.05));
        let f = SeparableFunction::new(vec![vec![v1, v2]], vec![vec![d1, d2]]).unwrap();
        let free = System1D::new(2, vec![]).unwrap();
        let e = energy_terms(&f, &free, &grid).unwrap();
        let expect = 1.0 / (1.0 + dist * dist).sqrt();
        assert!(
            (e.two_body / e.norm - expect).abs() <= 1e-3,
            "{} vs {expect}",
            e.two_body / e.norm
        );
    }

    #[test]
    fn energy_terms_match_full_grid_oracle_n2() {
        let grid = default_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random_sep(&mut rng, &grid, 2, 2);
        let sys = System1D::helium_hydride();
        let e = energy_terms(&f, &sys, &grid).unwrap();

        let w = grid.weights();
        let nodes = grid.nodes();
        let (mut norm, mut one_body, mut two_body) = (0.0f64, 0.0f64, 0.0f64);
        for x in 0..grid.len() {
            for y in 0..grid.len() {
                let fxy = eval_2d(&f, x, y);
                let wxy = w[x] * w[y];
                let density = fxy.norm_sqr() * wxy;
                norm += density;
                one_body +=
                    density * (sys.one_body_potential(nodes[x]) + sys.one_body_potential(nodes[y]));
                two_body += density * two_body_potential(nodes[x], nodes[y]);
            }
        }
        assert!((e.norm - norm).abs() <= 1e-10 * norm.abs());
        assert!((e.one_body - one_body).abs() <= 1e-10 * one_body.abs());
        assert!((e.two_body - two_body).abs() <= 1e-10 * two_body.abs());
        assert!(e.kinetic >= 0.0);
        assert!(e.norm > 0.0);
    }

    #[test]
    fn kinetic_gradient_form_agrees_with_fd_laplacian() {
        // 1/2 <f', f'> vs -1/2 <f, f''> with f'' by central differences of
        // the analytic function; boundary terms vanish to truncation accuracy
        let grid = default_grid();
        let g = gaussian(0.5, 1.3);
        let (v, d) = tabulate(&grid, &g);
        let f = SeparableFunction::new(vec![vec![v.clone()]], vec![vec![d]]).unwrap();
        let free = System1D::new(1, vec![]).unwrap();
        let e = energy_terms(&f, &free, &grid).unwrap();

        let h = 1e-4;
        let mut ipp = 0.0f64; // -1/2 integral f f''
        for (&x, &w) in grid.nodes().iter().zip(grid.weights()) {
            let (f0, _) = g(x);
            let (fp, _) = g(x + h);
            let (fm, _) = g(x - h);
            let second = (fp - 2.0 * f0 + fm) / (h * h);
            ipp += w * f0 * second;
        }
        ipp *= -0.5;
        assert!(
            ((e.kinetic - ipp) / ipp).abs() <= 1e-4,
            "{} vs {ipp}",
            e.kinetic
        );
    }

    #[test]
    fn degenerate_norm_is_an_error() {
        let grid = default_grid();
        let zeros = vec![Complex64::ZERO; grid.len()];
        let f = SeparableFunction::new(
            vec![vec![zeros.clone(), zeros.clone()]],
            vec![vec![zeros.clone(), zeros]],
        )
        .unwrap();
        let sys = System1D::helium_hydride();
        match energy_terms(&f, &sys, &grid) {
            Err(Error::Degenerate(_)) => {}
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_errors() {
        let grid = default_grid();
        let other = gauss_legendre_grid(-10.0, 10.0, 10, 10).unwrap();
        let (v, d) = tabulate(&grid, gaussian(0.0, 1.0));
        let f = SeparableFunction::new(vec![vec![v.clone()]], vec![vec![d.clone()]]).unwrap();
        assert!(overlap(&f, &f, &other).is_err());
        let (v2, d2) = tabulate(&grid, gaussian(0.0, 2.0));
        let g = SeparableFunction::new(
            vec![vec![v2.clone(), v2]],
            vec![vec![d2.clone(), d2]],
        )
        .unwrap();
        assert!(overlap(&f, &g, &grid).is_err());
    }

    #[test]
    fn antisymmetrized_values_flip_sign_under_argument_swap() {
        // pointwise check at 50 random grid-node triples: evaluate the
        // permutation-structured function directly from its tabulated modes
        let grid = gauss_legendre_grid(-10.0, 10.0, 10, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let f = random_sep(&mut rng, &grid, 3, 2).antisymmetrized().unwrap();
        let eval_at_nodes = |f: &SeparableFunction<Complex64>, nodes: &[usize]| -> Complex64 {
            let mut acc = Complex64::ZERO;
            for t in &f.expanded_terms() {
                let mut prod = Complex64::new(t.coeff, 0.0);
                for (l, &x) in nodes.iter().enumerate() {
                    prod *= f.values_at(t.base, t.assign[l])[x];
                }
                acc += prod;
            }
            acc
        };
        let mut scale = 1e-12f64;
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let triple = [
                rng.random_range(0..grid.len()),
                rng.random_range(0..grid.len()),
                rng.random_range(0..grid.len()),
            ];
            let v = eval_at_nodes(&f, &triple);
            scale = scale.max(v.norm());
            for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let mut swapped = triple;
                swapped.swap(a, b);
                let w = eval_at_nodes(&f, &swapped);
                worst = worst.max((v + w).norm());
            }
        }
        assert!(worst / scale <= 1e-10, "sign-flip violation {:.3e}", worst / scale);
    }

    #[test]
    fn antisymmetrization_guard_and_symmetric_annihilation() {
        let grid = gauss_legendre_grid(-10.0, 10.0, 5, 6).unwrap();
        let (v, d) = tabulate(&grid, gaussian(0.0, 1.0));
        // identical modes: antisymmetrized norm vanishes
        let f = SeparableFunction::new(
            vec![vec![v.clone(), v.clone()]],
            vec![vec![d.clone(), d.clone()]],
        )
        .unwrap();
        let anti = f.antisymmetrized().unwrap();
        let n = overlap(&anti, &anti, &grid).unwrap();
        assert!(n.norm() <= 1e-12);

        // N = 1: antisymmetrizer is the identity (single permutation)
        let one = SeparableFunction::new(vec![vec![v.clone()]], vec![vec![d.clone()]]).unwrap();
        let anti1 = one.antisymmetrized().unwrap();
        let a = overlap(&one, &one, &grid).unwrap();
        let b = overlap(&anti1, &anti1, &grid).unwrap();
        assert!((a - b).norm() <= 1e-14 * a.norm());

        // guard: N > 6 refuses
        let modes7: Vec<Vec<Complex64>> = vec![v.clone(); 7];
        let derivs7: Vec<Vec<Complex64>> = vec![d.clone(); 7];
        let g7 = SeparableFunction::new(vec![modes7], vec![derivs7]).unwrap();
        assert!(g7.antisymmetrized().is_err());
    }
}
