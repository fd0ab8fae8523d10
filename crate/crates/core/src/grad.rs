//! Loss functions and their exact gradients by reverse accumulation over the
//! contraction graph.
//!
//! The losses touch the networks only through the per-mode grid tabulations,
//! so the differentiated graph is small and shallow: parameters -> mode
//! values/derivatives -> 1D/2D quadrature tables -> quadratic forms ->
//! Rayleigh quotient (+ swap penalty). The backward pass mirrors each stage
//! with hand-written adjoints and is validated against central finite
//! differences.

use crate::error::{Error, Result};
use crate::quad::QuadratureGrid;
use crate::scalar::Scalar;
use crate::sep::{
    assemble, real_part_checked, Contraction, EnergyWorkspace, ExpTerm, DEGENERATE_NORM, NO_ROW,
};
use crate::system::System1D;
use crate::tnn::{backprop_mode, eval_modes_traced, TnnModel};

/// Which training objective to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Rayleigh quotient plus the swap-overlap penalty scaled by beta.
    Penalized,
    /// Rayleigh quotient of the explicitly antisymmetrized ansatz.
    Antisymmetrized,
}

/// Forward values of a loss evaluation. `penalty` is the sum of normalized
/// swap overlaps `sum_{i<j} <f, f o T_ij> / <f,f>` (before the beta scale);
/// for the antisymmetrized loss it is diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub loss: f64,
    pub energy: f64,
    pub penalty: f64,
    pub norm: f64,
}

/// `L = <f,Hf>/<f,f> + beta * sum_{i<j} <f, f o T_ij>/<f,f>`.
pub fn loss_penalized(
    model: &TnnModel,
    system: &System1D,
    grid: &QuadratureGrid,
    beta: f64,
) -> Result<LossValue> {
    let ws = EnergyWorkspace::new(grid);
    Ok(evaluate(LossKind::Penalized, model, system, grid, beta, &ws, false)?.0)
}

/// `L = <f_anti, H f_anti> / <f_anti, f_anti>` with the antisymmetrizer
/// applied through the permutation structure.
pub fn loss_antisymmetrized(
    model: &TnnModel,
    system: &System1D,
    grid: &QuadratureGrid,
) -> Result<LossValue> {
    let ws = EnergyWorkspace::new(grid);
    Ok(evaluate(LossKind::Antisymmetrized, model, system, grid, 0.0, &ws, false)?.0)
}

/// Exact gradient of the selected loss with respect to all parameters, in
/// the canonical flat order of [`TnnModel::to_flat`].
pub fn gradient(
    kind: LossKind,
    model: &TnnModel,
    system: &System1D,
    grid: &QuadratureGrid,
    beta: f64,
) -> Result<Vec<f64>> {
    let ws = EnergyWorkspace::new(grid);
    let (_, grad) = evaluate(kind, model, system, grid, beta, &ws, true)?;
    Ok(grad.expect("gradient requested"))
}

/// Shared forward (+ optional backward) path. The workspace carries the
/// weighted two-body kernel and can be reused across evaluations on the same
/// grid.
pub(crate) fn evaluate(
    kind: LossKind,
    model: &TnnModel,
    system: &System1D,
    grid: &QuadratureGrid,
    beta: f64,
    ws: &EnergyWorkspace<f64>,
    want_grad: bool,
) -> Result<(LossValue, Option<Vec<f64>>)> {
    if model.arch.n_modes != system.n_electrons() {
        return Err(Error::dim(format!(
            "model has {} modes but the system has {} electrons",
            model.arch.n_modes,
            system.n_electrons()
        )));
    }
    if beta < 0.0 {
        return Err(Error::arg("penalty weight must be non-negative"));
    }
    let (sep, traces) = eval_modes_traced(model, grid)?;
    let f = match kind {
        LossKind::Penalized => sep,
        LossKind::Antisymmetrized => sep.antisymmetrized()?,
    };
    let terms = f.expanded_terms();
    let g = grid.len();
    let con = Contraction::build(&f, system, grid, ws, &terms)?;
    let parts = assemble(&con, &terms, g, true);

    let norm = real_part_checked(parts.norm, "norm")?;
    if norm <= DEGENERATE_NORM {
        let hint = match kind {
            LossKind::Antisymmetrized => {
                "the antisymmetrizer annihilated the ansatz (symmetric network output); \
                 re-initialize with a different seed"
            }
            LossKind::Penalized => "the ansatz is numerically zero",
        };
        return Err(Error::Degenerate(format!("norm {norm:.3e}: {hint}")));
    }
    let kinetic = real_part_checked(parts.kinetic, "kinetic energy")?;
    let one_body = real_part_checked(parts.one_body, "one-body energy")?;
    let two_body = real_part_checked(parts.two_body, "two-body energy")?;
    let mut swap_sum = 0.0;
    for (k, s) in parts.swaps.iter().enumerate() {
        swap_sum += real_part_checked(*s, &format!("swap overlap {k}"))?;
    }

    let numerator = kinetic + one_body + two_body;
    let energy = numerator / norm;
    let penalty = swap_sum / norm;
    let loss = match kind {
        LossKind::Penalized => energy + beta * penalty,
        LossKind::Antisymmetrized => energy,
    };
    let value = LossValue {
        loss,
        energy,
        penalty,
        norm,
    };
    if !want_grad {
        return Ok((value, None));
    }

    // ---- backward ----------------------------------------------------
    let n = f.n_modes();
    let arrays = f.arrays();
    let inv_norm = 1.0 / norm;
    let (adj_swap, adj_norm) = match kind {
        LossKind::Penalized => (
            beta * inv_norm,
            -(numerator + beta * swap_sum) * inv_norm * inv_norm,
        ),
        LossKind::Antisymmetrized => (0.0, -numerator * inv_norm * inv_norm),
    };
    let adj_quad = inv_norm; // seed for kinetic, one-body, two-body

    let mut adj_s = vec![0.0f64; arrays * arrays];
    let mut adj_d = vec![0.0f64; arrays * arrays];
    let mut adj_v = vec![0.0f64; arrays * arrays];
    let rows = con.used.len();
    let mut adj_u = vec![0.0f64; rows * g];
    let mut adj_z = vec![0.0f64; rows * g];

    backward_assemble(
        &con, &terms, n, g, adj_norm, adj_quad, adj_swap, &mut adj_s, &mut adj_d, &mut adj_v,
        &mut adj_u, &mut adj_z,
    );

    // z = u * kernel with a symmetric kernel, so adj_u += adj_z * kernel
    if rows > 0 {
        let from_z = f64::gemm(rows, g, g, &adj_z, ws.kernel());
        for (a, b) in adj_u.iter_mut().zip(&from_z) {
            *a += b;
        }
    }

    // table and product adjoints -> value/derivative array adjoints;
    // T[a,b] = sum_x w(x) arr_a(x) arr_b(x), so each side receives the other
    // side scaled by the weight (a == b naturally doubles)
    let p = model.arch.rank;
    let mut adj_values = vec![vec![vec![0.0f64; g]; n]; p];
    let mut adj_derivs = vec![vec![vec![0.0f64; g]; n]; p];
    let weights = grid.weights();
    for a in 0..arrays {
        for b in 0..arrays {
            let id = a * arrays + b;
            let (ia, ja) = (a / n, a % n);
            let (ib, jb) = (b / n, b % n);
            let gs = adj_s[id];
            let gv = adj_v[id];
            if gs != 0.0 || gv != 0.0 {
                let va = f.value_array(a);
                let vb = f.value_array(b);
                for x in 0..g {
                    let w = gs * weights[x] + gv * con.wv[x];
                    adj_values[ia][ja][x] += w * vb[x];
                    adj_values[ib][jb][x] += w * va[x];
                }
            }
            let gd = adj_d[id];
            if gd != 0.0 {
                let da = f.deriv_array(a);
                let db = f.deriv_array(b);
                for x in 0..g {
                    let w = gd * weights[x];
                    adj_derivs[ia][ja][x] += w * db[x];
                    adj_derivs[ib][jb][x] += w * da[x];
                }
            }
        }
    }
    for (row, &id) in con.used.iter().enumerate() {
        let (a, b) = (id / arrays, id % arrays);
        let (ia, ja) = (a / n, a % n);
        let (ib, jb) = (b / n, b % n);
        let va = f.value_array(a);
        let vb = f.value_array(b);
        let adj_row = &adj_u[row * g..(row + 1) * g];
        for x in 0..g {
            adj_values[ia][ja][x] += adj_row[x] * vb[x];
            adj_values[ib][jb][x] += adj_row[x] * va[x];
        }
    }

    // arrays -> parameters
    let per_mode = model.arch.params_per_mode();
    let mut grad = vec![0.0f64; model.param_count()];
    for j in 0..n {
        let adj_vals_j: Vec<Vec<f64>> = (0..p).map(|i| adj_values[i][j].clone()).collect();
        let adj_ders_j: Vec<Vec<f64>> = (0..p).map(|i| adj_derivs[i][j].clone()).collect();
        backprop_mode(
            model,
            j,
            grid.nodes(),
            &traces[j],
            &adj_vals_j,
            &adj_ders_j,
            &mut grad[j * per_mode..(j + 1) * per_mode],
        );
    }
    if let Some(bad) = grad.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite gradient component at parameter index {bad}"
        )));
    }
    Ok((value, Some(grad)))
}

#[allow(clippy::needless_range_loop)]
/// Mirrors [`assemble`]'s loops, distributing scalar adjoints onto the
/// contraction tables by the product rule.
#[allow(clippy::too_many_arguments)]
fn backward_assemble(
    con: &Contraction<f64>,
    terms: &[ExpTerm],
    n: usize,
    n_nodes: usize,
    adj_norm: f64,
    adj_quad: f64,
    adj_swap: f64,
    adj_s: &mut [f64],
    adj_d: &mut [f64],
    adj_v: &mut [f64],
    adj_u: &mut [f64],
    adj_z: &mut [f64],
) {
    let arrays = con.arrays;
    let half_quad = 0.5 * adj_quad;
    let mut sl = vec![0.0f64; n];
    let mut ai = vec![0usize; n];
    let mut bi = vec![0usize; n];
    let mut pre = vec![0.0f64; n + 1];
    let mut suf = vec![0.0f64; n + 1];

    for tf in terms {
        for tg in terms {
            let cc = tf.coeff * tg.coeff;
            for l in 0..n {
                ai[l] = tf.base * n + tf.assign[l];
                bi[l] = tg.base * n + tg.assign[l];
                sl[l] = con.s_at(ai[l], bi[l]);
            }
            pre[0] = 1.0;
            for l in 0..n {
                pre[l + 1] = pre[l] * sl[l];
            }
            suf[n] = 1.0;
            for l in (0..n).rev() {
                suf[l] = suf[l + 1] * sl[l];
            }

            // norm
            for l in 0..n {
                adj_s[ai[l] * arrays + bi[l]] += adj_norm * cc * pre[l] * suf[l + 1];
            }

            // kinetic and one-body
            for l in 0..n {
                let excl = pre[l] * suf[l + 1];
                let id = ai[l] * arrays + bi[l];
                adj_d[id] += half_quad * cc * excl;
                adj_v[id] += adj_quad * cc * excl;
                let dl = con.d[id];
                let vl = con.v[id];
                for m in 0..n {
                    if m == l {
                        continue;
                    }
                    let mut prod = 1.0;
                    for q in 0..n {
                        if q != l && q != m {
                            prod *= sl[q];
                        }
                    }
                    adj_s[ai[m] * arrays + bi[m]] +=
                        cc * prod * (half_quad * dl + adj_quad * vl);
                }
            }

            // two-body
            if n >= 2 {
                for l in 0..n {
                    for m in l + 1..n {
                        let mut excl = 1.0;
                        for q in 0..n {
                            if q != l && q != m {
                                excl *= sl[q];
                            }
                        }
                        let d_pair = (ai[l], bi[l]);
                        let e_pair = (ai[m], bi[m]);
                        let t2 = con.two_body_at(d_pair, e_pair, n_nodes);
                        let adj_t2 = adj_quad * cc * excl;
                        let rd = con.row_of[d_pair.0 * arrays + d_pair.1];
                        let re = con.row_of[e_pair.0 * arrays + e_pair.1];
                        debug_assert!(rd != NO_ROW && re != NO_ROW);
                        {
                            let zr = &con.u[re * n_nodes..(re + 1) * n_nodes];
                            let dst = &mut adj_z[rd * n_nodes..(rd + 1) * n_nodes];
                            for x in 0..n_nodes {
                                dst[x] += adj_t2 * zr[x];
                            }
                        }
                        {
                            let zr = &con.z[rd * n_nodes..(rd + 1) * n_nodes];
                            let dst = &mut adj_u[re * n_nodes..(re + 1) * n_nodes];
                            for x in 0..n_nodes {
                                dst[x] += adj_t2 * zr[x];
                            }
                        }
                        // spectator overlaps
                        for q in 0..n {
                            if q == l || q == m {
                                continue;
                            }
                            let mut prod = 1.0;
                            for r in 0..n {
                                if r != l && r != m && r != q {
                                    prod *= sl[r];
                                }
                            }
                            adj_s[ai[q] * arrays + bi[q]] += adj_quad * cc * t2 * prod;
                        }
                    }
                }
            }

            // swap penalties
            if adj_swap != 0.0 {
                for i in 0..n {
                    for j in i + 1..n {
                        let map = |l: usize| {
                            if l == i {
                                j
                            } else if l == j {
                                i
                            } else {
                                l
                            }
                        };
                        let mut sw = vec![0.0f64; n];
                        for l in 0..n {
                            sw[l] = con.s_at(ai[l], bi[map(l)]);
                        }
                        for l in 0..n {
                            let mut prod = 1.0;
                            for m in 0..n {
                                if m != l {
                                    prod *= sw[m];
                                }
                            }
                            adj_s[ai[l] * arrays + bi[map(l)]] += adj_swap * cc * prod;
                        }
                    }
                }
            }
        }
    }
}
