//! Tensor neural network: one small fully connected subnetwork per mode,
//! each emitting the `p` factor values of that mode.
//!
//! Subnetwork `j` maps a scalar coordinate through `L` tanh hidden layers of
//! width `m` to a linear output layer with `p` rows, so that its outputs are
//! `(psi_{1j}(r), ..., psi_{pj}(r))`. Evaluation on a grid also produces
//! exact first derivatives by forward chain rule (`tanh' = 1 - tanh^2`);
//! ansatz derivatives are never approximated numerically.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad::QuadratureGrid;
use crate::sep::SeparableFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TnnArch {
    /// Number of modes (`d * N` with `d = 1`, so the electron count).
    pub n_modes: usize,
    /// Separation rank `p`: outputs per subnetwork.
    pub rank: usize,
    /// Hidden layers per subnetwork.
    pub hidden_layers: usize,
    /// Hidden width `m`.
    pub width: usize,
    pub activation: Activation,
}

impl TnnArch {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 1 || self.rank < 1 || self.hidden_layers < 1 || self.width < 1 {
            return Err(Error::arg(format!("architecture fields must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Parameters in one subnetwork.
    pub fn params_per_mode(&self) -> usize {
        let mut count = self.width + self.width; // input layer
        for _ in 1..self.hidden_layers {
            count += self.width * self.width + self.width;
        }
        count + self.rank * self.width + self.rank // output layer
    }

    pub fn param_count(&self) -> usize {
        self.n_modes * self.params_per_mode()
    }
}

/// A dense layer `z = W a + b` with row-major weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TnnModel {
    pub arch: TnnArch,
    /// Per mode: `hidden_layers` tanh layers followed by the linear output.
    pub modes: Vec<Vec<Layer>>,
}

fn layer_shapes(arch: &TnnArch) -> Vec<(usize, usize)> {
    let mut shapes = vec![(arch.width, 1)];
    for _ in 1..arch.hidden_layers {
        shapes.push((arch.width, arch.width));
    }
    shapes.push((arch.rank, arch.width));
    shapes
}

/// Initializes all parameters uniformly on `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`
/// per layer; deterministic per seed.
pub fn tnn_init(arch: &TnnArch, seed: u64) -> Result<TnnModel> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = layer_shapes(arch);
    let modes = (0..arch.n_modes)
        .map(|_| {
            shapes
                .iter()
                .map(|&(rows, cols)| {
                    let bound = 1.0 / (cols as f64).sqrt();
                    Layer {
                        rows,
                        cols,
                        weights: (0..rows * cols)
                            .map(|_| rng.random_range(-bound..bound))
                            .collect(),
                        bias: (0..rows).map(|_| rng.random_range(-bound..bound)).collect(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(TnnModel { arch: *arch, modes })
}

impl TnnModel {
    /// All-zero parameters; the network is then the constant zero function.
    pub fn zeros(arch: &TnnArch) -> Result<TnnModel> {
        arch.validate()?;
        let shapes = layer_shapes(arch);
        let modes = (0..arch.n_modes)
            .map(|_| {
                shapes
                    .iter()
                    .map(|&(rows, cols)| Layer {
                        rows,
                        cols,
                        weights: vec![0.0; rows * cols],
                        bias: vec![0.0; rows],
                    })
                    .collect()
            })
            .collect();
        Ok(TnnModel { arch: *arch, modes })
    }

    pub fn param_count(&self) -> usize {
        self.arch.param_count()
    }

    /// Canonical flattening: mode-major, layer-major, weights row-major, then
    /// bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for mode in &self.modes {
            for layer in mode {
                out.extend_from_slice(&layer.weights);
                out.extend_from_slice(&layer.bias);
            }
        }
        out
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::dim(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut at = 0usize;
        for mode in &mut self.modes {
            for layer in mode {
                let w = layer.weights.len();
                layer.weights.copy_from_slice(&flat[at..at + w]);
                at += w;
                let b = layer.bias.len();
                layer.bias.copy_from_slice(&flat[at..at + b]);
                at += b;
            }
        }
        Ok(())
    }

    /// Evaluates subnetwork `mode` at a scalar point: the `p` outputs and
    /// their derivatives with respect to the input.
    pub fn eval_mode_at(&self, mode: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
        let layers = &self.modes[mode];
        let mut a = vec![x];
        let mut da = vec![1.0];
        for (li, layer) in layers.iter().enumerate() {
            let mut z = layer.bias.clone();
            let mut dz = vec![0.0; layer.rows];
            for r in 0..layer.rows {
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (c, &w) in row.iter().enumerate() {
                    z[r] += w * a[c];
                    dz[r] += w * da[c];
                }
            }
            if li + 1 < layers.len() {
                a = z.iter().map(|&v| v.tanh()).collect();
                da = a.iter().zip(&dz).map(|(&t, &d)| (1.0 - t * t) * d).collect();
            } else {
                a = z;
                da = dz;
            }
        }
        (a, da)
    }

    /// Evaluates the full TPF `f(r) = sum_i prod_j psi_ij(r_j)` at a point.
    pub fn eval_at(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.arch.n_modes {
            return Err(Error::dim(format!(
                "point has {} coordinates, model has {} modes",
                point.len(),
                self.arch.n_modes
            )));
        }
        let per_mode: Vec<Vec<f64>> = point
            .iter()
            .enumerate()
            .map(|(j, &x)| self.eval_mode_at(j, x).0)
            .collect();
        let mut acc = 0.0;
        for i in 0..self.arch.rank {
            let mut prod = 1.0;
            for mode_vals in &per_mode {
                prod *= mode_vals[i];
            }
            acc += prod;
        }
        Ok(acc)
    }
}

/// Stored forward state of one subnetwork over all grid nodes, consumed by
/// the reverse pass. Layer arrays are `node * width + unit`.
pub(crate) struct ModeTrace {
    /// tanh outputs per hidden layer
    pub a: Vec<Vec<f64>>,
    /// their tangents `da = (1 - a^2) dz`
    pub da: Vec<Vec<f64>>,
    /// pre-activation tangents `dz`
    pub dz: Vec<Vec<f64>>,
}

/// Tabulates all mode factors (and exact derivatives) on the grid.
pub fn tnn_eval_modes(model: &TnnModel, grid: &QuadratureGrid) -> Result<SeparableFunction<f64>> {
    Ok(eval_modes_traced(model, grid)?.0)
}

pub(crate) fn eval_modes_traced(
    model: &TnnModel,
    grid: &QuadratureGrid,
) -> Result<(SeparableFunction<f64>, Vec<ModeTrace>)> {
    model.arch.validate()?;
    let p = model.arch.rank;
    let n_modes = model.arch.n_modes;
    let nodes = grid.nodes();
    let g = nodes.len();

    let mut values = vec![vec![vec![0.0f64; g]; n_modes]; p];
    let mut derivs = vec![vec![vec![0.0f64; g]; n_modes]; p];
    let mut traces = Vec::with_capacity(n_modes);

    for j in 0..n_modes {
        let layers = &model.modes[j];
        let n_hidden = layers.len() - 1;
        let width = model.arch.width;
        let mut trace = ModeTrace {
            a: vec![vec![0.0; g * width]; n_hidden],
            da: vec![vec![0.0; g * width]; n_hidden],
            dz: vec![vec![0.0; g * width]; n_hidden],
        };
        for (xi, &x) in nodes.iter().enumerate() {
            let mut a = vec![x];
            let mut da = vec![1.0];
            for (li, layer) in layers.iter().enumerate() {
                let mut z = layer.bias.clone();
                let mut dz = vec![0.0; layer.rows];
                for r in 0..layer.rows {
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    for (c, &w) in row.iter().enumerate() {
                        z[r] += w * a[c];
                        dz[r] += w * da[c];
                    }
                }
                if li < n_hidden {
                    let mut at = vec![0.0; layer.rows];
                    let mut dat = vec![0.0; layer.rows];
                    for r in 0..layer.rows {
                        let t = z[r].tanh();
                        at[r] = t;
                        dat[r] = (1.0 - t * t) * dz[r];
                        trace.a[li][xi * width + r] = t;
                        trace.da[li][xi * width + r] = dat[r];
                        trace.dz[li][xi * width + r] = dz[r];
                    }
                    a = at;
                    da = dat;
                } else {
                    for i in 0..p {
                        values[i][j][xi] = z[i];
                        derivs[i][j][xi] = dz[i];
                    }
                }
            }
        }
        traces.push(trace);
    }

    let sep = SeparableFunction::new(values, derivs)?;
    Ok((sep, traces))
}

/// Reverse pass through one subnetwork: given loss adjoints of the mode's
/// output values and output derivatives at every node, accumulates the
/// parameter gradient of that mode (layer-major, weights then bias).
pub(crate) fn backprop_mode(
    model: &TnnModel,
    mode: usize,
    nodes: &[f64],
    trace: &ModeTrace,
    adj_values: &[Vec<f64>],
    adj_derivs: &[Vec<f64>],
    grad_out: &mut [f64],
) {
    let layers = &model.modes[mode];
    let n_hidden = layers.len() - 1;
    let width = model.arch.width;
    let p = model.arch.rank;

    // per-layer parameter offsets within grad_out
    let mut offsets = Vec::with_capacity(layers.len());
    let mut at = 0usize;
    for layer in layers {
        offsets.push(at);
        at += layer.weights.len() + layer.bias.len();
    }
    debug_assert_eq!(at, grad_out.len());

    let mut adj_a = vec![0.0f64; width.max(1)];
    let mut adj_da = vec![0.0f64; width.max(1)];

    for (xi, &x) in nodes.iter().enumerate() {
        // output layer: psi = W a_L + b, dpsi = W da_L
        let out_layer = &layers[n_hidden];
        let out_off = offsets[n_hidden];
        let (a_prev, da_prev): (&[f64], &[f64]) = if n_hidden == 0 {
            (std::slice::from_ref(&x), &[1.0])
        } else {
            (
                &trace.a[n_hidden - 1][xi * width..(xi + 1) * width],
                &trace.da[n_hidden - 1][xi * width..(xi + 1) * width],
            )
        };
        let cols = out_layer.cols;
        for v in adj_a.iter_mut() {
            *v = 0.0;
        }
        for v in adj_da.iter_mut() {
            *v = 0.0;
        }
        for i in 0..p {
            let gpsi = adj_values[i][xi];
            let gdpsi = adj_derivs[i][xi];
            if gpsi == 0.0 && gdpsi == 0.0 {
                continue;
            }
            let row = &out_layer.weights[i * cols..(i + 1) * cols];
            let wrow = &mut grad_out[out_off + i * cols..out_off + (i + 1) * cols];
            for c in 0..cols {
                wrow[c] += gpsi * a_prev[c] + gdpsi * da_prev[c];
                adj_a[c] += row[c] * gpsi;
                adj_da[c] += row[c] * gdpsi;
            }
            grad_out[out_off + p * cols + i] += gpsi;
        }

        // hidden layers, deepest first
        for li in (0..n_hidden).rev() {
            let layer = &layers[li];
            let off = offsets[li];
            let cols = layer.cols;
            let a_here = &trace.a[li][xi * width..(xi + 1) * width];
            let dz_here = &trace.dz[li][xi * width..(xi + 1) * width];
            let (a_prev, da_prev): (&[f64], &[f64]) = if li == 0 {
                (std::slice::from_ref(&x), &[1.0])
            } else {
                (
                    &trace.a[li - 1][xi * width..(xi + 1) * width],
                    &trace.da[li - 1][xi * width..(xi + 1) * width],
                )
            };
            let mut next_adj_a = vec![0.0f64; cols];
            let mut next_adj_da = vec![0.0f64; cols];
            for r in 0..layer.rows {
                let t = a_here[r];
                let sech2 = 1.0 - t * t;
                // a = tanh(z), da = sech2 * dz
                let adj_z = adj_a[r] * sech2 + adj_da[r] * (-2.0 * t * sech2 * dz_here[r]);
                let adj_dz = adj_da[r] * sech2;
                let row = &layer.weights[r * cols..(r + 1) * cols];
                let wrow = &mut grad_out[off + r * cols..off + (r + 1) * cols];
                for c in 0..cols {
                    wrow[c] += adj_z * a_prev[c] + adj_dz * da_prev[c];
                    next_adj_a[c] += row[c] * adj_z;
                    next_adj_da[c] += row[c] * adj_dz;
                }
                grad_out[off + layer.rows * cols + r] += adj_z;
            }
            adj_a[..cols].copy_from_slice(&next_adj_a);
            adj_da[..cols].copy_from_slice(&next_adj_da);
        }
    }
}
