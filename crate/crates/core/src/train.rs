//! Adam training loop for the variational losses, with the exponential-decay
//! and inverse-time learning-rate schedules.

use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grad::{evaluate, LossKind};
use crate::quad::QuadratureGrid;
use crate::sep::EnergyWorkspace;
use crate::system::System1D;
use crate::tnn::{tnn_init, Activation, TnnArch, TnnModel};

/// Learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `lr_k = rate^floor(k / step) * lr0` (default: rate 0.7,
    /// step 3000).
    ExpDecay { rate: f64, step: usize },
    /// `lr_k = lr0 / (1 + alpha * k)`.
    InverseTime { alpha: f64 },
}

/// Hyperparameters of one training run. Adam moment constants default to the
/// conventional `(0.9, 0.999, 1e-8)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub lr0: f64,
    pub schedule: Schedule,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Swap-penalty weight for the penalized loss.
    pub penalty_beta: f64,
    pub seed: u64,
    pub loss: LossKind,
    /// Trace rows are logged every this many iterations (plus the final one).
    pub eval_stride: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 5000,
            lr0: 1e-3,
            schedule: Schedule::ExpDecay {
                rate: 0.7,
                step: 3000,
            },
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            penalty_beta: 200.0,
            seed: 0,
            loss: LossKind::Penalized,
            eval_stride: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr0 <= 0.0 {
            return Err(Error::arg("initial learning rate must be positive"));
        }
        if self.penalty_beta < 0.0 {
            return Err(Error::arg("penalty weight must be non-negative"));
        }
        if self.eval_stride < 1 {
            return Err(Error::arg("eval stride must be at least 1"));
        }
        match self.schedule {
            Schedule::ExpDecay { rate, step } => {
                if rate <= 0.0 || rate > 1.0 || step < 1 {
                    return Err(Error::arg("exp decay needs 0 < rate <= 1 and step >= 1"));
                }
            }
            Schedule::InverseTime { alpha } => {
                if alpha < 0.0 {
                    return Err(Error::arg("inverse-time alpha must be non-negative"));
                }
            }
        }
        Ok(())
    }
}

/// Exact learning rate at iteration `k`.
pub fn lr_at(k: usize, config: &TrainConfig) -> f64 {
    match config.schedule {
        Schedule::ExpDecay { rate, step } => rate.powi((k / step) as i32) * config.lr0,
        Schedule::InverseTime { alpha } => config.lr0 / (1.0 + alpha * k as f64),
    }
}

/// One logged training point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub loss: f64,
    pub energy: f64,
    pub penalty: f64,
    pub lr: f64,
    pub seconds: f64,
}

/// Per-iteration records of a run. `diverged` marks an aborted run
/// (`|loss| > 1e8`); the rows then hold the trace up to the abort.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
    pub diverged: bool,
    /// Seed actually used (may differ from the configured one after
    /// degenerate-antisymmetrization redraws).
    pub seed_used: u64,
}

impl TrainTrace {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("trace always has the initial row")
    }

    /// CSV with the fixed header `iter,loss,energy,penalty,lr,seconds`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iter,loss,energy,penalty,lr,seconds")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:.3}",
                row.iter, row.loss, row.energy, row.penalty, row.lr, row.seconds
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("vec write cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Divergence guard on the loss magnitude.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

/// Relative threshold under which the antisymmetrized initial ansatz counts
/// as annihilated and the seed is redrawn.
const DEGENERATE_INIT_RATIO: f64 = 1e-10;
const MAX_SEED_RETRIES: u64 = 5;

/// Trains with Adam under the configured schedule, logging every
/// `eval_stride` iterations plus the final point. Deterministic per seed.
pub fn train(
    arch: &TnnArch,
    system: &System1D,
    grid: &QuadratureGrid,
    config: &TrainConfig,
) -> Result<TrainTrace> {
    config.validate()?;
    let model = init_model(arch, system, grid, config)?;
    train_from(model, system, grid, config)
}

/// [`train`] starting from an explicit model (shared-initialization
/// comparisons); the degenerate-init redraw is skipped.
pub fn train_from(
    model: TnnModel,
    system: &System1D,
    grid: &QuadratureGrid,
    config: &TrainConfig,
) -> Result<TrainTrace> {
    Ok(train_with_model(model, system, grid, config)?.0)
}

/// [`train_from`] that also returns the trained model.
pub fn train_with_model(
    mut model: TnnModel,
    system: &System1D,
    grid: &QuadratureGrid,
    config: &TrainConfig,
) -> Result<(TrainTrace, TnnModel)> {
    config.validate()?;
    let seed_used = config.seed;
    let ws = EnergyWorkspace::new(grid);
    let start = Instant::now();

    let count = model.param_count();
    let mut params = model.to_flat();
    let mut m = vec![0.0f64; count];
    let mut v = vec![0.0f64; count];
    let mut rows = Vec::new();
    let mut diverged = false;

    for k in 0..=config.iterations {
        let last = k == config.iterations;
        let (value, grad) = evaluate(
            config.loss,
            &model,
            system,
            grid,
            config.penalty_beta,
            &ws,
            !last,
        )?;
        let lr = lr_at(k, config);
        if k % config.eval_stride == 0 || last {
            rows.push(TraceRow {
                iter: k,
                loss: value.loss,
                energy: value.energy,
                penalty: value.penalty,
                lr,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        if value.loss.abs() > DIVERGENCE_LIMIT {
            if rows.last().map(|r| r.iter) != Some(k) {
                rows.push(TraceRow {
                    iter: k,
                    loss: value.loss,
                    energy: value.energy,
                    penalty: value.penalty,
                    lr,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
            diverged = true;
            break;
        }
        if last {
            break;
        }
        let grad = grad.expect("gradient requested for non-final iterations");
        let t = (k + 1) as i32;
        let bc1 = 1.0 - config.adam_beta1.powi(t);
        let bc2 = 1.0 - config.adam_beta2.powi(t);
        for i in 0..count {
            m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * grad[i];
            v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            params[i] -= lr * mhat / (vhat.sqrt() + config.adam_epsilon);
        }
        model.assign_from_flat(&params)?;
    }

    Ok((
        TrainTrace {
            rows,
            diverged,
            seed_used,
        },
        model,
    ))
}

/// Draws the initial model; for the antisymmetrized loss, redraws the seed
/// (up to 5 retries) while the antisymmetrizer annihilates the ansatz.
pub fn init_model(
    arch: &TnnArch,
    system: &System1D,
    grid: &QuadratureGrid,
    config: &TrainConfig,
) -> Result<TnnModel> {
    if arch.n_modes != system.n_electrons() {
        return Err(Error::dim(format!(
            "architecture has {} modes, system has {} electrons",
            arch.n_modes,
            system.n_electrons()
        )));
    }
    if config.loss == LossKind::Penalized {
        return tnn_init(arch, config.seed);
    }
    let mut last_ratio = f64::NAN;
    for attempt in 0..=MAX_SEED_RETRIES {
        let seed = config.seed.wrapping_add(attempt);
        let model = tnn_init(arch, seed)?;
        let sep = crate::tnn::tnn_eval_modes(&model, grid)?;
        let full = crate::sep::overlap(&sep, &sep, grid)?;
        let anti = sep.antisymmetrized()?;
        let anti_norm = crate::sep::overlap(&anti, &anti, grid)?;
        // compare amplitudes, not squared norms
        let ratio = (anti_norm.max(0.0) / full.max(f64::MIN_POSITIVE)).sqrt();
        if ratio >= DEGENERATE_INIT_RATIO {
            return Ok(model);
        }
        last_ratio = ratio;
    }
    Err(Error::Degenerate(format!(
        "antisymmetrized ansatz annihilated for {} consecutive seeds (last ratio {last_ratio:.3e})",
        MAX_SEED_RETRIES + 1
    )))
}

/// Reads a flat `key=value` config file. Unknown keys are errors; missing
/// keys fall back to the defaults. Architecture keys (`rank`,
/// `hidden_layers`, `width`, `activation`) are returned separately since the
/// mode count comes from the system.
pub fn read_config<R: BufRead>(r: R) -> Result<(TrainConfig, ArchSpec)> {
    let mut config = TrainConfig::default();
    let mut arch = ArchSpec::default();
    let mut exp_rate: Option<f64> = None;
    let mut exp_step: Option<usize> = None;
    let mut alpha: Option<f64> = None;
    let mut schedule: Option<String> = None;
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(no + 1, format!("expected key=value, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::parse(no + 1, format!("bad {what} `{value}`"));
        match key {
            "iterations" => config.iterations = value.parse().map_err(|_| bad("iterations"))?,
            "lr0" => config.lr0 = value.parse().map_err(|_| bad("lr0"))?,
            "schedule" => schedule = Some(value.to_string()),
            "decay_rate" => exp_rate = Some(value.parse().map_err(|_| bad("decay_rate"))?),
            "decay_step" => exp_step = Some(value.parse().map_err(|_| bad("decay_step"))?),
            "alpha" => alpha = Some(value.parse().map_err(|_| bad("alpha"))?),
            "beta" => config.penalty_beta = value.parse().map_err(|_| bad("beta"))?,
            "beta1" => config.adam_beta1 = value.parse().map_err(|_| bad("beta1"))?,
            "beta2" => config.adam_beta2 = value.parse().map_err(|_| bad("beta2"))?,
            "epsilon" => config.adam_epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
            "loss" => {
                config.loss = match value {
                    "penalized" => LossKind::Penalized,
                    "antisymmetrized" => LossKind::Antisymmetrized,
                    _ => return Err(bad("loss (penalized|antisymmetrized)")),
                }
            }
            "eval_stride" => config.eval_stride = value.parse().map_err(|_| bad("eval_stride"))?,
            "rank" => arch.rank = value.parse().map_err(|_| bad("rank"))?,
            "hidden_layers" => {
                arch.hidden_layers = value.parse().map_err(|_| bad("hidden_layers"))?
            }
            "width" => arch.width = value.parse().map_err(|_| bad("width"))?,
            "activation" => {
                if value != "tanh" {
                    return Err(bad("activation (tanh)"));
                }
            }
            _ => return Err(Error::parse(no + 1, format!("unknown key `{key}`"))),
        }
    }
    config.schedule = match schedule.as_deref() {
        None | Some("exp_decay") => Schedule::ExpDecay {
            rate: exp_rate.unwrap_or(0.7),
            step: exp_step.unwrap_or(3000),
        },
        Some("inverse_time") => Schedule::InverseTime {
            alpha: alpha.unwrap_or(1e-3),
        },
        Some(other) => {
            return Err(Error::arg(format!(
                "unknown schedule `{other}` (exp_decay|inverse_time)"
            )))
        }
    };
    config.validate()?;
    Ok((config, arch))
}

pub fn read_config_from_path<P: AsRef<Path>>(path: P) -> Result<(TrainConfig, ArchSpec)> {
    let file = std::fs::File::open(path)?;
    read_config(std::io::BufReader::new(file))
}

/// Architecture fields carried by the config file; the mode count comes from
/// the system's electron count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchSpec {
    pub rank: usize,
    pub hidden_layers: usize,
    pub width: usize,
}

impl Default for ArchSpec {
    fn default() -> Self {
        // Table-scale defaults: p = 4, L = 2, m = 20
        ArchSpec {
            rank: 4,
            hidden_layers: 2,
            width: 20,
        }
    }
}

impl ArchSpec {
    pub fn with_modes(self, n_modes: usize) -> TnnArch {
        TnnArch {
            n_modes,
            rank: self.rank,
            hidden_layers: self.hidden_layers,
            width: self.width,
            activation: Activation::Tanh,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre_grid;

    #[test]
    fn schedule_values() {
        let config = TrainConfig::default();
        assert_eq!(lr_at(0, &config), 1e-3);
        assert_eq!(lr_at(2999, &config), 1e-3);
        assert!((lr_at(3000, &config) - 7e-4).abs() < 1e-19);
        assert!((lr_at(6000, &config) - 0.49e-3).abs() < 1e-19);

        let inv = TrainConfig {
            schedule: Schedule::InverseTime { alpha: 1e-3 },
            ..TrainConfig::default()
        };
        assert_eq!(lr_at(0, &inv), 1e-3);
        assert!((lr_at(1000, &inv) - 5e-4).abs() < 1e-19);
    }

    #[test]
    fn zero_iterations_yields_single_row() {
        let grid = gauss_legendre_grid(-10.0, 10.0, 10, 10).unwrap();
        let sys = System1D::new(
            1,
            vec![crate::system::Nucleus {
                position: 0.0,
                charge: 3.0,
            }],
        )
        .unwrap();
        let arch = ArchSpec {
            rank: 2,
            hidden_layers: 2,
            width: 5,
        }
        .with_modes(1);
        let config = TrainConfig {
            iterations: 0,
            ..TrainConfig::default()
        };
        let trace = train(&arch, &sys, &grid, &config).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].iter, 0);
        assert!(!trace.diverged);
    }

    #[test]
    fn training_is_deterministic() {
        let grid = gauss_legendre_grid(-10.0, 10.0, 10, 10).unwrap();
        let sys = System1D::new(
            1,
            vec![crate::system::Nucleus {
                position: 0.0,
                charge: 3.0,
            }],
        )
        .unwrap();
        let arch = ArchSpec {
            rank: 2,
            hidden_layers: 2,
            width: 5,
        }
        .with_modes(1);
        let config = TrainConfig {
            iterations: 40,
            eval_stride: 10,
            ..TrainConfig::default()
        };
        let a = train(&arch, &sys, &grid, &config).unwrap();
        let b = train(&arch, &sys, &grid, &config).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            // bitwise identity on everything except wall time
            assert_eq!(x.iter, y.iter);
            assert_eq!(x.loss.to_bits(), y.loss.to_bits());
            assert_eq!(x.energy.to_bits(), y.energy.to_bits());
            assert_eq!(x.penalty.to_bits(), y.penalty.to_bits());
            assert_eq!(x.lr.to_bits(), y.lr.to_bits());
        }
    }

    #[test]
    fn short_run_decreases_loss() {
        let grid = gauss_legendre_grid(-10.0, 10.0, 15, 15).unwrap();
        let sys = System1D::new(
            1,
            vec![crate::system::Nucleus {
                position: 0.0,
                charge: 3.0,
            }],
        )
        .unwrap();
        let arch = ArchSpec {
            rank: 2,
            hidden_layers: 2,
            width: 10,
        }
        .with_modes(1);
        let config = TrainConfig {
            iterations: 200,
            eval_stride: 200,
            ..TrainConfig::default()
        };
        let trace = train(&arch, &sys, &grid, &config).unwrap();
        let first = trace.rows.first().unwrap().loss;
        let last = trace.final_row().loss;
        assert!(last < first, "loss did not decrease: {first} -> {last}");
    }

    #[test]
    fn csv_format() {
        let trace = TrainTrace {
            rows: vec![TraceRow {
                iter: 0,
                loss: -1.5,
                energy: -1.5,
                penalty: 0.25,
                lr: 1e-3,
                seconds: 0.125,
            }],
            diverged: false,
            seed_used: 0,
        };
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,loss,energy,penalty,lr,seconds"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,-1.5e0,-1.5e0,2.5e-1,1e-3,"));
    }

    #[test]
    fn config_file_parsing() {
        let text = "\
# comment
iterations = 100
lr0 = 2e-3
schedule = inverse_time
alpha = 1e-3
beta = 150
seed = 9
loss = antisymmetrized
eval_stride = 10
rank = 3
hidden_layers = 2
width = 8
";
        let (config, arch) = read_config(text.as_bytes()).unwrap();
        assert_eq!(config.iterations, 100);
        assert_eq!(config.lr0, 2e-3);
        assert_eq!(config.schedule, Schedule::InverseTime { alpha: 1e-3 });
        assert_eq!(config.penalty_beta, 150.0);
        assert_eq!(config.seed, 9);
        assert_eq!(config.loss, LossKind::Antisymmetrized);
        assert_eq!((arch.rank, arch.hidden_layers, arch.width), (3, 2, 8));

        assert!(read_config("bogus = 1\n".as_bytes()).is_err());
        assert!(read_config("iterations\n".as_bytes()).is_err());
        assert!(read_config("schedule = fancy\n".as_bytes()).is_err());

        let (config, arch) = read_config("".as_bytes()).unwrap();
        assert_eq!(config, TrainConfig::default());
        assert_eq!(arch, ArchSpec::default());
    }
}
