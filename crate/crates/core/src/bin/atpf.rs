//! Command-line interface: analytic bound tables, heuristic rank estimation,
//! TPF roundtrips, and the variational training experiments.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on numeric/runtime
//! failures.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use atpf::als::{rank_search, AlsOptions};
use atpf::antisym::{basis_tensor, determinant_tensor};
use atpf::bounds::{antisym_rank_bounds, asymptotic_lower_bound, det_rank_bounds};
use atpf::chart::{line_chart, Series};
use atpf::error::Error;
use atpf::multi_index::MultiIndex;
use atpf::quad::gauss_legendre_grid;
use atpf::system::System1D;
use atpf::tensor::DenseTensor;
use atpf::tpf::{FunctionBasis, TpfFunction};
use atpf::train::{init_model, read_config_from_path, train_from, Schedule, TrainTrace};
use atpf::LossKind;

#[derive(Parser)]
#[command(
    name = "atpf",
    about = "Antisymmetric tensor product functions: rank bounds, CP rank estimation, \
             and 1D soft-Coulomb variational experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print analytic CP-rank bounds for the order-N determinant tensor and,
    /// with --k, for the antisymmetric space of dimension K
    Bounds {
        /// Tensor order (electron count)
        #[arg(long)]
        n: usize,
        /// Ambient dimension K >= N
        #[arg(long)]
        k: Option<usize>,
        /// Also write the table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Heuristic CP-rank estimation by best-of-restarts ALS
    RankEst {
        #[command(flatten)]
        source: TensorSource,
        /// Ambient dimension for --basis (default: the largest index)
        #[arg(long)]
        k: Option<usize>,
        /// Largest rank to try
        #[arg(long, default_value_t = 6)]
        pmax: usize,
        /// Residual at which a fit counts as exact
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_sweeps: usize,
        /// Write the rank report CSV here (default: stdout only)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a basis tensor E_k (or determinant tensor) in the tensor text
    /// format
    Basis {
        #[command(flatten)]
        source: BasisSource,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the TPF <-> coefficient-tensor correspondence on a random or
    /// file-loaded TPF: pointwise evaluation agreement and CP roundtrip
    Roundtrip {
        /// TPF file to check (default: a random TPF)
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Basis size (monomial basis on [-1, 1])
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluation points for the pointwise check
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Train one run from a config file and a system file
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        system: PathBuf,
        /// Output directory (default: $ATPF_OUT_DIR or `.`)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Paired penalized/antisymmetrized runs from shared initializations
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        system: PathBuf,
        /// Comma-separated seeds, one paired run each
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        /// Override the config schedule
        #[arg(long)]
        schedule: Option<String>,
        /// Inverse-time alpha (with --schedule inverse_time)
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Bound table over a range of orders, as CSV
    Report {
        /// Largest order
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        /// Ambient dimension for the antisymmetric upper bound (default: K = N)
        #[arg(long)]
        k: Option<usize>,
        /// Output path (default: stdout)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TensorSource {
    /// Determinant tensor of this order
    #[arg(long)]
    det: Option<usize>,
    /// Basis tensor from a comma-separated multi-index (needs --dim)
    #[arg(long, value_delimiter = ',')]
    basis: Option<Vec<usize>>,
    /// Read a tensor text file
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct BasisSource {
    /// Comma-separated strictly increasing multi-index
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    /// Determinant tensor of this order
    #[arg(long)]
    det: Option<usize>,
    /// Ambient dimension K (with --indices)
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    /// Quadrature box, two values: lower upper
    #[arg(long = "box", num_args = 2, default_values_t = [-10.0, 10.0])]
    box_: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    subintervals: usize,
    #[arg(long, default_value_t = 30)]
    qpoints: usize,
}

impl GridArgs {
    fn build(&self) -> atpf::Result<atpf::QuadratureGrid> {
        gauss_legendre_grid(self.box_[0], self.box_[1], self.subintervals, self.qpoints)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ATPF_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(path: &Path, contents: &str) -> atpf::Result<()> {
    if let Some(parent) = path.parent()
        && !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    std::fs::write(path, contents)?;
    Ok(())
}

fn run(cli: Cli) -> atpf::Result<()> {
    match cli.command {
        Command::Bounds { n, k, csv } => cmd_bounds(n, k, csv),
        Command::RankEst {
            source,
            k,
            pmax,
            tol,
            restarts,
            seed,
            max_sweeps,
            out,
        } => cmd_rank_est(source, k, pmax, tol, restarts, seed, max_sweeps, out),
        Command::Basis { source, out } => cmd_basis(source, out),
        Command::Roundtrip {
            file,
            order,
            dim,
            rank,
            seed,
            points,
        } => cmd_roundtrip(file, order, dim, rank, seed, points),
        Command::Train {
            config,
            system,
            out,
            grid,
        } => cmd_train(config, system, out, grid),
        Command::Compare {
            config,
            system,
            seeds,
            schedule,
            alpha,
            out,
            grid,
        } => cmd_compare(config, system, seeds, schedule, alpha, out, grid),
        Command::Report { nmax, k, csv } => cmd_report(nmax, k, csv),
    }
}

fn cmd_bounds(n: usize, k: Option<usize>, csv: Option<PathBuf>) -> atpf::Result<()> {
    let (lower, upper) = det_rank_bounds(n)?;
    let (exact, estimate) = asymptotic_lower_bound(n)?;
    println!("order N = {n}");
    println!("determinant tensor rank bounds: lower {lower}, upper {upper}");
    println!("asymptotic lower bound 2^N/sqrt(N): {estimate:.4} (exact binom: {exact})");
    println!(
        "any nonzero antisymmetric TPF/TNN of any fixed architecture at this order \
         needs rank >= {lower}"
    );
    let mut dim_info = None;
    if let Some(k) = k {
        let (alower, aupper) = antisym_rank_bounds(n, k)?;
        let dim = binomial(k, n);
        println!("antisymmetric space (N = {n}, K = {k}): dim binom(K,N) = {dim}");
        println!("antisymmetric tensor rank bounds: lower {alower}, upper {aupper}");
        dim_info = Some((k, alower, aupper, dim));
    }
    if let Some(path) = csv {
        let mut text = String::from("n,k,lower,upper,asymptotic,space_dim\n");
        match dim_info {
            Some((k, alower, aupper, dim)) => {
                text.push_str(&format!("{n},{k},{alower},{aupper},{estimate:e},{dim}\n"));
            }
            None => text.push_str(&format!("{n},,{lower},{upper},{estimate:e},\n")),
        }
        write_file(&path, &text)?;
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn load_tensor(source: &TensorSource, k: Option<usize>) -> atpf::Result<DenseTensor> {
    match (&source.det, &source.basis, &source.file) {
        (Some(n), None, None) => determinant_tensor(*n),
        (None, Some(indices), None) => {
            let dim = match k {
                Some(k) => k,
                None => indices
                    .iter()
                    .max()
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument("empty multi-index".into()))?,
            };
            let idx = MultiIndex::new(indices.clone())?;
            basis_tensor(&idx, dim)
        }
        (None, None, Some(path)) => DenseTensor::read_from_path(path),
        _ => unreachable!("clap group enforces exactly one source"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_rank_est(
    source: TensorSource,
    k: Option<usize>,
    pmax: usize,
    tol: f64,
    restarts: usize,
    seed: u64,
    max_sweeps: usize,
    out: Option<PathBuf>,
) -> atpf::Result<()> {
    let tensor = load_tensor(&source, k)?;
    let opts = AlsOptions {
        rel_tol: tol,
        restarts,
        seed,
        max_sweeps,
        ..AlsOptions::default()
    };
    let report = rank_search(&tensor, pmax, &opts)?;
    match report.estimated_rank {
        Some(rank) => println!("estimated rank: {rank} (heuristic; ALS failure is not a certificate)"),
        None => println!(
            "estimated rank: not found <= {pmax} (heuristic; analytic lower bound {})",
            report.lower_bound
        ),
    }
    let csv = report.to_csv();
    print!("{csv}");
    if let Some(path) = out {
        write_file(&path, &csv)?;
    }
    Ok(())
}

fn cmd_basis(source: BasisSource, out: Option<PathBuf>) -> atpf::Result<()> {
    let tensor = match (&source.indices, &source.det) {
        (Some(indices), None) => {
            let idx = MultiIndex::new(indices.clone())?;
            let dim = source.dim.unwrap_or_else(|| {
                indices.iter().max().copied().unwrap_or(1)
            });
            basis_tensor(&idx, dim)?
        }
        (None, Some(n)) => determinant_tensor(*n)?,
        _ => {
            return Err(Error::InvalidArgument(
                "specify exactly one of --indices or --det".into(),
            ))
        }
    };
    match out {
        Some(path) => tensor.write_to_path(path)?,
        None => {
            let mut buf = Vec::new();
            tensor.write_text(&mut buf)?;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(())
}

fn cmd_roundtrip(
    file: Option<PathBuf>,
    order: usize,
    dim: usize,
    rank: usize,
    seed: u64,
    points: usize,
) -> atpf::Result<()> {
    let (f, basis) = match file {
        Some(path) => {
            let reader = std::io::BufReader::new(std::fs::File::open(&path)?);
            // header carries K; probe it to build the matching monomial basis
            let mut header = String::new();
            std::io::BufRead::read_line(
                &mut std::io::BufReader::new(std::fs::File::open(&path)?),
                &mut header,
            )?;
            let k: usize = header
                .split_whitespace()
                .nth(2)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: "bad tpf header".into(),
                })?;
            let basis = FunctionBasis::monomials(k, -1.0, 1.0)?;
            (TpfFunction::read_text(reader, basis.clone())?, basis)
        }
        None => {
            let basis = FunctionBasis::monomials(dim, -1.0, 1.0)?;
            (
                TpfFunction::random(basis.clone(), order, rank, seed)?,
                basis,
            )
        }
    };
    let order = f.order();
    let tensor = f.to_tensor()?;
    println!(
        "tpf: order {order}, basis size {}, rank {}",
        basis.size(),
        f.rank().unwrap_or(0)
    );

    // pointwise agreement between the TPF and its coefficient tensor
    let tuples = basis.sample_tuples(points, order, seed.wrapping_add(1))?;
    let direct = f.evaluate(&tuples)?;
    let via_tensor = TpfFunction::from_dense(basis.clone(), tensor.clone())?.evaluate(&tuples)?;
    let scale = direct.iter().map(|z| z.norm()).fold(1e-12, f64::max);
    let worst = direct
        .iter()
        .zip(&via_tensor)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    println!("pointwise |tpf - tensor expansion| / max|f| over {points} points: {worst:.3e}");

    // CP roundtrip: tensor_to_tpf then back
    let cp = f
        .cp()
        .ok_or_else(|| Error::InvalidArgument("roundtrip needs a CP representation".into()))?;
    let back = atpf::tpf::tensor_to_tpf(cp.clone(), basis)?.to_tensor()?;
    let diff = back.max_abs_diff(&tensor)?;
    println!("roundtrip coefficient-tensor max difference: {diff:.3e}");
    if worst > 1e-10 || diff > 1e-12 {
        return Err(Error::Numeric(format!(
            "roundtrip outside tolerance (pointwise {worst:.3e}, tensor {diff:.3e})"
        )));
    }
    println!("roundtrip OK");
    Ok(())
}

fn cmd_train(
    config_path: PathBuf,
    system_path: PathBuf,
    out: Option<PathBuf>,
    grid_args: GridArgs,
) -> atpf::Result<()> {
    let (config, arch_spec) = read_config_from_path(&config_path)?;
    let system = System1D::read_from_path(&system_path)?;
    let grid = grid_args.build()?;
    let arch = arch_spec.with_modes(system.n_electrons());
    let model = init_model(&arch, &system, &grid, &config)?;
    let trace = train_from(model, &system, &grid, &config)?;

    let dir = out_dir(out);
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join("trace.csv");
    write_file(&csv_path, &trace.to_csv())?;
    let points: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .map(|r| (r.iter as f64, r.loss))
        .collect();
    let svg = line_chart(
        "training loss",
        "iteration",
        "loss",
        &[Series {
            label: match config.loss {
                LossKind::Penalized => "penalized",
                LossKind::Antisymmetrized => "antisymmetrized",
            },
            points: &points,
        }],
    );
    write_file(&dir.join("loss.svg"), &svg)?;

    let last = trace.final_row();
    println!(
        "final: iter {} loss {:.8} energy {:.8} penalty {:.6}",
        last.iter, last.loss, last.energy, last.penalty
    );
    println!("trace: {}", csv_path.display());
    if trace.diverged {
        return Err(Error::Numeric(format!(
            "training diverged at iteration {} (|loss| > 1e8); trace retained",
            last.iter
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    config_path: PathBuf,
    system_path: PathBuf,
    seeds: Vec<u64>,
    schedule: Option<String>,
    alpha: Option<f64>,
    out: Option<PathBuf>,
    grid_args: GridArgs,
) -> atpf::Result<()> {
    let (mut config, arch_spec) = read_config_from_path(&config_path)?;
    match schedule.as_deref() {
        None => {}
        Some("exp_decay") => {
            config.schedule = Schedule::ExpDecay {
                rate: 0.7,
                step: 3000,
            }
        }
        Some("inverse_time") => {
            config.schedule = Schedule::InverseTime {
                alpha: alpha.unwrap_or(1e-3),
            }
        }
        Some(other) => {
            return Err(Error::InvalidArgument(format!(
                "unknown schedule `{other}` (exp_decay|inverse_time)"
            )))
        }
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let system = System1D::read_from_path(&system_path)?;
    let grid = grid_args.build()?;
    let arch = arch_spec.with_modes(system.n_electrons());
    let dir = out_dir(out);
    std::fs::create_dir_all(&dir)?;

    let mut anti_lower_count = 0usize;
    for &seed in &seeds {
        let anti_cfg = atpf::train::TrainConfig {
            seed,
            loss: LossKind::Antisymmetrized,
            ..config.clone()
        };
        let pen_cfg = atpf::train::TrainConfig {
            seed,
            loss: LossKind::Penalized,
            ..config.clone()
        };
        // shared initialization (drawn under the antisymmetrized loss's
        // degeneracy redraw rule)
        let model = init_model(&arch, &system, &grid, &anti_cfg)?;
        let pen = train_from(model.clone(), &system, &grid, &pen_cfg)?;
        let anti = train_from(model, &system, &grid, &anti_cfg)?;

        let pen_path = dir.join(format!("trace_penalized_seed{seed}.csv"));
        let anti_path = dir.join(format!("trace_antisymmetrized_seed{seed}.csv"));
        write_file(&pen_path, &pen.to_csv())?;
        write_file(&anti_path, &anti.to_csv())?;

        let pen_pts: Vec<(f64, f64)> =
            pen.rows.iter().map(|r| (r.iter as f64, r.energy)).collect();
        let anti_pts: Vec<(f64, f64)> =
            anti.rows.iter().map(|r| (r.iter as f64, r.energy)).collect();
        let svg = line_chart(
            &format!("energy, seed {seed}"),
            "iteration",
            "energy",
            &[
                Series {
                    label: "penalized",
                    points: &pen_pts,
                },
                Series {
                    label: "antisymmetrized",
                    points: &anti_pts,
                },
            ],
        );
        write_file(&dir.join(format!("compare_seed{seed}.svg")), &svg)?;

        let pe = pen.final_row().energy;
        let ae = anti.final_row().energy;
        let lower = ae < pe;
        if lower {
            anti_lower_count += 1;
        }
        println!(
            "seed {seed}: penalized energy {pe:.8}, antisymmetrized energy {ae:.8}, \
             antisymmetrized ends lower: {lower}"
        );
        ensure_equal_rows(&pen, &anti)?;
    }
    println!(
        "antisymmetrized final energy below penalized on {anti_lower_count}/{} seeds",
        seeds.len()
    );
    Ok(())
}

fn ensure_equal_rows(a: &TrainTrace, b: &TrainTrace) -> atpf::Result<()> {
    if a.rows.len() != b.rows.len() {
        return Err(Error::Numeric(format!(
            "paired traces have different row counts ({} vs {})",
            a.rows.len(),
            b.rows.len()
        )));
    }
    Ok(())
}

fn cmd_report(nmax: usize, k: Option<usize>, csv: Option<PathBuf>) -> atpf::Result<()> {
    let mut text = String::from("n,lower,det_upper,antisym_upper,asymptotic\n");
    for n in 1..=nmax {
        let (lower, upper) = det_rank_bounds(n)?;
        let (_, estimate) = asymptotic_lower_bound(n)?;
        let antisym_upper = match k {
            Some(k) if k >= n => Some(antisym_rank_bounds(n, k)?.1),
            Some(_) => None,
            None => Some(antisym_rank_bounds(n, n)?.1),
        };
        match antisym_upper {
            Some(au) => text.push_str(&format!("{n},{lower},{upper},{au},{estimate:e}\n")),
            None => text.push_str(&format!("{n},{lower},{upper},,{estimate:e}\n")),
        }
    }
    match csv {
        Some(path) => write_file(&path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
