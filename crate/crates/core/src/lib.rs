//! Antisymmetric tensors, CP-rank estimation, tensor product functions, and a
//! 1D soft-Coulomb variational solver built on tensor neural networks.
//!
//! The crate is organized around four layers:
//!
//! * dense complex tensors with antisymmetrization, the antisymmetric basis,
//!   and CP-format plumbing ([`tensor`], [`antisym`], [`cp`]);
//! * ALS-based CP decomposition with heuristic rank search and exact analytic
//!   rank bounds ([`als`], [`bounds`]);
//! * tensor product functions over finite function bases, including the
//!   TPF-rank/CP-rank correspondence and the Slater construction ([`tpf`]);
//! * composite Gauss–Legendre quadrature, soft-Coulomb energy functionals for
//!   separable functions, and a tensor-neural-network trainer with an exact
//!   reverse-mode gradient engine ([`quad`], [`system`], [`sep`], [`tnn`],
//!   [`grad`], [`train`]).
//!
//! The `atpf` binary wires everything into a CLI; see the README.

pub mod als;
pub mod antisym;
pub mod bounds;
pub mod chart;
pub mod cp;
pub mod error;
pub mod grad;
pub mod multi_index;
pub mod perm;
pub mod quad;
pub mod scalar;
pub mod sep;
pub mod system;
pub mod tensor;
pub mod tnn;
pub mod tpf;
pub mod train;

pub use als::{als_fit, rank_search, AlsOptions, RankReport};
pub use antisym::{
    antisym_expand, antisymmetrize, basis_tensor, determinant_tensor, support_restrict,
};
pub use bounds::{antisym_rank_bounds, asymptotic_lower_bound, det_rank_bounds};
pub use cp::CpDecomposition;
pub use error::{Error, Result};
pub use grad::{gradient, loss_antisymmetrized, loss_penalized, LossKind, LossValue};
pub use multi_index::MultiIndex;
pub use perm::Permutation;
pub use quad::{gauss_legendre_grid, QuadratureGrid};
pub use scalar::Scalar;
pub use sep::{EnergyTerms, SeparableFunction};
pub use system::{two_body_potential, Nucleus, System1D};
pub use tensor::DenseTensor;
pub use tnn::{tnn_init, TnnArch, TnnModel};
pub use tpf::{gram_independence_check, slater_tpf, FunctionBasis, TpfFunction};
pub use train::{lr_at, train, Schedule, TrainConfig, TrainTrace};

/// Largest tensor order handled by the dense permutation machinery.
pub const MAX_ORDER: usize = 8;

/// Hard cap on dense tensor size (product of mode dimensions).
pub const MAX_DENSE_LEN: usize = 10_000_000;
