//! Scalar abstraction over `f64` and `Complex64` for the contraction kernels.
//!
//! The quadrature contractions are generic so that the physically complex
//! inner-product machinery and the real-parameter network trainer share one
//! implementation. The `gemm` hook routes the hot matrix products through
//! nalgebra, which dispatches `f64` to its blocked kernel.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + std::ops::MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn finite(self) -> bool;

    /// Row-major `(m x k) * (k x n) -> (m x n)`.
    fn gemm(m: usize, k: usize, n: usize, a: &[Self], b: &[Self]) -> Vec<Self>;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn finite(self) -> bool {
        self.is_finite()
    }

    fn gemm(m: usize, k: usize, n: usize, a: &[Self], b: &[Self]) -> Vec<Self> {
        debug_assert_eq!(a.len(), m * k);
        debug_assert_eq!(b.len(), k * n);
        // row-major slices reinterpret as column-major transposes:
        // C^T = B^T A^T, and C^T column-major is exactly C row-major.
        let at = DMatrix::<f64>::from_column_slice(k, m, a);
        let bt = DMatrix::<f64>::from_column_slice(n, k, b);
        let ct = bt * at;
        ct.as_slice().to_vec()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::ZERO
    }
    fn one() -> Self {
        Complex64::ONE
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn gemm(m: usize, k: usize, n: usize, a: &[Self], b: &[Self]) -> Vec<Self> {
        debug_assert_eq!(a.len(), m * k);
        debug_assert_eq!(b.len(), k * n);
        let at = DMatrix::<Complex64>::from_column_slice(k, m, a);
        let bt = DMatrix::<Complex64>::from_column_slice(n, k, b);
        let ct = bt * at;
        ct.as_slice().to_vec()
    }
}
