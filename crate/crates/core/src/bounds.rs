//! Analytic CP-rank bounds for determinant and antisymmetric tensors.
//!
//! All bound formulas are evaluated in exact big-integer arithmetic; the
//! `(5/6)^floor(N/3)` factor is handled as an exact rational so that the
//! final floor never suffers a floating-point error (e.g. at `N = 6` the
//! upper bound is `720 * 25/36 = 500` exactly, not `499.99..`).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest order accepted by [`det_rank_bounds`]; beyond this the result is
/// reported as an overflow error rather than silently saturating.
pub const MAX_BOUND_ORDER: usize = 20;

fn big_factorial(n: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

fn big_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `floor(n! * binom * (5/6)^q)` in exact integer arithmetic.
fn upper_bound_floor(n: usize, binom: &BigUint) -> BigUint {
    let q = n / 3;
    let five_q = BigUint::from(5u32).pow(q as u32);
    let six_q = BigUint::from(6u32).pow(q as u32);
    big_factorial(n) * binom * five_q / six_q
}

/// Lower and upper bounds for the CP rank of the order-`N` determinant
/// tensor: `binom(N, floor(N/2)) <= rank <= floor(N! * (5/6)^floor(N/3))`.
///
/// Supported for `1 <= N <= 20`; the bounds stay within `u64` there.
pub fn det_rank_bounds(n: usize) -> Result<(u64, u64)> {
    if n < 1 {
        return Err(Error::arg("order must be at least 1"));
    }
    if n > MAX_BOUND_ORDER {
        return Err(Error::BoundOverflow(format!(
            "determinant bounds supported up to N = {MAX_BOUND_ORDER}, got {n}"
        )));
    }
    let lower = big_binomial(n, n / 2)
        .to_u64()
        .ok_or_else(|| Error::BoundOverflow(format!("lower bound overflows u64 at N = {n}")))?;
    let upper = upper_bound_floor(n, &BigUint::one())
        .to_u64()
        .ok_or_else(|| Error::BoundOverflow(format!("upper bound overflows u64 at N = {n}")))?;
    Ok((lower, upper))
}

/// Bounds for the CP rank of any nonzero antisymmetric tensor in the
/// `(N, K)` space: `binom(N, floor(N/2)) <= rank <= N! * binom(K, N) *
/// (5/6)^floor(N/3)` (floored exactly).
///
/// Errors for `K < N`, where only the zero tensor is antisymmetric.
pub fn antisym_rank_bounds(n: usize, k: usize) -> Result<(u128, u128)> {
    if n < 1 {
        return Err(Error::arg("order must be at least 1"));
    }
    if k < n {
        return Err(Error::arg(format!(
            "K = {k} < N = {n}: the antisymmetric subspace is trivial (zero tensor only), \
             no nonzero tensor exists to bound"
        )));
    }
    let lower = big_binomial(n, n / 2).to_u128().ok_or_else(|| {
        Error::BoundOverflow(format!("lower bound overflows u128 at N = {n}"))
    })?;
    let upper = upper_bound_floor(n, &big_binomial(k, n))
        .to_u128()
        .ok_or_else(|| {
            Error::BoundOverflow(format!(
                "upper bound overflows u128 at N = {n}, K = {k}"
            ))
        })?;
    Ok((lower, upper))
}

/// The Stirling-style estimate `2^N / sqrt(N)` for the antisymmetric rank
/// lower bound, reported alongside the exact `binom(N, floor(N/2))`.
pub fn asymptotic_lower_bound(n: usize) -> Result<(u128, f64)> {
    if n < 1 {
        return Err(Error::arg("order must be at least 1"));
    }
    let exact = big_binomial(n, n / 2).to_u128().ok_or_else(|| {
        Error::BoundOverflow(format!("binomial overflows u128 at N = {n}"))
    })?;
    let estimate = 2f64.powi(n as i32) / (n as f64).sqrt();
    Ok((exact, estimate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_bounds_small_orders() {
        assert_eq!(det_rank_bounds(2).unwrap(), (2, 2)); // binom(2,1)=2, 2!*(5/6)^0=2
        assert_eq!(det_rank_bounds(3).unwrap(), (3, 5)); // 3! * 5/6 = 5
        assert_eq!(det_rank_bounds(1).unwrap(), (1, 1));
    }

    #[test]
    fn det_bounds_n6_exact_rational_oracle() {
        // 720 * (5/6)^2 = 720 * 25 / 36; check by independent integer arithmetic
        let oracle = 720u64 * 25 / 36;
        assert_eq!(oracle, 500);
        assert_eq!(det_rank_bounds(6).unwrap(), (20, oracle));
    }

    #[test]
    fn det_bounds_top_of_range_and_overflow() {
        let (lower, upper) = det_rank_bounds(20).unwrap();
        assert_eq!(lower, 184_756);
        // 20! * 5^6 / 6^6, checked against u128 arithmetic
        let oracle = (2_432_902_008_176_640_000u128 * 15_625 / 46_656) as u64;
        assert_eq!(upper, oracle);
        assert!(det_rank_bounds(21).is_err());
        assert!(det_rank_bounds(0).is_err());
    }

    #[test]
    fn antisym_bounds_examples() {
        assert_eq!(antisym_rank_bounds(3, 3).unwrap(), (3, 5)); // binom(3,3)=1
        assert_eq!(antisym_rank_bounds(2, 4).unwrap(), (2, 12)); // 2 * 6 * 1
        let (lower, _) = antisym_rank_bounds(20, 20).unwrap();
        assert_eq!(lower, 184_756);
    }

    #[test]
    fn antisym_bounds_trivial_space_error() {
        let err = antisym_rank_bounds(3, 2).unwrap_err();
        assert!(format!("{err}").contains("trivial"));
    }

    #[test]
    fn asymptotic_ratio_stays_in_stirling_window() {
        // binom(N, N/2) * sqrt(N) / 2^N in [0.3, 1.0] for 1 <= N <= 30;
        // tends to sqrt(2/pi) ~ 0.7979 for even N
        for n in 1..=30 {
            let (exact, estimate) = asymptotic_lower_bound(n).unwrap();
            let ratio = exact as f64 / estimate;
            assert!(
                (0.3..=1.0).contains(&ratio),
                "N={n}: ratio {ratio} outside [0.3, 1.0]"
            );
        }
        let (exact, estimate) = asymptotic_lower_bound(30).unwrap();
        let ratio = exact as f64 / estimate;
        assert!((ratio - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.01);
        assert_eq!(exact, 155_117_520);
    }

    #[test]
    fn asymptotic_examples() {
        let (exact, estimate) = asymptotic_lower_bound(4).unwrap();
        assert_eq!(exact, 6);
        assert!((estimate - 8.0).abs() < 1e-12);

        let (exact, estimate) = asymptotic_lower_bound(10).unwrap();
        assert_eq!(exact, 252);
        assert!((estimate - 1024.0 / 10f64.sqrt()).abs() < 1e-9);

        let (exact, _) = asymptotic_lower_bound(20).unwrap();
        assert_eq!(exact, 184_756);
    }
}
