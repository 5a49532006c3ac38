//! Special functions needed by the Rice mean and the gamma fit: modified
//! Bessel functions of the first kind and the digamma/trigamma pair.
//!
//! All four are evaluated by the classical series/asymptotic split. The
//! Bessel functions are exposed in exponentially scaled form `e^-x I_n(x)`
//! so callers can combine them with their own exponential factors without
//! overflow.

// resolves float math through libm in the no_std build
#[allow(unused_imports)]
use num_traits::Float;

/// Threshold between the ascending power series and the large-argument
/// asymptotic expansion. At x = 15 both converge to full f64 precision.
const BESSEL_SERIES_CUTOFF: f64 = 15.0;

/// `e^-x I_0(x)` for x >= 0.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < BESSEL_SERIES_CUTOFF {
        bessel_series(0, x) * (-x).exp()
    } else {
        bessel_asymptotic_scaled(0, x)
    }
}

/// `e^-x I_1(x)` for x >= 0.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < BESSEL_SERIES_CUTOFF {
        bessel_series(1, x) * (-x).exp()
    } else {
        bessel_asymptotic_scaled(1, x)
    }
}

/// Ascending series: I_n(x) = (x/2)^n * sum_k (x^2/4)^k / (k! (k+n)!).
fn bessel_series(order: u32, x: f64) -> f64 {
    let q = x * x / 4.0;
    // term at k = 0, including the (x/2)^n prefactor
    let mut term = match order {
        0 => 1.0,
        1 => x / 2.0,
        _ => unreachable!("only orders 0 and 1 are used"),
    };
    let mut sum = term;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term < sum * f64::EPSILON {
            break;
        }
    }
    sum
}

/// Large-argument expansion of the scaled function:
/// e^-x I_n(x) ~ 1/sqrt(2 pi x) * sum_k c_k with
/// c_0 = 1, c_k = c_{k-1} * ((2k-1)^2 - 4n^2) / (8 x k).
fn bessel_asymptotic_scaled(order: u32, x: f64) -> f64 {
    let four_n2 = 4.0 * (order * order) as f64;
    let mut term = 1.0f64;
    let mut sum = term;
    let mut prev_abs = f64::INFINITY;
    for k in 1..40u32 {
        let m = 2.0 * k as f64 - 1.0;
        term *= (m * m - four_n2) / (8.0 * x * k as f64);
        // asymptotic series: stop once terms no longer shrink
        if term.abs() >= prev_abs {
            break;
        }
        prev_abs = term.abs();
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    sum / (2.0 * core::f64::consts::PI * x).sqrt()
}

/// Digamma function psi(x) for x > 0.
///
/// Small arguments are shifted up with psi(x) = psi(x+1) - 1/x until the
/// asymptotic expansion applies.
pub fn digamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^2n)
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    shift + x.ln() - 0.5 * inv - series
}

/// Trigamma function psi'(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 12.0 {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // psi'(x) ~ 1/x + 1/(2x^2) + sum B_2n / x^(2n+1)
    let series = inv
        * (1.0
            + inv * 0.5
            + inv2
                * (1.0 / 6.0
                    - inv2
                        * (1.0 / 30.0
                            - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0))))));
    shift + series
}
