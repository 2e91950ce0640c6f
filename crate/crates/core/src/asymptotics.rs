//! Closed forms and large-`N` behaviour of the recurrence.
//!
//! `x_{k+1} = Π_{l=1}^{k} [1 − 1/((2l+1)(2N+1))] · c_k` where
//! `c_k = 2(2k+2)! / (4^{k+1} ((k+1)!)²)` is twice a central binomial
//! probability, `c_k ≈ 2/√(π(k+1))`. Summing gives `ṽ_N`, and
//! `u_N = N (x_N + ṽ_N) ~ (4/√π) √N`.

use std::f64::consts::PI;

use num::bigint::BigInt;
use num::rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::recurrence;

/// Above this `k` the central binomial factor comes from its Stirling
/// series; at or below, from exact integer factorials.
pub const EXACT_FACTORIAL_MAX_K: u64 = 150;

/// `ln c_k` from the Stirling series of `ln(C(2m, m)/4^m)`, `m = k + 1`:
/// `−½ ln(πm) − 1/(8m) + 1/(192m³) − 1/(640m⁵) + 17/(14336m⁷)`.
///
/// Differencing `ln Γ` values instead loses about `1e-10` relative at
/// `k ~ 10⁴`; the series is good to rounding for `k ≥ 30`.
pub fn ln_central_binomial_factor(k: u64) -> f64 {
    let m = (k + 1) as f64;
    let inv = 1.0 / m;
    let inv2 = inv * inv;
    let tail = inv * (-1.0 / 8.0 + inv2 * (1.0 / 192.0 + inv2 * (-1.0 / 640.0 + inv2 * 17.0 / 14336.0)));
    2f64.ln() - 0.5 * (PI * m).ln() + tail
}

/// `c_k = 2(2k+2)!/(4^{k+1}((k+1)!)²)` exactly.
pub fn central_binomial_factor_exact(k: u64) -> BigRational {
    let m = k + 1;
    let mut binom = BigInt::from(1);
    // C(m+i, i) = C(m+i−1, i−1)·(m+i)/i, ending at C(2m, m).
    for i in 1..=m {
        binom = binom * BigInt::from(m + i) / BigInt::from(i);
    }
    let four_pow = num::pow(BigInt::from(4), m as usize);
    BigRational::new(binom * 2, four_pow)
}

/// `c_k` in floating point.
pub fn central_binomial_factor(k: u64) -> f64 {
    if k <= EXACT_FACTORIAL_MAX_K {
        crate::scalar::Scalar::as_f64(&central_binomial_factor_exact(k))
    } else {
        ln_central_binomial_factor(k).exp()
    }
}

/// Leading-order approximation `2/√(π(k+1))` of [`central_binomial_factor`].
pub fn stirling_term(k: u64) -> f64 {
    2.0 / (PI * (k + 1) as f64).sqrt()
}

fn ln_selection_factor(l: u64, n: u64) -> f64 {
    (-1.0 / ((2 * l + 1) as f64 * (2 * n + 1) as f64)).ln_1p()
}

/// `x_{k+1}` from the product form; the product is summed in log space.
/// `0 ≤ k ≤ N − 1`.
pub fn x_closed_form(k: u64, n: u64) -> Result<f64> {
    if k >= n {
        return Err(Error::OutOfRange { k, n });
    }
    let ln_product: f64 = (1..=k).map(|l| ln_selection_factor(l, n)).sum();
    Ok(ln_product.exp() * central_binomial_factor(k))
}

/// `x_1, …, x_N` from the product form, sharing the running product.
pub fn x_closed_form_table(n: u64) -> Vec<f64> {
    let mut ln_product = 0.0;
    (0..n)
        .map(|k| {
            if k > 0 {
                ln_product += ln_selection_factor(k, n);
            }
            ln_product.exp() * central_binomial_factor(k)
        })
        .collect()
}

/// `ṽ_N = Σ_{l=1}^{N−1} x_l / (2N+1)`.
pub fn v_tilde_closed(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need N >= 2, got {n}")));
    }
    let xs = x_closed_form_table(n);
    Ok(xs[..n as usize - 1].iter().sum::<f64>() / (2 * n + 1) as f64)
}

/// `u_N = N (x_N + ṽ_N)` from the closed forms alone.
pub fn final_weight_closed(n: u64) -> Result<f64> {
    let xs = x_closed_form_table(n);
    let v = v_tilde_closed(n)?;
    Ok(n as f64 * (xs[n as usize - 1] + v))
}

/// `(4/√π) √N`.
pub fn theorem_prediction(n: u64) -> f64 {
    4.0 / PI.sqrt() * (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub k: u64,
    pub n: u64,
    pub x_exact: f64,
    pub lower: f64,
    pub upper: f64,
    pub c_used: f64,
    pub pass: bool,
}

/// `2/√(πk)·(1 − C(ln k + 1)/N) ≤ x_k ≤ 2/√(πk)·(1 + C/k)`, for `1 ≤ k ≤ N`.
pub fn lemma_bounds(k: u64, n: u64, c: f64) -> Result<BoundsReport> {
    if k == 0 || k > n {
        return Err(Error::OutOfRange { k, n });
    }
    Ok(bounds_for(k, n, c, x_closed_form(k - 1, n)?))
}

fn bounds_for(k: u64, n: u64, c: f64, x: f64) -> BoundsReport {
    let lead = 2.0 / (PI * k as f64).sqrt();
    let lower = lead * (1.0 - c * ((k as f64).ln() + 1.0) / n as f64);
    let upper = lead * (1.0 + c / k as f64);
    BoundsReport {
        k,
        n,
        x_exact: x,
        lower,
        upper,
        c_used: c,
        pass: lower <= x && x <= upper,
    }
}

/// Bound reports for every `k = 1..=N`.
pub fn lemma_bounds_sweep(n: u64, c: f64) -> Vec<BoundsReport> {
    x_closed_form_table(n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| bounds_for(i as u64 + 1, n, c, x))
        .collect()
}

/// Smallest `C ≥ 0` for which both bounds hold at every `k = 1..=N`, and the
/// `k` that forces it.
pub fn smallest_passing_c(n: u64) -> (f64, u64) {
    let mut worst = (0.0f64, 1u64);
    for (i, x) in x_closed_form_table(n).into_iter().enumerate() {
        let k = i as u64 + 1;
        let ratio = x * (PI * k as f64).sqrt() / 2.0;
        let need_lower = (1.0 - ratio) * n as f64 / ((k as f64).ln() + 1.0);
        let need_upper = (ratio - 1.0) * k as f64;
        let need = need_lower.max(need_upper);
        if need > worst.0 {
            worst = (need, k);
        }
    }
    worst
}

/// `Σ_{l=1}^{k} 1/((2l+1)(2N+1)) < ln(2k+2)/(2(2N+1))`.
pub fn log_sum_bound(k: u64, n: u64) -> (f64, f64) {
    let sum: f64 = (1..=k)
        .map(|l| 1.0 / ((2 * l + 1) as f64 * (2 * n + 1) as f64))
        .sum();
    (sum, ((2 * k + 2) as f64).ln() / (2.0 * (2 * n + 1) as f64))
}

/// `(∫_1^N, Σ_{k=1}^{N−1}, ∫_0^{N−1})` of `2/√(πx)`.
pub fn integral_sandwich(n: u64) -> (f64, f64, f64) {
    let c = 4.0 / PI.sqrt();
    let sum: f64 = (1..n).map(|k| 2.0 / (PI * k as f64).sqrt()).sum();
    (
        c * ((n as f64).sqrt() - 1.0),
        sum,
        c * ((n - 1) as f64).sqrt(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub u_n: f64,
    pub prediction: f64,
    pub ratio: f64,
}

pub fn convergence_row(n: u64) -> Result<ConvergenceRow> {
    let u_n = recurrence::final_weight_f64(n)?;
    let prediction = theorem_prediction(n);
    Ok(ConvergenceRow {
        n,
        u_n,
        prediction,
        ratio: u_n / prediction,
    })
}
