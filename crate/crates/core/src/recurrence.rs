//! Transfer-matrix recurrence for `u_k = E(B_{S_k})`, `v_k = E(C_{S_k})`.
//!
//! Between the sweep times `S_k` and `S_{k+1}` the pair `(E B, E C)` is
//! multiplied by `H_k` on every step without a new carrier and by `L_k` on the
//! step that creates one, so `(u_{k+1}, v_{k+1}) = L_k (I − H_k)^{-1} (u_k, v_k)`.
//! The rescaled pair `ũ_k = u_k / k`, `ṽ_k = v_k / (N − k)` obeys a
//! row-stochastic recurrence, and `x_k = ũ_k − ṽ_k` a scalar one.
//!
//! Each matrix is built two ways: from its defining product and from the
//! simplified display it is usually quoted in. [`locate_typos`] compares them
//! in exact arithmetic.

use std::ops::{Add, Mul, Sub};

use num::rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(a: T, d: T) -> Self {
        Self::new(a, T::zero(), T::zero(), d)
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.0[row][col]
    }

    pub fn scale(&self, s: &T) -> Self {
        let m = &self.0;
        Self::new(
            s.clone() * m[0][0].clone(),
            s.clone() * m[0][1].clone(),
            s.clone() * m[1][0].clone(),
            s.clone() * m[1][1].clone(),
        )
    }

    pub fn apply(&self, v: (&T, &T)) -> (T, T) {
        let m = &self.0;
        (
            m[0][0].clone() * v.0.clone() + m[0][1].clone() * v.1.clone(),
            m[1][0].clone() * v.0.clone() + m[1][1].clone() * v.1.clone(),
        )
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        let m = &self.0;
        Mat2([[f(&m[0][0]), f(&m[0][1])], [f(&m[1][0]), f(&m[1][1])]])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let d = (self.0[r][c].clone() - other.0[r][c].clone()).as_f64().abs();
                worst = worst.max(d);
            }
        }
        worst
    }
}

impl<T: Scalar> Mul for &Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, rhs: &Mat2<T>) -> Mat2<T> {
        let (a, b) = (&self.0, &rhs.0);
        let e = |r: usize, c: usize| a[r][0].clone() * b[0][c].clone() + a[r][1].clone() * b[1][c].clone();
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl<T: Scalar> Add for &Mat2<T> {
    type Output = Mat2<T>;

    fn add(self, rhs: &Mat2<T>) -> Mat2<T> {
        let (a, b) = (&self.0, &rhs.0);
        let e = |r: usize, c: usize| a[r][c].clone() + b[r][c].clone();
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl<T: Scalar> Sub for &Mat2<T> {
    type Output = Mat2<T>;

    fn sub(self, rhs: &Mat2<T>) -> Mat2<T> {
        let (a, b) = (&self.0, &rhs.0);
        let e = |r: usize, c: usize| a[r][c].clone() - b[r][c].clone();
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

fn check_k(k: u64, n: u64) -> Result<()> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::OutOfRange { k, n });
    }
    Ok(())
}

fn r<T: Scalar>(num: i64, den: i64) -> T {
    T::ratio(num, den)
}

/// `H_k`: one step without a new carrier, weighted by its probability `1 − k/N`.
pub fn matrix_h<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    check_k(k, n)?;
    let (k, n) = (k as i64, n as i64);
    let m = Mat2::new(
        T::one(),
        T::zero(),
        r(1, 2 * n),
        T::one() - r(1, 2 * (n - k)) + r(1, 2 * n),
    );
    Ok(m.scale(&(T::one() - r(k, n))))
}

/// `L_k`: the step that creates a new carrier, weighted by its probability `k/N`.
pub fn matrix_l<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    check_k(k, n)?;
    let (k, n) = (k as i64, n as i64);
    let m = Mat2::new(
        T::one() + r(1, 2 * k) + r(1, 2 * n),
        r(1, 2 * n),
        T::zero(),
        T::one() - r(1, n - k),
    );
    Ok(m.scale(&r(k, n)))
}

/// Inverse of the lower-triangular `[[p, 0], [b, q]]`: `[[1/p, 0], [−b/(pq), 1/q]]`.
pub fn lower_triangular_inverse<T: Scalar>(m: &Mat2<T>) -> Mat2<T> {
    let p = m.get(0, 0).clone();
    let b = m.get(1, 0).clone();
    let q = m.get(1, 1).clone();
    Mat2::new(
        T::one() / p.clone(),
        T::zero(),
        -(b / (p.clone() * q.clone())),
        T::one() / q,
    )
}

/// The generic inverse of `[[1−a, 0], [b, 1−c]]` in the form it is commonly
/// quoted, with the diagonal entries `1/(1−c)` and `1/(1−a)`. Kept only so
/// [`locate_typos`] can point at it; it is correct only when `a = c`.
pub fn quoted_triangular_inverse<T: Scalar>(m: &Mat2<T>) -> Mat2<T> {
    let one_minus_a = m.get(0, 0).clone();
    let b = m.get(1, 0).clone();
    let one_minus_c = m.get(1, 1).clone();
    Mat2::new(
        T::one() / one_minus_c.clone(),
        T::zero(),
        -(b / (one_minus_a.clone() * one_minus_c)),
        T::one() / one_minus_a,
    )
}

/// `(I − H_k)^{-1}` through the triangular inverse.
pub fn resolvent<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    let i_minus_h = &Mat2::identity() - &matrix_h::<T>(k, n)?;
    Ok(lower_triangular_inverse(&i_minus_h))
}

/// Simplified closed form `(N/k)·[[1, 0], [(N−k)/((2N+1)k), 2N/(2N+1)]]`.
pub fn resolvent_closed<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    check_k(k, n)?;
    let (k, n) = (k as i64, n as i64);
    let m = Mat2::new(
        T::one(),
        T::zero(),
        r(n - k, (2 * n + 1) * k),
        r(2 * n, 2 * n + 1),
    );
    Ok(m.scale(&r(n, k)))
}

/// `𝒜_k = L_k (I − H_k)^{-1}`, maps `(u_k, v_k)` to `(u_{k+1}, v_{k+1})`.
pub fn matrix_a<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    Ok(&matrix_l::<T>(k, n)? * &resolvent::<T>(k, n)?)
}

/// Explicit entrywise display of `𝒜_k`.
pub fn matrix_a_closed<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    check_k(k, n)?;
    let (k, n) = (k as i64, n as i64);
    let two_n1 = 2 * n + 1;
    Ok(Mat2::new(
        T::one() + r(1, 2 * k) + r(1, 2 * n) + r::<T>(n - k, n) * r(1, 2 * k * two_n1),
        r(1, two_n1),
        r(n - k - 1, two_n1 * k),
        (T::one() - r(1, n - k)) * (T::one() - r(1, two_n1)),
    ))
}

/// `D_{k+1} 𝒜_k D_k^{-1}` with `D_k = diag(1/k, 1/(N−k))`; needs `k ≤ N − 2`.
pub fn conjugate_to_tilde<T: Scalar>(a: &Mat2<T>, k: u64, n: u64) -> Result<Mat2<T>> {
    if k + 2 > n || k == 0 {
        return Err(Error::OutOfRange { k, n });
    }
    let (k, n) = (k as i64, n as i64);
    let left = Mat2::diag(r(1, k + 1), r(1, n - k - 1));
    let right = Mat2::diag(T::int(k), T::int(n - k));
    Ok(&(&left * a) * &right)
}

/// `Ã_k`, the recurrence for `(ũ_k, ṽ_k)`:
/// `[[1 − (N−k)/((2N+1)(k+1)), (N−k)/((2N+1)(k+1))], [1/(2N+1), 2N/(2N+1)]]`.
///
/// Rows sum to one. For `k ≤ N − 2` this equals [`conjugate_to_tilde`] of
/// [`matrix_a`]; at `k = N − 1` it is the same formula, whose first row still
/// gives `ũ_N = u_N / N` and whose second row defines the formal `ṽ_N`.
pub fn matrix_a_tilde<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    check_k(k, n)?;
    let (k, n) = (k as i64, n as i64);
    let two_n1 = 2 * n + 1;
    let off = r::<T>(n - k, two_n1 * (k + 1));
    Ok(Mat2::new(
        T::one() - off.clone(),
        off,
        r(1, two_n1),
        r(2 * n, two_n1),
    ))
}

/// `Ã_k` in the widely quoted form
/// `[[1 − (1 − 1/(2k+1) + 1/(2N) − 1/(2N(k+1)))/(2N+1), (N−k)/((2N+1)(k+1))],
///   [1/((2N+1)k), 1 − 1/(2N+1)]]`.
/// Its first column disagrees with the conjugated `𝒜_k`; see [`locate_typos`].
pub fn matrix_a_tilde_quoted<T: Scalar>(k: u64, n: u64) -> Result<Mat2<T>> {
    check_k(k, n)?;
    let (k, n) = (k as i64, n as i64);
    let two_n1 = 2 * n + 1;
    let inner = T::one() - r(1, 2 * k + 1) + r(1, 2 * n) - r(1, 2 * n * (k + 1));
    Ok(Mat2::new(
        T::one() - r::<T>(1, two_n1) * inner,
        r(n - k, two_n1 * (k + 1)),
        r(1, two_n1 * k),
        T::one() - r(1, two_n1),
    ))
}

/// `Σ_{l=0}^{terms-1} L_k H_k^l`, the truncated geometric series for `𝒜_k`.
pub fn matrix_a_series(k: u64, n: u64, terms: usize) -> Result<Mat2<f64>> {
    let h = matrix_h::<f64>(k, n)?;
    let l = matrix_l::<f64>(k, n)?;
    let mut power = Mat2::identity();
    let mut sum = Mat2::new(0.0, 0.0, 0.0, 0.0);
    for _ in 0..terms {
        sum = &sum + &(&l * &power);
        power = &power * &h;
    }
    Ok(sum)
}

/// All four matrices for one `(k, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrices<T> {
    pub k: u64,
    pub n: u64,
    pub h: Mat2<T>,
    pub l: Mat2<T>,
    pub a: Mat2<T>,
    pub a_tilde: Mat2<T>,
}

impl<T: Scalar> TransferMatrices<T> {
    pub fn new(k: u64, n: u64) -> Result<Self> {
        Ok(Self {
            k,
            n,
            h: matrix_h(k, n)?,
            l: matrix_l(k, n)?,
            a: matrix_a(k, n)?,
            a_tilde: matrix_a_tilde(k, n)?,
        })
    }
}

/// Which displayed formula an entry mismatch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Display {
    /// Generic inverse of a lower-triangular 2×2 matrix.
    TriangularInverse,
    /// Simplified `(I − H_k)^{-1}`.
    Resolvent,
    /// Explicit `𝒜_k`.
    TransferA,
    /// Explicit `Ã_k`.
    TransferATilde,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryMismatch {
    pub display: Display,
    pub k: u64,
    pub n: u64,
    pub row: usize,
    pub col: usize,
    pub derived: String,
    pub quoted: String,
}

fn diff_entries(
    display: Display,
    k: u64,
    n: u64,
    derived: &Mat2<BigRational>,
    quoted: &Mat2<BigRational>,
    out: &mut Vec<EntryMismatch>,
) {
    for row in 0..2 {
        for col in 0..2 {
            let (d, q) = (&derived.0[row][col], &quoted.0[row][col]);
            if d != q {
                out.push(EntryMismatch {
                    display,
                    k,
                    n,
                    row,
                    col,
                    derived: crate::scalar::fraction_string(d),
                    quoted: crate::scalar::fraction_string(q),
                });
            }
        }
    }
}

/// Compares every quoted display against its derivation in exact arithmetic
/// for all `1 ≤ k ≤ N − 1`, and returns each disagreeing entry.
///
/// The triangular inverse is checked on `I − H_k`; `Ã_k` against the
/// conjugated `𝒜_k` for `k ≤ N − 2` (where the conjugation is defined).
pub fn locate_typos(n: u64) -> Result<Vec<EntryMismatch>> {
    let mut out = Vec::new();
    for k in 1..n {
        let i_minus_h = &Mat2::identity() - &matrix_h::<BigRational>(k, n)?;
        let inverse = lower_triangular_inverse(&i_minus_h);
        debug_assert_eq!(&inverse * &i_minus_h, Mat2::identity());
        diff_entries(
            Display::TriangularInverse,
            k,
            n,
            &inverse,
            &quoted_triangular_inverse(&i_minus_h),
            &mut out,
        );
        diff_entries(
            Display::Resolvent,
            k,
            n,
            &inverse,
            &resolvent_closed(k, n)?,
            &mut out,
        );
        let a = matrix_a::<BigRational>(k, n)?;
        diff_entries(Display::TransferA, k, n, &a, &matrix_a_closed(k, n)?, &mut out);
        if k + 2 <= n {
            diff_entries(
                Display::TransferATilde,
                k,
                n,
                &conjugate_to_tilde(&a, k, n)?,
                &matrix_a_tilde_quoted(k, n)?,
                &mut out,
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Rational,
}

/// Which matrix the iteration multiplies by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// `(u, v)` with `𝒜_k`.
    Direct,
    /// `(ũ, ṽ)` with `Ã_k`.
    Tilde,
}

/// Guards against exact arithmetic running away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalLimits {
    pub max_n: u64,
    /// Abort once any numerator or denominator exceeds this many bits.
    pub max_bits: u64,
}

impl Default for RationalLimits {
    fn default() -> Self {
        Self {
            max_n: 2000,
            max_bits: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrencePair<T> {
    pub k: u64,
    pub u: T,
    pub v: T,
    pub u_tilde: T,
    /// For `k = N` this is the formal value from the second row of `Ã_{N−1}`.
    pub v_tilde: T,
    pub x: T,
}

/// Rows `k = 1..=N` of the recurrence, starting from `u_1 = 1`, `v_1 = 0`.
pub fn iterate_uv<T: Scalar>(
    n: u64,
    route: Route,
    limits: RationalLimits,
) -> Result<Vec<RecurrencePair<T>>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need N >= 2, got {n}")));
    }
    if T::is_exact() && n > limits.max_n {
        return Err(Error::RationalBudget(format!(
            "exact recurrence limited to N <= {}, got {n}",
            limits.max_n
        )));
    }
    let mut rows = Vec::with_capacity(n as usize);
    match route {
        Route::Tilde => {
            let (mut ut, mut vt) = (T::one(), T::zero());
            for k in 1..=n {
                let v = if k == n {
                    T::zero()
                } else {
                    T::int((n - k) as i64) * vt.clone()
                };
                rows.push(RecurrencePair {
                    k,
                    u: T::int(k as i64) * ut.clone(),
                    v,
                    u_tilde: ut.clone(),
                    v_tilde: vt.clone(),
                    x: ut.clone() - vt.clone(),
                });
                if k < n {
                    (ut, vt) = matrix_a_tilde::<T>(k, n)?.apply((&ut, &vt));
                    watchdog(&[&ut, &vt], k, limits)?;
                }
            }
        }
        Route::Direct => {
            let (mut u, mut v) = (T::one(), T::zero());
            let mut prev_tilde: Option<(T, T)> = None;
            for k in 1..=n {
                let u_tilde = u.clone() / T::int(k as i64);
                let v_tilde = if k < n {
                    v.clone() / T::int((n - k) as i64)
                } else {
                    let (ut, vt) = prev_tilde.take().expect("k = N follows k = N - 1");
                    let n = n as i64;
                    (ut + T::int(2 * n) * vt) / T::int(2 * n + 1)
                };
                rows.push(RecurrencePair {
                    k,
                    u: u.clone(),
                    v: v.clone(),
                    u_tilde: u_tilde.clone(),
                    v_tilde: v_tilde.clone(),
                    x: u_tilde.clone() - v_tilde.clone(),
                });
                if k < n {
                    prev_tilde = Some((u_tilde, v_tilde));
                    (u, v) = matrix_a::<T>(k, n)?.apply((&u, &v));
                    watchdog(&[&u, &v], k, limits)?;
                }
            }
        }
    }
    Ok(rows)
}

fn watchdog<T: Scalar>(values: &[&T], k: u64, limits: RationalLimits) -> Result<()> {
    if !T::is_exact() {
        return Ok(());
    }
    match values.iter().map(|v| v.size_bits()).max() {
        Some(bits) if bits > limits.max_bits => Err(Error::RationalBudget(format!(
            "value at k = {} needs {bits} bits (budget {})",
            k + 1,
            limits.max_bits
        ))),
        _ => Ok(()),
    }
}

/// `x_1 = 1`, `x_{k+1} = (2Nk + N + k)/((2N+1)(k+1)) · x_k`, for `k = 1..=N`.
pub fn x_sequence<T: Scalar>(n: u64) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need N >= 2, got {n}")));
    }
    let nn = n as i64;
    let mut xs = Vec::with_capacity(n as usize);
    let mut x = T::one();
    xs.push(x.clone());
    for k in 1..n as i64 {
        x = x * r(2 * nn * k + nn + k, (2 * nn + 1) * (k + 1));
        xs.push(x.clone());
    }
    Ok(xs)
}

/// `u_N` in floating point via the tilde route, in O(1) memory.
pub fn final_weight_f64(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need N >= 2, got {n}")));
    }
    let (mut ut, mut vt) = (1.0f64, 0.0f64);
    for k in 1..n {
        (ut, vt) = matrix_a_tilde::<f64>(k, n)?.apply((&ut, &vt));
    }
    Ok(n as f64 * ut)
}

/// Exact `u_N = E(M_{S_N}(1))`.
pub fn final_weight_exact(n: u64, limits: RationalLimits) -> Result<BigRational> {
    let rows = iterate_uv::<BigRational>(n, Route::Tilde, limits)?;
    Ok(rows.last().expect("N >= 2 rows").u.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    #[test]
    fn h_examples() {
        assert_eq!(
            matrix_h::<Q>(1, 2).unwrap(),
            Mat2::new(q(1, 2), q(0, 1), q(1, 8), q(3, 8))
        );
        let h = matrix_h::<Q>(9, 10).unwrap();
        let expected = Mat2::new(q(1, 1), q(0, 1), q(1, 20), q(1, 1) - q(1, 2) + q(1, 20));
        assert_eq!(h, expected.scale(&q(1, 10)));
        for n in 2..12 {
            for k in 1..n {
                assert_eq!(matrix_h::<Q>(k, n).unwrap().0[0][1], q(0, 1));
                assert_eq!(matrix_l::<Q>(k, n).unwrap().0[1][0], q(0, 1));
            }
        }
    }

    #[test]
    fn l_examples() {
        assert_eq!(
            matrix_l::<Q>(1, 2).unwrap(),
            Mat2::new(q(7, 8), q(1, 8), q(0, 1), q(0, 1))
        );
        let expected = Mat2::new(q(1, 1) + q(1, 4) + q(1, 8), q(1, 8), q(0, 1), q(1, 2));
        assert_eq!(matrix_l::<Q>(2, 4).unwrap(), expected.scale(&q(1, 2)));
    }

    #[test]
    fn out_of_range() {
        for (k, n) in [(0, 5), (5, 5), (6, 5), (1, 1)] {
            assert!(matches!(matrix_h::<f64>(k, n), Err(Error::OutOfRange { .. })));
            assert!(matches!(matrix_a_tilde::<f64>(k, n), Err(Error::OutOfRange { .. })));
        }
    }

    #[test]
    fn a_examples() {
        let a = matrix_a::<Q>(1, 3).unwrap();
        assert_eq!(a.0[0][0], q(12, 7));
        assert_eq!(a.0[0][1], q(1, 7));
        for n in 2..15 {
            let a = matrix_a::<Q>(n - 1, n).unwrap();
            assert_eq!(a.0[1][0], q(0, 1));
            assert_eq!(a.0[1][1], q(0, 1));
        }
    }

    #[test]
    fn a_tilde_examples() {
        let at = matrix_a_tilde::<Q>(1, 3).unwrap();
        assert_eq!(at.0[1][0], q(1, 7));
        assert_eq!(at.0[1][1], q(6, 7));
        let conj = conjugate_to_tilde(&matrix_a::<Q>(1, 3).unwrap(), 1, 3).unwrap();
        assert_eq!(conj, at);
        assert_eq!(conj.0[0][0].clone() + conj.0[0][1].clone(), q(1, 1));
    }

    #[test]
    fn float_matrices_track_exact() {
        for n in [2u64, 7, 40] {
            for k in 1..n {
                let exact = matrix_a::<Q>(k, n).unwrap().map(|x| x.as_f64());
                let float = matrix_a::<f64>(k, n).unwrap();
                assert!(exact.max_abs_diff(&float) < 1e-14 * 4.0);
                let closed = matrix_a_closed::<f64>(k, n).unwrap();
                assert!(closed.max_abs_diff(&float) < 1e-14 * 4.0);
            }
        }
    }

    #[test]
    fn uv_small_n() {
        let rows = iterate_uv::<Q>(2, Route::Direct, RationalLimits::default()).unwrap();
        assert_eq!(rows[1].u, q(9, 5));
        assert_eq!(rows[1].v, q(0, 1));

        for route in [Route::Direct, Route::Tilde] {
            let rows = iterate_uv::<Q>(3, route, RationalLimits::default()).unwrap();
            assert_eq!((rows[0].u.clone(), rows[0].v.clone()), (q(1, 1), q(0, 1)));
            assert_eq!((rows[1].u.clone(), rows[1].v.clone()), (q(12, 7), q(1, 7)));
            assert_eq!(rows[2].u, q(121, 49));
            assert_eq!(rows[2].v, q(0, 1));
            for row in &rows {
                assert_eq!(row.x, row.u_tilde.clone() - row.v_tilde.clone());
            }
        }
    }

    #[test]
    fn x_examples() {
        for n in [2u64, 3, 10, 50] {
            assert_eq!(x_sequence::<Q>(n).unwrap()[0], q(1, 1));
        }
        let xs = x_sequence::<Q>(3).unwrap();
        assert_eq!(xs[1], q(5, 7));
        let rows = iterate_uv::<Q>(3, Route::Direct, RationalLimits::default()).unwrap();
        assert_eq!(rows[1].u_tilde.clone() - rows[1].v_tilde.clone(), q(5, 7));
        assert_eq!(x_sequence::<Q>(10).unwrap()[1], q(31, 42));
    }

    #[test]
    fn rational_budget() {
        let tight = RationalLimits {
            max_n: 2000,
            max_bits: 64,
        };
        assert!(matches!(
            iterate_uv::<Q>(200, Route::Tilde, tight),
            Err(Error::RationalBudget(_))
        ));
        let small_n = RationalLimits {
            max_n: 10,
            max_bits: 1 << 20,
        };
        assert!(matches!(
            iterate_uv::<Q>(11, Route::Tilde, small_n),
            Err(Error::RationalBudget(_))
        ));
        // Floats ignore the limits.
        assert!(iterate_uv::<f64>(11, Route::Tilde, small_n).is_ok());
    }

    #[test]
    fn geometric_series_converges() {
        for (k, n) in [(1u64, 5u64), (3, 10), (20, 40)] {
            let exact = matrix_a::<f64>(k, n).unwrap();
            let errs: Vec<f64> = [10, 50, 200]
                .iter()
                .map(|&t| matrix_a_series(k, n, t).unwrap().max_abs_diff(&exact))
                .collect();
            assert!(errs[0] > errs[1] && errs[1] >= errs[2], "{errs:?}");
            // Spectral radius of H_k is 1 − k/N.
            let rho = 1.0 - k as f64 / n as f64;
            assert!(errs[2] <= 10.0 * rho.powi(200) + 1e-13, "{errs:?}");
        }
    }

    #[test]
    fn final_weight_helpers() {
        assert_eq!(final_weight_exact(3, RationalLimits::default()).unwrap(), q(121, 49));
        assert!((final_weight_f64(3).unwrap() - 121.0 / 49.0).abs() < 1e-14);
        assert!((final_weight_f64(2).unwrap() - 1.8).abs() < 1e-15);
    }
}
