use std::f64::consts::PI;

use moran_sweep::asymptotics;
use moran_sweep::recurrence::{self, RationalLimits, Route};
use moran_sweep::scalar::Scalar;
use num::rational::BigRational;
use proptest::prelude::*;

type Q = BigRational;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn float_and_rational_agree_up_to_200() {
    for n in (2..=200u64).step_by(7).chain([200]) {
        let exact = recurrence::final_weight_exact(n, RationalLimits::default()).unwrap();
        let float = recurrence::final_weight_f64(n).unwrap();
        assert!(rel(float, exact.as_f64()) < 1e-10, "N = {n}");
        let direct = recurrence::iterate_uv::<f64>(n, Route::Direct, RationalLimits::default()).unwrap();
        assert!(rel(direct.last().unwrap().u, exact.as_f64()) < 1e-10, "N = {n}");
    }
}

#[test]
fn quoted_a_matches_derivation_up_to_100() {
    for n in 2..=100u64 {
        for k in 1..n {
            assert_eq!(
                recurrence::matrix_a::<Q>(k, n).unwrap(),
                recurrence::matrix_a_closed::<Q>(k, n).unwrap(),
                "k = {k}, N = {n}"
            );
            assert_eq!(
                recurrence::resolvent::<Q>(k, n).unwrap(),
                recurrence::resolvent_closed::<Q>(k, n).unwrap()
            );
        }
    }
}

#[test]
fn quoted_tilde_column_zero_is_off() {
    // First column of the quoted Ã_k against the conjugated 𝒜_k at N = 4.
    let typos = recurrence::locate_typos(4).unwrap();
    let tilde: Vec<_> = typos
        .iter()
        .filter(|m| m.display == recurrence::Display::TransferATilde)
        .map(|m| (m.k, m.row, m.col, m.derived.as_str(), m.quoted.as_str()))
        .collect();
    assert_eq!(
        tilde,
        vec![
            (1, 0, 0, "5/6", "397/432"),
            (2, 0, 0, "25/27", "487/540"),
            (2, 1, 0, "1/9", "1/18"),
        ]
    );
}

#[test]
fn sequences_are_positive_and_monotone() {
    for n in [2u64, 3, 17, 250] {
        let rows = recurrence::iterate_uv::<Q>(n, Route::Tilde, RationalLimits::default()).unwrap();
        assert_eq!(rows.len(), n as usize);
        assert_eq!(rows.first().unwrap().k, 1);
        assert_eq!(rows.last().unwrap().k, n);
        assert!(rows.windows(2).all(|w| w[1].u > w[0].u));
        let zero = <Q as Scalar>::zero();
        assert!(rows.iter().all(|r| r.v >= zero));
        assert_eq!(rows.last().unwrap().v, zero);
    }
}

#[test]
fn decomposition_at_n() {
    for n in [10u64, 1000, 10_000] {
        let rows = recurrence::iterate_uv::<f64>(n, Route::Tilde, RationalLimits::default()).unwrap();
        let last = rows.last().unwrap();
        let xs = recurrence::x_sequence::<f64>(n).unwrap();
        assert!(rel(last.u_tilde, xs[n as usize - 1] + last.v_tilde) < 1e-13);
        assert!(rel(asymptotics::v_tilde_closed(n).unwrap(), last.v_tilde) < 1e-10);
        assert!(rel(asymptotics::final_weight_closed(n).unwrap(), last.u) < 1e-10);
    }
    // Both halves of ũ_N approach 2/√(πN).
    let n = 100_000u64;
    let lead = 2.0 / (PI * n as f64).sqrt();
    let xs = asymptotics::x_closed_form_table(n);
    assert!(rel(xs[n as usize - 1], lead) < 0.01);
    assert!(rel(asymptotics::v_tilde_closed(n).unwrap(), lead) < 0.01);
}

#[test]
fn exact_rows_render_consistently() {
    let rows = recurrence::iterate_uv::<Q>(3, Route::Tilde, RationalLimits::default()).unwrap();
    let rendered: Vec<_> = rows
        .iter()
        .map(|r| moran_sweep::scalar::fraction_string(&r.u))
        .collect();
    assert_eq!(rendered, ["1/1", "12/7", "121/49"]);
}

#[test]
fn lemma_sandwich_shape_at_n1000() {
    let n = 1000;
    let reports = asymptotics::lemma_bounds_sweep(n, 1.0);
    // The upper bound holds everywhere with C = 1.
    assert!(reports.iter().all(|r| r.x_exact <= r.upper));
    // The lower bound omits the 1/(8k) Stirling correction, so it fails for
    // small k unless C grows like N.
    assert!(reports[0].x_exact < reports[0].lower);
    let (c, k) = asymptotics::smallest_passing_c(n);
    assert_eq!(k, 1);
    assert!(rel(c, n as f64 * (1.0 - PI.sqrt() / 2.0)) < 1e-12);
    assert!(asymptotics::lemma_bounds_sweep(n, c * (1.0 + 1e-9)).iter().all(|r| r.pass));
    // From k ≈ N/(8·C·ln k) onward, C = 1 is enough.
    assert!(reports[200..].iter().all(|r| r.pass));
}

proptest! {
    #[test]
    fn closed_form_point_matches_recurrence(n in 2u64..3000, frac in 0.0f64..1.0) {
        let k = ((n - 1) as f64 * frac) as u64;
        let xs = recurrence::x_sequence::<f64>(n).unwrap();
        let x = asymptotics::x_closed_form(k, n).unwrap();
        prop_assert!(rel(x, xs[k as usize]) < 1e-10);
    }

    #[test]
    fn geometric_series_matches_resolvent(n in 3u64..60, frac in 0.0f64..1.0) {
        let k = 1 + ((n - 2) as f64 * frac) as u64;
        let exact = recurrence::matrix_a::<f64>(k, n).unwrap();
        let rho = 1.0 - k as f64 / n as f64;
        let e_short = recurrence::matrix_a_series(k, n, 20).unwrap().max_abs_diff(&exact);
        let e_long = recurrence::matrix_a_series(k, n, 200).unwrap().max_abs_diff(&exact);
        prop_assert!(e_long <= e_short);
        prop_assert!(e_short <= 10.0 * rho.powi(20) + 1e-13);
        prop_assert!(e_long <= 10.0 * rho.powi(200) + 1e-13);
    }
}
