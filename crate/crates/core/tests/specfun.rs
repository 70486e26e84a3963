use std::f64::consts::PI;

use fas_kl::specfun::{bessel_j0, exp_integral_e1, exp_scaled_e1};
use proptest::prelude::*;

/// `J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ` by the trapezoid rule. The integrand
/// extends to a smooth periodic function, so the rule converges geometrically
/// once the panel count exceeds about `x`.
fn j0_oracle(x: f64) -> f64 {
    let m = 2 * (x.abs() as usize) + 64;
    let h = PI / m as f64;
    let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
    for i in 1..m {
        s += (x * (i as f64 * h).sin()).cos();
    }
    s * h / PI
}

/// `E1(x) = ∫_0^∞ exp(-x e^s) ds` by adaptive Simpson.
fn e1_oracle(x: f64) -> f64 {
    let f = |s: f64| (-x * s.exp()).exp();
    let upper = (750.0 / x).ln().max(1.0);
    // Tolerance scaled by the lower envelope e^{-x}/(x+1) keeps it relative.
    adaptive_simpson(&f, 0.0, upper, 1e-12 * (-x).exp() / (x + 1.0), 50)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    simpson_step(f, a, b, f(a), f(m), f(b), whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

#[test]
fn j0_matches_integral_oracle() {
    for x in log_spaced(1e-3, 50.0, 1000) {
        let got = bessel_j0(x).unwrap();
        let want = j0_oracle(x);
        assert!((got - want).abs() <= 1e-12, "x={x}: {got} vs {want}");
    }
}

#[test]
fn j0_first_zero_by_bisection() {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j0_oracle(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 2.404825557695773).abs() < 1e-12);
    assert!(bessel_j0(lo).unwrap().abs() < 1e-10);
}

#[test]
fn e1_matches_integral_oracle() {
    for x in log_spaced(1e-3, 50.0, 1000) {
        let got = exp_integral_e1(x).unwrap();
        let want = e1_oracle(x);
        assert!((got / want - 1.0).abs() <= 1e-10, "x={x}: {got} vs {want}");
    }
}

#[test]
fn e1_reference_points_against_oracle() {
    assert!((e1_oracle(1.0) / 0.21938393439552026 - 1.0).abs() < 1e-10);
    assert!((e1_oracle(10.0) / 4.15696892968532e-6 - 1.0).abs() < 1e-10);
}

proptest! {
    #[test]
    fn j0_even_and_bounded(x in -200.0f64..200.0) {
        let v = bessel_j0(x).unwrap();
        prop_assert_eq!(v, bessel_j0(-x).unwrap());
        prop_assert!(v.abs() <= 1.0);
    }

    #[test]
    fn e1_between_envelopes(x in 1e-6f64..600.0) {
        // e^x E1(x) avoids underflow in the comparison.
        let s = exp_scaled_e1(x).unwrap();
        prop_assert!(s < 1.0 / x);
        prop_assert!(s > 1.0 / (x + 1.0));
    }

    #[test]
    fn e1_strictly_decreasing(x in 1e-6f64..30.0, step in 1e-6f64..5.0) {
        prop_assert!(exp_integral_e1(x).unwrap() > exp_integral_e1(x + step).unwrap());
    }
}
