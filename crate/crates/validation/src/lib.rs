//! Brute-force reference values for special functions, written without
//! sharing code or technique with the `fas-kl` implementations.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Fixed-point fraction bits for the series oracle.
const FRAC_BITS: u32 = 320;

/// Splits a finite non-negative f64 into `m · 2^e` with integer `m`.
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

fn shift(v: BigInt, by: i64) -> BigInt {
    if by >= 0 {
        v << by as usize
    } else {
        v >> (-by) as usize
    }
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    // Keep 64 fraction bits; the rest is far below f64 resolution near 1.
    let keep = shift(v.clone(), 64 - FRAC_BITS as i64);
    keep.to_f64().unwrap() / 2f64.powi(64)
}

/// `J₀(x) = Σ (−x²/4)^m / (m!)²` summed in 320-bit fixed point. The input is
/// taken exactly, so the only error is one unit in the last fixed-point place
/// per term; there is no cancellation loss at any `x`.
pub fn j0_series(x: f64) -> f64 {
    assert!(x.is_finite(), "finite argument required");
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    let (m, e) = decompose(x);
    // x²/4 = m² · 2^(2e − 2)
    let q = shift(BigInt::from(m) * BigInt::from(m), 2 * e as i64 - 2 + FRAC_BITS as i64);
    let mut term = BigInt::from(1) << FRAC_BITS as usize;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        term = -((term * &q) >> FRAC_BITS as usize) / BigInt::from(k * k);
        sum += &term;
        if term.is_zero() {
            break;
        }
        k += 1;
    }
    fixed_to_f64(&sum)
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights at the odd-indexed Kronrod nodes.
const G_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its gap to the embedded 7-point Gauss rule.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kr = GK_WEIGHTS[7] * fc;
    let mut ga = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        kr += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            ga += G_WEIGHTS[i / 2] * pair;
        }
    }
    (kr * h, (kr - ga).abs() * h)
}

/// Adaptive Gauss-Kronrod with absolute tolerance `tol` over `[a, b]`. A
/// panel is also accepted once its error estimate is at rounding level.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || err <= 50.0 * f64::EPSILON * v.abs() || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(&f, a, b, tol, 30)
}

/// `E₁(x) = ∫ₓ^∞ e^{−t}/t dt`, via `t = x e^s` so the integrand
/// `exp(−x e^s)` is smooth and bounded; integrated until `x e^s` exceeds 745.
pub fn e1_integral(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "E1 needs positive finite x");
    let upper = (745.0 / x).ln().max(1.0);
    let f = |s: f64| (-x * s.exp()).exp();
    // Scale for the tolerance: E₁(x) ≥ e^{−x} ln(1 + 1/x) / 2.
    let scale = 0.5 * (-x).exp() * (1.0 / x).ln_1p();
    integrate(f, 0.0, upper, 1e-14 * scale)
}

/// `n` points spaced evenly in `log x` from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
