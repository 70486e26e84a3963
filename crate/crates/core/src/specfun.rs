//! Scalar special functions: Bessel `J0` and the exponential integral `E1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

/// Euler–Mascheroni constant, 20 significant digits.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.57721566490153286061;

/// Below this |x| the power series is summed; above it the Hankel expansion.
const J0_SERIES_LIMIT: f64 = 20.0;

/// Bessel function of the first kind, order zero.
///
/// For `|x| <= 20` the power series `sum (-x^2/4)^m / (m!)^2` is summed in
/// double-double arithmetic (the alternating terms reach ~1e7 at the top of the
/// range, so plain `f64` would lose the 1e-12 target to cancellation). Beyond
/// that the Hankel asymptotic expansion is used, whose smallest term is below
/// `e^-40` there.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j0 requires a finite argument, got {x}")));
    }
    let ax = x.abs();
    if ax <= J0_SERIES_LIMIT {
        Ok(j0_series(ax))
    } else {
        Ok(j0_hankel(ax))
    }
}

fn j0_series(x: f64) -> f64 {
    // q = x^2 / 4, exact in double-double.
    let q = Dd::from_product(x, x).scale(0.25);
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    let mut m = 1.0;
    loop {
        term = term.mul(q).div_f64(-(m * m));
        sum = sum.add(term);
        if term.hi.abs() < 1e-17 {
            break;
        }
        m += 1.0;
    }
    sum.hi + sum.lo
}

fn j0_hankel(x: f64) -> f64 {
    // t_k = prod_{j<=k} (2j-1)^2 / (k! (8x)^k); P = t0 - t2 + t4 ..., Q = -t1 + t3 - ...
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kk = k as f64;
        let odd = 2.0 * kk - 1.0;
        term *= odd * odd / (8.0 * kk * x);
        if term >= prev || term < 1e-17 {
            break;
        }
        prev = term;
        match k % 4 {
            1 => q -= term,
            2 => p -= term,
            3 => q += term,
            _ => p += term,
        }
    }
    let (s, c) = x.sin_cos();
    // cos(x - pi/4) and sin(x - pi/4) without subtracting pi/4 in floating point.
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_e1_domain(x)?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * e1_scaled_cf(x))
    }
}

/// `e^x · E1(x)`, computed without forming the two factors separately when
/// `x > 1` so that large arguments neither overflow nor underflow.
pub fn exp_scaled_e1(x: f64) -> Result<f64> {
    check_e1_domain(x)?;
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(e1_scaled_cf(x))
    }
}

fn check_e1_domain(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() || x == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::Domain(format!("exp_integral_e1 requires x > 0, got {x}")))
    }
}

fn e1_series(x: f64) -> f64 {
    // -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    let mut sum = 0.0;
    let mut power = 1.0; // (-1)^{k+1} x^k / k!
    for k in 1..60 {
        let kk = k as f64;
        power *= if k == 1 { x } else { -x / kk };
        let term = power / kk;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

/// Modified Lentz evaluation of `e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))`.
fn e1_scaled_cf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Dd {
    fn from_product(a: f64, b: f64) -> Self {
        let hi = a * b;
        let lo = a.mul_add(b, -hi);
        Dd { hi, lo }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn scale(self, k: f64) -> Self {
        Dd {
            hi: self.hi * k,
            lo: self.lo * k,
        }
    }

    fn add(self, o: Dd) -> Self {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Self {
        let p = Dd::from_product(self.hi, o.hi);
        Dd::renorm(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = Dd::from_product(q1, d);
        let r = (self.hi - p.hi - p.lo + self.lo) / d;
        Dd::renorm(q1, r)
    }
}
