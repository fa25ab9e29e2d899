//! Cylinder Bessel functions of order 0 and 1 and the closed-form radial
//! solutions used for the three-dimensional limit problem.
//!
//! `J` is evaluated by its power series for `x <= 5`, by Miller's backward
//! recurrence (normalized with `J0 + 2 sum J_2k = 1`) on `(5, 25)` and by the
//! Hankel asymptotic expansion from 25 on. `K` uses its logarithmic series for
//! `x <= 2` and Temme's continued fraction (Steed's algorithm) above.

use crate::error::{Error, Result};

/// Largest argument for which `K` is evaluated; beyond it `K` is reported as
/// zero with [`BesselEval::underflow`] set.
pub const ARGUMENT_CAP: f64 = 700.0;

/// First positive zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const J_SERIES_MAX: f64 = 5.0;
const J_ASYMPTOTIC_MIN: f64 = 25.0;
const K_SERIES_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    fn index(self) -> usize {
        match self {
            BesselOrder::Zero => 0,
            BesselOrder::One => 1,
        }
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            n => Err(Error::InvalidArgument(format!("unsupported Bessel order {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: BesselOrder,
    pub argument: f64,
    pub value: f64,
    pub abs_error_bound: f64,
    /// Set when the argument exceeded [`ARGUMENT_CAP`] and the value was
    /// flushed to zero.
    pub underflow: bool,
}

fn check_argument(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("Bessel argument {x} must be >= 0")));
    }
    Ok(())
}

/// `J_order(x)` for `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    Ok(eval_j(order, x)?.value)
}

/// `K_order(x)` for `x > 0`. Returns 0 beyond [`ARGUMENT_CAP`].
pub fn bessel_k(order: BesselOrder, x: f64) -> Result<f64> {
    Ok(eval_k(order, x)?.value)
}

pub fn eval_j(order: BesselOrder, x: f64) -> Result<BesselEval> {
    check_argument(x)?;
    if x.is_infinite() {
        return Err(Error::InvalidArgument("Bessel argument must be finite".into()));
    }
    let (value, abs_error_bound) = if x <= J_SERIES_MAX {
        (j_series(order.index(), x), 1e-13)
    } else if x < J_ASYMPTOTIC_MIN {
        let (j0, j1) = j_miller(x);
        (if order == BesselOrder::Zero { j0 } else { j1 }, 1e-14)
    } else {
        (j_hankel(order.index(), x), 1e-14)
    };
    Ok(BesselEval {
        order,
        argument: x,
        value,
        abs_error_bound,
        underflow: false,
    })
}

pub fn eval_k(order: BesselOrder, x: f64) -> Result<BesselEval> {
    check_argument(x)?;
    if x == 0.0 {
        return Err(Error::InvalidArgument("K diverges at zero".into()));
    }
    if x > ARGUMENT_CAP {
        return Ok(BesselEval {
            order,
            argument: x,
            value: 0.0,
            abs_error_bound: f64::MIN_POSITIVE,
            underflow: true,
        });
    }
    let (k0, k1) = if x <= K_SERIES_MAX {
        k_series(x)
    } else {
        k_continued_fraction(x)
    };
    let value = if order == BesselOrder::Zero { k0 } else { k1 };
    Ok(BesselEval {
        order,
        argument: x,
        value,
        abs_error_bound: 1e-14 * value,
        underflow: false,
    })
}

/// Both `J0(x)` and `J1(x)`; infallible for finite `x >= 0`.
pub(crate) fn j01(x: f64) -> (f64, f64) {
    debug_assert!(x >= 0.0);
    if x <= J_SERIES_MAX {
        (j_series(0, x), j_series(1, x))
    } else if x < J_ASYMPTOTIC_MIN {
        j_miller(x)
    } else {
        (j_hankel(0, x), j_hankel(1, x))
    }
}

/// Both `K0(x)` and `K1(x)` for `0 < x <= ARGUMENT_CAP`.
pub(crate) fn k01(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x > ARGUMENT_CAP {
        (0.0, 0.0)
    } else if x <= K_SERIES_MAX {
        k_series(x)
    } else {
        k_continued_fraction(x)
    }
}

/// `(sin x / x, exp(-x) / x)`: regular interior and decaying exterior radial
/// solutions of `u'' + (2/r) u' = -/+ u` in three dimensions.
pub fn spherical_profile_pair(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!("spherical profile argument {x} must be > 0")));
    }
    Ok((sinc(x), (-x).exp() / x))
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

fn j_series(n: usize, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if n == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn j_miller(x: f64) -> (f64, f64) {
    // Even starting index well past x so that J_start is negligible.
    let start = 2 * (((x + 40.0 + 8.0 * x.cbrt()) / 2.0) as usize);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if k - 1 == 1 {
            j1 = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

fn j_hankel(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // a_k / x^k with alternating signs in pairs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // chi = x - (n/2 + 1/4) pi
    let (cos_chi, sin_chi) = if n == 0 {
        ((c + s) * std::f64::consts::FRAC_1_SQRT_2, (s - c) * std::f64::consts::FRAC_1_SQRT_2)
    } else {
        ((s - c) * std::f64::consts::FRAC_1_SQRT_2, -(s + c) * std::f64::consts::FRAC_1_SQRT_2)
    };
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn k_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();
    // I0, I1 and the digamma-weighted sums.
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            t0 *= y / (kf * kf);
            t1 *= y / (kf * (kf + 1.0));
            harmonic += 1.0 / kf;
        }
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (k as f64 + 1.0);
        i0 += t0;
        i1 += t1;
        s0 += harmonic * t0;
        s1 += (psi_k1 + psi_k2) * t1;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(ln_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

fn k_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
