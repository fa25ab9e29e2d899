//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::Solve;
use faer::{Mat, Side};
use habitat_core::eigensolver::Operators;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// `J_n(x)` from its power series in exact rational arithmetic.
pub fn bessel_j_exact(n: u32, x: f64) -> f64 {
    let x = BigRational::from_f64(x).expect("finite argument");
    let half_sq = &x * &x / BigRational::from_integer(BigInt::from(4));
    let mut term = BigRational::one();
    for _ in 0..n {
        term = term * &x / BigRational::from_integer(BigInt::from(2));
    }
    for k in 1..=n {
        term = term / BigRational::from_integer(BigInt::from(k));
    }
    let eps = BigRational::new(BigInt::one(), BigInt::from(10).pow(40));
    let mut sum = BigRational::zero();
    let mut k = 0u32;
    loop {
        sum += &term;
        k += 1;
        term = -term * &half_sq / BigRational::from_integer(BigInt::from(k * (k + n)));
        if term.abs() < eps && k as f64 > 1.0 {
            break;
        }
    }
    sum.to_f64().expect("representable")
}

/// `K_ν(x) = ∫₀^∞ exp(-x cosh t) cosh(νt) dt` by the trapezoid rule, which
/// converges geometrically for this analytic, rapidly decaying integrand.
pub fn bessel_k_quadrature(nu: f64, x: f64) -> f64 {
    let t_max = (750.0 / x).max(1.0).acosh() + 1.0;
    let h = 2e-3;
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut s = 0.5 * f(0.0);
    for i in 1..=steps {
        s += f(i as f64 * h);
    }
    s * h
}

/// Five-point finite differences for `-Δw = λ m w` on the square of side
/// `box_side` with `w = 0` on its edges, `m = 1` on the disk of radius
/// `radius` about the center and `-β` elsewhere. `n` intervals per side.
///
/// `λ` is the fixed point `t = μ(t)` of the smallest eigenvalue `μ(t)` of
/// the positive definite `L + t(1 + β) 1_{ext}`, with `μ` from inverse
/// iteration on a sparse Cholesky factor.
pub fn fd_limit_eigenvalue(beta: f64, radius: f64, box_side: f64, n: usize) -> f64 {
    let h = box_side / n as f64;
    let m = n - 1;
    let idx = |i: usize, j: usize| i * m + j;
    let exterior: Vec<bool> = (0..m * m)
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let x = -0.5 * box_side + (i + 1) as f64 * h;
            let y = -0.5 * box_side + (j + 1) as f64 * h;
            x.hypot(y) >= radius
        })
        .collect();
    let inv_h2 = 1.0 / (h * h);
    let mu = |t: f64, start: &mut Vec<f64>| -> f64 {
        let mut trips = Vec::with_capacity(3 * m * m);
        for i in 0..m {
            for j in 0..m {
                let k = idx(i, j);
                let diag = 4.0 * inv_h2 + if exterior[k] { t * (1.0 + beta) } else { 0.0 };
                trips.push(Triplet::new(k, k, diag));
                if i + 1 < m {
                    trips.push(Triplet::new(idx(i + 1, j), k, -inv_h2));
                }
                if j + 1 < m {
                    trips.push(Triplet::new(idx(i, j + 1), k, -inv_h2));
                }
            }
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(m * m, m * m, &trips).expect("valid triplets");
        let llt = a.sp_cholesky(Side::Lower).expect("positive definite");
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..m * m)
                .map(|k| {
                    let (i, j) = (k / m, k % m);
                    let mut v = 4.0 * inv_h2 * x[k];
                    if exterior[k] {
                        v += t * (1.0 + beta) * x[k];
                    }
                    if i > 0 {
                        v -= inv_h2 * x[idx(i - 1, j)];
                    }
                    if i + 1 < m {
                        v -= inv_h2 * x[idx(i + 1, j)];
                    }
                    if j > 0 {
                        v -= inv_h2 * x[idx(i, j - 1)];
                    }
                    if j + 1 < m {
                        v -= inv_h2 * x[idx(i, j + 1)];
                    }
                    v
                })
                .collect()
        };
        let mut prev = f64::INFINITY;
        let mut rq = f64::INFINITY;
        for _ in 0..500 {
            let norm = start.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut rhs = Mat::<f64>::from_fn(m * m, 1, |k, _| start[k] / norm);
            llt.solve_in_place(rhs.as_mut());
            *start = (0..m * m).map(|k| rhs[(k, 0)]).collect();
            let ax = apply(start);
            let num: f64 = start.iter().zip(&ax).map(|(a, b)| a * b).sum();
            let den: f64 = start.iter().map(|v| v * v).sum();
            rq = num / den;
            if (prev - rq).abs() <= 1e-13 * rq {
                break;
            }
            prev = rq;
        }
        rq
    };
    // f(t) = μ(t) - t is concave, positive at 0 and nonpositive at the
    // Dirichlet eigenvalue of the disk; Illinois steps on that bracket.
    let mut vec = vec![1.0; m * m];
    let (mut lo, mut hi) = (0.0, (2.404_825_557_695_773 / radius).powi(2));
    let (mut f_lo, mut f_hi) = (mu(lo, &mut vec) - lo, mu(hi, &mut vec) - hi);
    let mut side = 0;
    for _ in 0..100 {
        let t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let f = mu(t, &mut vec) - t;
        if f.abs() <= 1e-11 * t || hi - lo <= 1e-12 * hi {
            return t;
        }
        if f > 0.0 {
            lo = t;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = t;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (lo + hi)
}

pub fn dense(ops: &Operators, values: &[f64]) -> DMatrix<f64> {
    let p = ops.pattern();
    let mut a = DMatrix::zeros(ops.n(), ops.n());
    for i in 0..ops.n() {
        for s in p.row_ptr()[i]..p.row_ptr()[i + 1] {
            a[(i, p.col_idx()[s])] = values[s];
        }
    }
    a
}

/// Full spectrum of `(K - tM_m) x = ν M x`, ascending.
pub fn dense_spectrum(ops: &Operators, t: f64) -> Vec<f64> {
    let k = dense(ops, ops.stiffness());
    let mm = dense(ops, ops.weighted_mass());
    let chol = dense(ops, ops.mass()).cholesky().expect("mass is positive definite");
    let l_inv = chol.l().try_inverse().expect("invertible factor");
    let a = &l_inv * (k - mm * t) * l_inv.transpose();
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
