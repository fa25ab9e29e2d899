//! Whole-space limit problem `-Δw = I m w`, `m = 1` on the ball of measure 2
//! and `-β` outside, solved in closed form by matching the regular interior
//! solution to the decaying exterior one at `r = r₂`.
//!
//! The radial profile is normalized by `w(0) = 1`. All integrals over the
//! half-space reduce to one-dimensional radial integrals:
//! `∫_{ℝ^N_+} f(|z|) dz = (N ω_N / 2) ∫ f(r) r^{N-1} dr` and
//! `∫_{ℝ^N_+} f(|z|) z_N dz = ω_{N-1} ∫ f(r) r^N dr`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special_functions::{j01, k01, sinc, J0_FIRST_ZERO};

const SCAN_POINTS: usize = 200;
const SCAN_LOWER: f64 = 1e-6;
const SCAN_UPPER_FRACTION: f64 = 0.999;
const ROOT_REL_TOL: f64 = 1e-13;
const QUAD_REL_TOL: f64 = 1e-12;

/// Volume of the unit ball in `dim` dimensions (`dim` in 1..=3).
pub fn unit_ball_volume(dim: u32) -> Result<f64> {
    match dim {
        1 => Ok(2.0),
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => Err(Error::InvalidArgument(format!("dimension {dim} not supported"))),
    }
}

/// Radius `r₂` of the ball of Lebesgue measure 2.
pub fn ball_radius(dim: u32) -> Result<f64> {
    Ok((2.0 / unit_ball_volume(dim)?).powf(1.0 / dim as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParams {
    pub beta: f64,
    pub dim: u32,
}

impl LimitParams {
    pub fn new(beta: f64, dim: u32) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {dim}")));
        }
        Ok(Self { beta, dim })
    }

    fn radius(&self) -> f64 {
        ball_radius(self.dim).expect("validated dimension")
    }

    /// First positive zero of the interior radial solution (in its argument).
    pub fn interior_first_zero(&self) -> f64 {
        if self.dim == 2 {
            J0_FIRST_ZERO
        } else {
            PI
        }
    }

    /// Exclusive upper end of the bracket for `I`: beyond it the interior
    /// profile changes sign inside the ball.
    pub fn eigenvalue_upper_bound(&self) -> f64 {
        (self.interior_first_zero() / self.radius()).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSolution {
    pub params: LimitParams,
    pub eigenvalue_i: f64,
    pub radius_r2: f64,
    pub interior_amplitude: f64,
    pub exterior_amplitude: f64,
    /// `γ = (1/(N+1)) ∫_{ℝ^N_+} |∇w|² z_N`.
    pub gamma: f64,
    /// `γ₁ = ∫_{ℝ^N_+} m w² z_N`.
    pub gamma1: f64,
    /// Curvature coefficient `Γ = 2(N-1)γ / ∫_{ℝ^N_+} |∇w|²`.
    pub capital_gamma: f64,
    pub grad_sq_halfspace: f64,
    pub mw2_halfspace: f64,
    /// Sum of quadrature error estimates, including the truncated tail.
    pub quadrature_error: f64,
    /// Number of sign changes of the matching residual on the scan grid.
    pub scan_sign_changes: usize,
}

fn interior_log_derivative(params: &LimitParams, eigenvalue: f64, r: f64) -> f64 {
    let k = eigenvalue.sqrt();
    let x = k * r;
    if params.dim == 2 {
        let (j0, j1) = j01(x);
        -k * j1 / j0
    } else {
        k / x.tan() - 1.0 / r
    }
}

fn exterior_log_derivative(params: &LimitParams, eigenvalue: f64, r: f64) -> f64 {
    let s = (eigenvalue * params.beta).sqrt();
    if params.dim == 2 {
        let (k0, k1) = k01(s * r);
        -s * k1 / k0
    } else {
        -s - 1.0 / r
    }
}

/// Exterior minus interior logarithmic radial derivative at `r₂`. It is
/// negative for small `I`, tends to `+∞` at the upper bracket end, and its
/// root is the limit eigenvalue.
pub fn matching_residual(candidate_i: f64, params: &LimitParams) -> Result<f64> {
    let upper = params.eigenvalue_upper_bound();
    if !(candidate_i > 0.0 && candidate_i < upper) {
        return Err(Error::OutOfBracket {
            candidate: candidate_i,
            upper,
        });
    }
    let r2 = params.radius();
    Ok(exterior_log_derivative(params, candidate_i, r2) - interior_log_derivative(params, candidate_i, r2))
}

/// Solves for `I`, builds the profile and evaluates all derived constants.
pub fn solve_limit_eigenvalue(params: &LimitParams) -> Result<LimitSolution> {
    let params = LimitParams::new(params.beta, params.dim)?;
    let upper = SCAN_UPPER_FRACTION * params.eigenvalue_upper_bound();
    let ratio = (upper / SCAN_LOWER).ln() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| SCAN_LOWER * (ratio * i as f64).exp())
        .collect();
    let values = grid
        .iter()
        .map(|&t| matching_residual(t, &params))
        .collect::<Result<Vec<_>>>()?;
    let changes: Vec<usize> = (1..SCAN_POINTS)
        .filter(|&i| values[i - 1].signum() != values[i].signum())
        .collect();
    let first = *changes.first().ok_or_else(|| {
        Error::BracketingFailed(format!(
            "matching residual has no sign change on [{SCAN_LOWER}, {upper}] for beta={} dim={}",
            params.beta, params.dim
        ))
    })?;

    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    let f_lo = values[first - 1];
    while hi - lo > ROOT_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        let f_mid = matching_residual(mid, &params)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eigenvalue_i = 0.5 * (lo + hi);
    Ok(build_solution(params, eigenvalue_i, changes.len()))
}

fn build_solution(params: LimitParams, eigenvalue_i: f64, scan_sign_changes: usize) -> LimitSolution {
    let r2 = params.radius();
    let k = eigenvalue_i.sqrt();
    let s = (eigenvalue_i * params.beta).sqrt();
    let interior_at_r2 = if params.dim == 2 { j01(k * r2).0 } else { sinc(k * r2) };
    let exterior_at_r2 = exterior_shape(&params, s, r2);
    let mut sol = LimitSolution {
        params,
        eigenvalue_i,
        radius_r2: r2,
        interior_amplitude: 1.0,
        exterior_amplitude: interior_at_r2 / exterior_at_r2,
        gamma: 0.0,
        gamma1: 0.0,
        capital_gamma: 0.0,
        grad_sq_halfspace: 0.0,
        mw2_halfspace: 0.0,
        quadrature_error: 0.0,
        scan_sign_changes,
    };
    fill_integrals(&mut sol);
    sol
}

fn exterior_shape(params: &LimitParams, s: f64, r: f64) -> f64 {
    if params.dim == 2 {
        k01(s * r).0
    } else {
        (-s * r).exp() / (s * r)
    }
}

struct RadialMoments {
    grad: f64,
    mass: f64,
    grad_moment: f64,
    mass_moment: f64,
    error: f64,
}

fn radial_moments(sol: &LimitSolution) -> RadialMoments {
    let n = sol.params.dim as i32;
    let r2 = sol.radius_r2;
    let s = (sol.eigenvalue_i * sol.params.beta).sqrt();
    // e^{-2 s r} < 1e-16 beyond this radius.
    let r_tail = (16.0 * std::f64::consts::LN_10 / (2.0 * s)).max(2.0 * r2);
    let weight = |r: f64| if r < r2 { 1.0 } else { -sol.params.beta };

    let mut error = 0.0;
    let mut integrate = |f: &dyn Fn(f64) -> f64| {
        let a = quadrature::integrate(f, 0.0, r2, QUAD_REL_TOL, 0.0);
        let b = quadrature::integrate(f, r2, r_tail, QUAD_REL_TOL, 0.0);
        // Tail beyond r_tail: integrand decays at least like e^{-2 s r} r^N.
        let tail = f(r_tail).abs() / (2.0 * s) * (1.0 + n as f64 / (s * r_tail));
        error += a.error_estimate + b.error_estimate + tail;
        a.value + b.value
    };
    let grad = integrate(&|r| sol.profile(r).1.powi(2) * r.powi(n - 1));
    let mass = integrate(&|r| weight(r) * sol.profile(r).0.powi(2) * r.powi(n - 1));
    let grad_moment = integrate(&|r| sol.profile(r).1.powi(2) * r.powi(n));
    let mass_moment = integrate(&|r| weight(r) * sol.profile(r).0.powi(2) * r.powi(n));
    RadialMoments {
        grad,
        mass,
        grad_moment,
        mass_moment,
        error,
    }
}

fn fill_integrals(sol: &mut LimitSolution) {
    let n = sol.params.dim;
    let half_sphere = n as f64 * unit_ball_volume(n).expect("2 or 3") / 2.0;
    let omega_lower = unit_ball_volume(n - 1).expect("1 or 2");
    let m = radial_moments(sol);
    sol.grad_sq_halfspace = half_sphere * m.grad;
    sol.mw2_halfspace = half_sphere * m.mass;
    sol.gamma = omega_lower / (n as f64 + 1.0) * m.grad_moment;
    sol.gamma1 = omega_lower * m.mass_moment;
    sol.capital_gamma = 2.0 * (n as f64 - 1.0) * sol.gamma / sol.grad_sq_halfspace;
    sol.quadrature_error = m.error * half_sphere.max(omega_lower);
}

impl LimitSolution {
    /// `(w(r), w'(r))`.
    pub fn profile(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let k = self.eigenvalue_i.sqrt();
        let s = (self.eigenvalue_i * self.params.beta).sqrt();
        let b = self.exterior_amplitude;
        let a = self.interior_amplitude;
        match (self.params.dim, r < self.radius_r2) {
            (2, true) => {
                let (j0, j1) = j01(k * r);
                (a * j0, -a * k * j1)
            }
            (2, false) => {
                let (k0, k1) = k01(s * r);
                (b * k0, -b * s * k1)
            }
            (_, true) => {
                let x = k * r;
                (a * sinc(x), a * k * sinc_derivative(x))
            }
            (_, false) => {
                let e = (-s * r).exp() / (s * r);
                (b * e, -b * e * (s + 1.0 / r))
            }
        }
    }

    /// `w''(r)` from the closed forms (for `r > 0`).
    pub fn profile_second_derivative(&self, r: f64) -> f64 {
        let k = self.eigenvalue_i.sqrt();
        let s = (self.eigenvalue_i * self.params.beta).sqrt();
        let b = self.exterior_amplitude;
        let a = self.interior_amplitude;
        match (self.params.dim, r < self.radius_r2) {
            (2, true) => {
                let x = k * r;
                let (j0, j1) = j01(x);
                -a * k * k * (j0 - j1 / x)
            }
            (2, false) => {
                let x = s * r;
                let (k0, k1) = k01(x);
                b * s * s * (k0 + k1 / x)
            }
            (_, true) => {
                let x = k * r;
                let (sn, cs) = x.sin_cos();
                a * k * k * ((2.0 - x * x) * sn - 2.0 * x * cs) / (x * x * x)
            }
            (_, false) => {
                let x = s * r;
                b * s * s * (-x).exp() * (1.0 / x + 2.0 / (x * x) + 2.0 / (x * x * x))
            }
        }
    }

    pub fn weight(&self, r: f64) -> f64 {
        if r < self.radius_r2 {
            1.0
        } else {
            -self.params.beta
        }
    }

    /// Exponential decay rate `√(Iβ)` of the profile.
    pub fn decay_rate(&self) -> f64 {
        (self.eigenvalue_i * self.params.beta).sqrt()
    }

    /// Principal eigenvalue of a whole-space ball of radius `radius`.
    pub fn ball_eigenvalue(&self, radius: f64) -> f64 {
        self.eigenvalue_i * (radius / self.radius_r2).powi(-2)
    }

    /// Both sides of `(N-1)γ - Iγ₁ = 2γ - 2I r₂^{N+1} ω_{N-1}/(N(N+1)) ∫ m w²`.
    pub fn identity_sides(&self) -> (f64, f64) {
        let n = self.params.dim as f64;
        let omega_lower = unit_ball_volume(self.params.dim - 1).expect("1 or 2");
        let i = self.eigenvalue_i;
        let lhs = (n - 1.0) * self.gamma - i * self.gamma1;
        let rhs = 2.0 * self.gamma
            - 2.0 * i * self.radius_r2.powf(n + 1.0) * omega_lower / (n * (n + 1.0)) * self.mw2_halfspace;
        (lhs, rhs)
    }

    /// Residual of the identity relative to the magnitude of its four terms.
    pub fn identity_residual(&self) -> f64 {
        let n = self.params.dim as f64;
        let omega_lower = unit_ball_volume(self.params.dim - 1).expect("1 or 2");
        let i = self.eigenvalue_i;
        let terms = [
            (n - 1.0) * self.gamma,
            i * self.gamma1,
            2.0 * self.gamma,
            2.0 * i * self.radius_r2.powf(n + 1.0) * omega_lower / (n * (n + 1.0)) * self.mw2_halfspace,
        ];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        let (lhs, rhs) = self.identity_sides();
        (lhs - rhs) / scale
    }

    /// Copy with the profile amplitude multiplied by `factor` and every
    /// quadratic integral rescaled accordingly.
    pub fn with_amplitude(&self, factor: f64) -> Self {
        let f2 = factor * factor;
        Self {
            interior_amplitude: self.interior_amplitude * factor,
            exterior_amplitude: self.exterior_amplitude * factor,
            gamma: self.gamma * f2,
            gamma1: self.gamma1 * f2,
            grad_sq_halfspace: self.grad_sq_halfspace * f2,
            mw2_halfspace: self.mw2_halfspace * f2,
            quadrature_error: self.quadrature_error * f2,
            ..self.clone()
        }
    }

    /// Recomputes `Γ` from the stored `γ` and gradient integral.
    pub fn recomputed_capital_gamma(&self) -> f64 {
        2.0 * (self.params.dim as f64 - 1.0) * self.gamma / self.grad_sq_halfspace
    }
}

fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        -x / 3.0 + x * x2 / 30.0
    } else {
        let (s, c) = x.sin_cos();
        (x * c - s) / (x * x)
    }
}
