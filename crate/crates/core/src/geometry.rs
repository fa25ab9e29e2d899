//! Star-shaped planar domains with a Fourier polar radius
//! `R(θ) = a₀ + Σ_k (a_k cos kθ + b_k sin kθ)`, their boundary curvature, and
//! nearest-point projection onto the boundary.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

const VALIDATION_SAMPLES: usize = 4096;
const CURVATURE_SCAN: usize = 8192;
const PROJECTION_SCAN: usize = 4096;

/// Domain description as read from configuration files. `fourier_cos[k]`
/// multiplies `cos(kθ)` (k ≥ 0) and `fourier_sin[k]` multiplies `sin((k+1)θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub center: [f64; 2],
    pub fourier_cos: Vec<f64>,
    #[serde(default)]
    pub fourier_sin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    center: Point,
    cos: Vec<f64>,
    sin: Vec<f64>,
    r_min: f64,
    r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub position: Point,
    pub curvature: f64,
    pub inward_normal: Point,
    pub tangent: Point,
}

impl DomainSpec {
    pub fn new(center: Point, fourier_cos: Vec<f64>, fourier_sin: Vec<f64>) -> Result<Self> {
        if fourier_cos.is_empty() {
            return Err(Error::Config("fourier_cos needs at least the constant term".into()));
        }
        if fourier_cos.iter().chain(&fourier_sin).chain(&center).any(|c| !c.is_finite()) {
            return Err(Error::Config("domain coefficients must be finite".into()));
        }
        let n = fourier_cos.len().max(fourier_sin.len() + 1);
        let mut cos = fourier_cos;
        cos.resize(n, 0.0);
        let mut sin = vec![0.0];
        sin.extend(fourier_sin);
        sin.resize(n, 0.0);
        let mut spec = Self {
            center,
            cos,
            sin,
            r_min: 0.0,
            r_max: 0.0,
        };
        let (lo, hi) = (0..VALIDATION_SAMPLES)
            .map(|i| spec.radius(TAU * i as f64 / VALIDATION_SAMPLES as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        if lo <= 0.0 {
            return Err(Error::Config(format!("polar radius must stay positive (min {lo})")));
        }
        spec.r_min = lo;
        spec.r_max = hi;
        Ok(spec)
    }

    pub fn from_config(config: &DomainConfig) -> Result<Self> {
        Self::new(config.center, config.fourier_cos.clone(), config.fourier_sin.clone())
    }

    pub fn to_config(&self) -> DomainConfig {
        DomainConfig {
            center: self.center,
            fourier_cos: self.cos.clone(),
            fourier_sin: self.sin[1..].to_vec(),
        }
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new([0.0, 0.0], vec![radius], vec![])
    }

    /// Fits the polar radius `r(θ)` by a truncated Fourier series of `modes`
    /// terms, from `4 * modes` equispaced samples.
    pub fn from_polar_fn(center: Point, modes: usize, r: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = 4 * modes.max(4);
        let values: Vec<f64> = (0..samples)
            .map(|j| r(TAU * j as f64 / samples as f64))
            .collect();
        let mut cos = vec![0.0; modes + 1];
        let mut sin = vec![0.0; modes];
        for (j, v) in values.iter().enumerate() {
            let t = TAU * j as f64 / samples as f64;
            cos[0] += v;
            for k in 1..=modes {
                let (s, c) = (k as f64 * t).sin_cos();
                cos[k] += 2.0 * v * c;
                sin[k - 1] += 2.0 * v * s;
            }
        }
        let scale = 1.0 / samples as f64;
        cos.iter_mut().chain(sin.iter_mut()).for_each(|c| *c *= scale);
        // Drop coefficients at round-off level.
        let cut = 1e-15 * cos[0].abs();
        cos.iter_mut().chain(sin.iter_mut()).for_each(|c| {
            if c.abs() < cut {
                *c = 0.0;
            }
        });
        while cos.len() > 1 && cos.last() == Some(&0.0) && sin.len() >= cos.len() - 1 && sin[cos.len() - 2] == 0.0 {
            cos.pop();
            sin.truncate(cos.len() - 1);
        }
        Self::new(center, cos, sin)
    }

    /// Ellipse with semi-axes `a` (along x) and `b`, centered at the origin.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
        }
        Self::from_polar_fn([0.0, 0.0], 96, |t| {
            let (s, c) = t.sin_cos();
            a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt()
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `R(θ)`.
    pub fn radius(&self, theta: f64) -> f64 {
        self.radius_derivatives(theta).0
    }

    /// `(R, R', R'')` at `θ`, by term-wise differentiation.
    pub fn radius_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        let (s1, c1) = theta.sin_cos();
        let (mut r, mut dr, mut ddr) = (self.cos[0], 0.0, 0.0);
        // cos(kθ), sin(kθ) by the angle-addition recurrence.
        let (mut ck, mut sk) = (1.0, 0.0);
        for k in 1..self.cos.len() {
            let c_next = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = c_next;
            let kf = k as f64;
            let (a, b) = (self.cos[k], self.sin[k]);
            r += a * ck + b * sk;
            dr += kf * (b * ck - a * sk);
            ddr -= kf * kf * (a * ck + b * sk);
        }
        (r, dr, ddr)
    }

    pub fn point(&self, theta: f64) -> Point {
        let r = self.radius(theta);
        let (s, c) = theta.sin_cos();
        [self.center[0] + r * c, self.center[1] + r * s]
    }

    /// `(X(θ), X'(θ), X''(θ))` of the boundary parametrization.
    fn curve_derivatives(&self, theta: f64) -> (Point, Point, Point) {
        let (r, dr, ddr) = self.radius_derivatives(theta);
        let (s, c) = theta.sin_cos();
        let x = [self.center[0] + r * c, self.center[1] + r * s];
        let dx = [dr * c - r * s, dr * s + r * c];
        let ddx = [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s];
        (x, dx, ddx)
    }

    /// Speed `|X'(θ)|`.
    pub fn speed(&self, theta: f64) -> f64 {
        let (r, dr, _) = self.radius_derivatives(theta);
        r.hypot(dr)
    }

    /// Exact enclosed area `½∫R²dθ`.
    pub fn area(&self) -> f64 {
        let mut sum = PI * self.cos[0] * self.cos[0];
        for k in 1..self.cos.len() {
            sum += 0.5 * PI * (self.cos[k].powi(2) + self.sin[k].powi(2));
        }
        sum
    }

    /// Boundary length (trapezoid rule, spectrally accurate for periodic
    /// integrands).
    pub fn perimeter(&self) -> f64 {
        let n = 4096;
        (0..n).map(|i| self.speed(TAU * i as f64 / n as f64)).sum::<f64>() * TAU / n as f64
    }

    /// Same domain rotated by `angle` about its center.
    pub fn rotated(&self, angle: f64) -> Self {
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        for k in 1..cos.len() {
            // R_new(θ) = R(θ - angle)
            let (s, c) = (k as f64 * angle).sin_cos();
            let (a, b) = (self.cos[k], self.sin[k]);
            cos[k] = a * c - b * s;
            sin[k] = a * s + b * c;
        }
        Self {
            cos,
            sin,
            ..self.clone()
        }
    }

    /// Whether `p` lies in the closed domain.
    pub fn contains(&self, p: Point) -> bool {
        let d = sub(p, self.center);
        let r = norm(d);
        r == 0.0 || r <= self.radius(d[1].atan2(d[0]))
    }

    /// Largest admissible measure `β|Ω|/(β+1)` for the favorable set.
    pub fn admissible_bound(&self, beta: f64) -> f64 {
        beta * self.area() / (beta + 1.0)
    }
}

/// Boundary point at parameter `θ` with curvature
/// `κ = (R² + 2R'² - R R'') / (R² + R'²)^{3/2}`.
pub fn curvature_at(spec: &DomainSpec, theta: f64) -> BoundaryPoint {
    let theta = theta.rem_euclid(TAU);
    let (r, dr, ddr) = spec.radius_derivatives(theta);
    let (x, dx, _) = spec.curve_derivatives(theta);
    let speed = norm(dx);
    let tangent = [dx[0] / speed, dx[1] / speed];
    let curvature = (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5);
    BoundaryPoint {
        theta,
        position: x,
        curvature,
        inward_normal: [-tangent[1], tangent[0]],
        tangent,
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Global curvature maximizer: dense scan plus golden-section refinement.
/// Ties (within 1e-12 relative) resolve to the smallest `θ`.
pub fn max_curvature(spec: &DomainSpec) -> BoundaryPoint {
    let step = TAU / CURVATURE_SCAN as f64;
    let kappa = |t: f64| curvature_at(spec, t).curvature;
    let mut best_i = 0;
    let mut best = kappa(0.0);
    for i in 1..CURVATURE_SCAN {
        let k = kappa(step * i as f64);
        if k > best + 1e-12 * best.abs().max(1.0) {
            best = k;
            best_i = i;
        }
    }
    let t0 = step * best_i as f64;
    let t_ref = golden_max(kappa, t0 - step, t0 + step, 1e-11);
    let k_ref = kappa(t_ref);
    if k_ref > best + 1e-12 * best.abs().max(1.0) {
        curvature_at(spec, t_ref)
    } else {
        curvature_at(spec, t0)
    }
}

/// Nearest boundary point to `p`: scan followed by safeguarded Newton on
/// `(X(θ) - p)·X'(θ) = 0`. Equidistant candidates resolve to the smallest `θ`.
pub fn project_to_boundary(spec: &DomainSpec, p: Point) -> BoundaryPoint {
    let step = TAU / PROJECTION_SCAN as f64;
    let d2 = |t: f64| {
        let q = spec.point(t);
        (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
    };
    let mut best_i = 0;
    let mut best = d2(0.0);
    for i in 1..PROJECTION_SCAN {
        let v = d2(step * i as f64);
        if v < best - 1e-12 * best.max(1e-300) {
            best = v;
            best_i = i;
        }
    }
    let t0 = step * best_i as f64;
    let (lo, hi) = (t0 - step, t0 + step);
    let mut t = t0;
    for _ in 0..50 {
        let (x, dx, ddx) = spec.curve_derivatives(t);
        let diff = sub(x, p);
        let g = dot(diff, dx);
        let dg = dot(dx, dx) + dot(diff, ddx);
        if g == 0.0 {
            break;
        }
        let mut next = if dg > 0.0 { t - g / dg } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = golden_max(|s| -d2(s), lo, hi, 1e-13);
            t = next;
            break;
        }
        let done = (next - t).abs() < 1e-15;
        t = next;
        if done {
            break;
        }
    }
    if d2(t) < best - 1e-15 * best.max(1e-300) {
        curvature_at(spec, t)
    } else {
        curvature_at(spec, t0)
    }
}

/// Points along the boundary equispaced in arclength: `count` parameters
/// `θ_j` with `s(θ_j) = (j + offset) L / count`.
pub(crate) struct ArclengthMap {
    thetas: Vec<f64>,
    lengths: Vec<f64>,
    total: f64,
}

impl ArclengthMap {
    pub(crate) fn new(spec: &DomainSpec) -> Self {
        let n = 16384;
        let h = TAU / n as f64;
        let mut thetas = Vec::with_capacity(n + 1);
        let mut lengths = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = spec.speed(0.0);
        thetas.push(0.0);
        lengths.push(0.0);
        for i in 1..=n {
            let t = h * i as f64;
            let v = spec.speed(t);
            // Simpson on each cell using the midpoint.
            let mid = spec.speed(t - 0.5 * h);
            acc += h / 6.0 * (prev + 4.0 * mid + v);
            prev = v;
            thetas.push(t);
            lengths.push(acc);
        }
        Self {
            thetas,
            lengths,
            total: acc,
        }
    }

    /// Parameter `θ` at arclength fraction `tau` in `[0, 1)`.
    pub(crate) fn theta_at(&self, tau: f64) -> f64 {
        let s = tau.rem_euclid(1.0) * self.total;
        let i = self.lengths.partition_point(|&l| l <= s).clamp(1, self.lengths.len() - 1);
        let (l0, l1) = (self.lengths[i - 1], self.lengths[i]);
        let (t0, t1) = (self.thetas[i - 1], self.thetas[i]);
        t0 + (t1 - t0) * (s - l0) / (l1 - l0)
    }

    pub(crate) fn total(&self) -> f64 {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_curvature() {
        let unit = DomainSpec::disk(1.0).unwrap();
        let two = DomainSpec::disk(2.0).unwrap();
        for i in 0..360 {
            let t = (i as f64).to_radians();
            assert!((curvature_at(&unit, t).curvature - 1.0).abs() < 1e-12);
            assert!((curvature_at(&two, t).curvature - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_fit_and_vertex_curvature() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        for i in 0..4096 {
            let t = TAU * i as f64 / 4096.0 + 1e-3;
            let (s, c) = t.sin_cos();
            let exact = 2.0 / (c.powi(2) + (2.0 * s).powi(2)).sqrt();
            assert!((e.radius(t) - exact).abs() < 1e-10);
        }
        assert!((curvature_at(&e, 0.0).curvature - 2.0).abs() < 1e-6);
        assert!((curvature_at(&e, PI / 2.0).curvature - 0.25).abs() < 1e-6);
        assert!((e.area() - TAU).abs() < 1e-9);
    }

    #[test]
    fn max_curvature_tie_breaks() {
        let c = max_curvature(&DomainSpec::disk(1.0).unwrap());
        assert_eq!(c.theta, 0.0);
        assert!((c.curvature - 1.0).abs() < 1e-12);

        let e = max_curvature(&DomainSpec::ellipse(2.0, 1.0).unwrap());
        // Either major-axis vertex; the fit breaks the symmetry at round-off.
        assert!(e.theta.abs() < 1e-9 || (e.theta - PI).abs() < 1e-9, "{:?}", e);
        assert!((e.curvature - 2.0).abs() < 1e-6);

        let p = DomainSpec::new([0.0, 0.0], vec![1.0, 0.0, 0.1], vec![]).unwrap();
        let m = max_curvature(&p);
        assert!(m.theta < 1e-9);
        // Dense closed-form scan oracle.
        let best = (0..100_000)
            .map(|i| curvature_at(&p, TAU * i as f64 / 1e5).curvature)
            .fold(f64::MIN, f64::max);
        assert!((m.curvature - best).abs() < 1e-9);
        assert!((curvature_at(&p, PI).curvature - m.curvature).abs() < 1e-12);
    }

    #[test]
    fn gauss_bonnet() {
        let p = DomainSpec::new([0.3, -0.1], vec![1.0, 0.05, 0.1, 0.0, 0.02], vec![0.03, -0.04]).unwrap();
        let n = 8192;
        let total: f64 = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                curvature_at(&p, t).curvature * p.speed(t)
            })
            .sum::<f64>()
            * TAU
            / n as f64;
        assert!((total - TAU).abs() < 1e-8);
    }

    #[test]
    fn projection_examples() {
        let d = DomainSpec::disk(1.0).unwrap();
        let q = project_to_boundary(&d, [0.5, 0.0]);
        assert!(dist(q.position, [1.0, 0.0]) < 1e-12);
        let q = project_to_boundary(&d, [1e-9, 0.0]);
        assert!(dist(q.position, [1.0, 0.0]) < 1e-12);
        let q = project_to_boundary(&d, [0.0, 0.0]);
        assert_eq!(q.theta, 0.0);

        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let q = project_to_boundary(&e, [1.9, 0.0]);
        assert!(dist(q.position, [2.0, 0.0]) < 1e-8);
    }

    #[test]
    fn projection_is_orthogonal() {
        let e = DomainSpec::new([0.0, 0.0], vec![1.2, 0.1, 0.15], vec![0.05]).unwrap();
        for i in 0..200 {
            let t = TAU * i as f64 / 200.0;
            let b = curvature_at(&e, t);
            let off = 0.3 * e.r_min() * ((i % 7) as f64 / 7.0 - 0.5);
            let p = [b.position[0] + off * b.inward_normal[0], b.position[1] + off * b.inward_normal[1]];
            let q = project_to_boundary(&e, p);
            let d = sub(p, q.position);
            assert!(dot(d, q.tangent).abs() <= 1e-6 * norm(d).max(1e-12), "i={i}");
        }
    }

    #[test]
    fn rotation_moves_boundary() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let r = e.rotated(0.7);
        for i in 0..50 {
            let t = 0.13 * i as f64;
            assert!((r.radius(t + 0.7) - e.radius(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(DomainSpec::new([0.0, 0.0], vec![1.0, 1.5], vec![]).is_err());
        assert!(DomainSpec::new([0.0, 0.0], vec![], vec![]).is_err());
    }
}
