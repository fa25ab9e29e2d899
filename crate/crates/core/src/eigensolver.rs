//! Principal positive eigenvalue of `-Δu = λ m_D u` with Neumann conditions,
//! found as the positive root of `ν(t)`, the bottom of the spectrum of
//! `K - t M_m` relative to `M`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::{LinearBackend, Pattern, ShiftedSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Relative tolerance on `ν(t)`.
    pub nu_tol: f64,
    /// Relative tolerance on the root `λ`.
    pub root_tol: f64,
    /// Relative residual for conjugate-gradient solves.
    pub cg_tol: f64,
    /// Cap on root-finding steps (and on shift refreshes per `ν` solve).
    pub max_outer: usize,
    /// Cap on inverse-iteration sweeps per shift.
    pub max_inner: usize,
    pub backend: LinearBackend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nu_tol: 1e-10,
            root_tol: 1e-12,
            cg_tol: 1e-12,
            max_outer: 60,
            max_inner: 200,
            backend: LinearBackend::default(),
        }
    }
}

/// Piecewise-constant weight `m_D = 1_D - β 1_{Ω∖D}` on mesh cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    indicator: Vec<bool>,
    beta: f64,
    cell_values: Vec<f64>,
    total_integral: f64,
    measure: f64,
}

impl WeightField {
    pub fn new(mesh: &Mesh, indicator: Vec<bool>, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        if indicator.len() != mesh.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "indicator has {} entries for {} cells",
                indicator.len(),
                mesh.n_cells()
            )));
        }
        let cell_values: Vec<f64> = indicator.iter().map(|&d| if d { 1.0 } else { -beta }).collect();
        let total_integral = cell_values.iter().zip(mesh.cell_measure()).map(|(m, a)| m * a).sum();
        let measure = indicator
            .iter()
            .zip(mesh.cell_measure())
            .filter(|(d, _)| **d)
            .map(|(_, a)| a)
            .sum();
        Ok(Self {
            indicator,
            beta,
            cell_values,
            total_integral,
            measure,
        })
    }

    pub fn from_cells(mesh: &Mesh, cells: &[usize], beta: f64) -> Result<Self> {
        let mut indicator = vec![false; mesh.n_cells()];
        for &c in cells {
            *indicator
                .get_mut(c)
                .ok_or_else(|| Error::InvalidArgument(format!("cell {c} out of range")))? = true;
        }
        Self::new(mesh, indicator, beta)
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cell_values(&self) -> &[f64] {
        &self.cell_values
    }

    /// `∫_Ω m_D`.
    pub fn total_integral(&self) -> f64 {
        self.total_integral
    }

    /// `|D|`.
    pub fn measure(&self) -> f64 {
        self.measure
    }
}

/// Stiffness, mass and weighted mass on a shared symmetric pattern.
#[derive(Debug, Clone)]
pub struct Operators {
    pattern: Arc<Pattern>,
    stiffness: Vec<f64>,
    mass: Vec<f64>,
    weighted_mass: Vec<f64>,
    lumped_mass: Vec<f64>,
    beta: f64,
}

/// Weight-independent part of the assembly, reusable across sets `D`.
#[derive(Debug, Clone)]
pub struct MeshOperators {
    pattern: Arc<Pattern>,
    stiffness: Vec<f64>,
    mass: Vec<f64>,
    cell_slots: Vec<[usize; 9]>,
    cell_measure: Vec<f64>,
}

impl MeshOperators {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.n_vertices();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for tri in mesh.triangles() {
            for &a in tri {
                for &b in tri {
                    if a != b {
                        rows[a].push(b);
                    }
                }
            }
        }
        let pattern = Pattern::from_rows(rows);
        let mut stiffness = vec![0.0; pattern.nnz()];
        let mut mass = vec![0.0; pattern.nnz()];
        let mut cell_slots = Vec::with_capacity(mesh.n_cells());
        let v = mesh.vertices();
        for (c, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.cell_measure()[c];
            let p = tri.map(|i| v[i]);
            // Gradients of barycentric coordinates: ∇φ_i = rot(e_i) / (2A).
            let grads: [[f64; 2]; 3] = std::array::from_fn(|i| {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)]
            });
            let mut slots = [0usize; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let s = pattern.slot(tri[i], tri[j]).expect("pattern covers cell");
                    slots[3 * i + j] = s;
                    stiffness[s] += area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    mass[s] += area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
                }
            }
            cell_slots.push(slots);
        }
        Self {
            pattern,
            stiffness,
            mass,
            cell_slots,
            cell_measure: mesh.cell_measure().to_vec(),
        }
    }

    /// Adds the weighted mass `M_m = (1+β) M_D - β M`.
    pub fn with_weight(&self, weight: &WeightField) -> Operators {
        let beta = weight.beta();
        let mut weighted: Vec<f64> = self.mass.iter().map(|m| -beta * m).collect();
        for (c, &inside) in weight.indicator().iter().enumerate() {
            if inside {
                let area = self.cell_measure[c];
                for i in 0..3 {
                    for j in 0..3 {
                        let local = area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
                        weighted[self.cell_slots[c][3 * i + j]] += (1.0 + beta) * local;
                    }
                }
            }
        }
        Operators::from_parts(
            self.pattern.clone(),
            self.stiffness.clone(),
            self.mass.clone(),
            weighted,
            beta,
        )
    }
}

/// P1 stiffness, consistent mass and weighted mass with natural (Neumann)
/// boundary conditions.
pub fn assemble(mesh: &Mesh, weight: &WeightField) -> Operators {
    MeshOperators::new(mesh).with_weight(weight)
}

impl Operators {
    /// Wraps arbitrary symmetric matrices on a shared pattern (`mass` must be
    /// positive definite).
    pub fn from_parts(
        pattern: Arc<Pattern>,
        stiffness: Vec<f64>,
        mass: Vec<f64>,
        weighted_mass: Vec<f64>,
        beta: f64,
    ) -> Self {
        let mut lumped_mass = vec![0.0; pattern.n()];
        for (i, lm) in lumped_mass.iter_mut().enumerate() {
            *lm = (pattern.row_ptr()[i]..pattern.row_ptr()[i + 1]).map(|k| mass[k]).sum();
        }
        Self {
            pattern,
            stiffness,
            mass,
            weighted_mass,
            lumped_mass,
            beta,
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn weighted_mass(&self) -> &[f64] {
        &self.weighted_mass
    }

    pub fn apply_stiffness(&self, x: &[f64], y: &mut [f64]) {
        self.pattern.matvec(&self.stiffness, x, y)
    }

    pub fn apply_mass(&self, x: &[f64], y: &mut [f64]) {
        self.pattern.matvec(&self.mass, x, y)
    }

    pub fn apply_weighted_mass(&self, x: &[f64], y: &mut [f64]) {
        self.pattern.matvec(&self.weighted_mass, x, y)
    }

    /// `(xᵀKx, xᵀMx, xᵀM_m x)`.
    pub fn forms(&self, x: &[f64]) -> (f64, f64, f64) {
        (
            self.pattern.quadratic(&self.stiffness, x),
            self.pattern.quadratic(&self.mass, x),
            self.pattern.quadratic(&self.weighted_mass, x),
        )
    }

    fn shifted(&self, t: f64, sigma: f64) -> Vec<f64> {
        self.stiffness
            .iter()
            .zip(&self.mass)
            .zip(&self.weighted_mass)
            .map(|((k, m), w)| k - t * w - sigma * m)
            .collect()
    }

    /// Ratio `‖(K - λM_m)u‖ / ‖Ku‖`, both measured in the inverse lumped-mass
    /// norm.
    pub fn residual_ratio(&self, lambda: f64, u: &[f64]) -> f64 {
        let n = self.n();
        let (mut ku, mut mu) = (vec![0.0; n], vec![0.0; n]);
        self.apply_stiffness(u, &mut ku);
        self.apply_weighted_mass(u, &mut mu);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let r = ku[i] - lambda * mu[i];
            num += r * r / self.lumped_mass[i];
            den += ku[i] * ku[i] / self.lumped_mass[i];
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct NuEval {
    pub t: f64,
    pub nu: f64,
    /// `dν/dt = -xᵀM_m x` for the M-normalized eigenvector.
    pub slope: f64,
    /// Eigenvector, M-normalized, positive mean.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Shifted-operator setups, including rejected (indefinite) shifts.
    pub factorizations: usize,
}

/// Intermediate root-finding steps only need `ν` to a few digits; the
/// tolerance tightens by itself as `ν → 0`.
const NEWTON_RELAX: f64 = 1e-6;

fn scale_of(nu: f64, t: f64, beta: f64) -> f64 {
    nu.abs() + t * beta.max(1.0) + 1e-12
}

fn m_normalize(ops: &Operators, x: &mut [f64]) -> f64 {
    let norm = ops.pattern.quadratic(&ops.mass, x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    norm
}

/// Smallest eigenvalue of `(K - tM_m) x = ν M x` by shifted inverse
/// iteration, warm-started from `warm` when given.
pub fn principal_nu(t: f64, ops: &Operators, warm: Option<&[f64]>, config: &SolverConfig) -> Result<NuEval> {
    principal_nu_bounded(t, ops, warm, None, 0.0, config)
}

/// As [`principal_nu`], with a known lower bound on `ν(t)` that caps the
/// first shift, and a tolerance relaxed to `relax·|ν|` when that is looser.
fn principal_nu_bounded(
    t: f64,
    ops: &Operators,
    warm: Option<&[f64]>,
    lower: Option<f64>,
    relax: f64,
    config: &SolverConfig,
) -> Result<NuEval> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be a nonnegative number, got {t}")));
    }
    let n = ops.n();
    let mut x: Vec<f64> = match warm {
        Some(w) if w.len() == n && w.iter().any(|v| *v != 0.0) => w.to_vec(),
        _ => vec![1.0; n],
    };
    m_normalize(ops, &mut x);
    let rayleigh = |x: &[f64]| {
        let (k, _, w) = ops.forms(x);
        k - t * w
    };
    let mut nu = rayleigh(&x);
    let mut offset = 0.1 * nu.abs() + 1e-8;
    // Since m ≤ 1, ν(t) ≥ -t always; without a warm vector the Rayleigh
    // estimate is too crude to shift from.
    let bound = match (lower, warm.is_some()) {
        (Some(l), _) => Some(l),
        (None, false) => Some(-t),
        (None, true) => None,
    };
    if let Some(l) = bound {
        let floor = l - 1e-8 - 1e-12 * scale_of(l, t, ops.beta);
        offset = offset.max(nu - floor);
    }
    let mut iterations = 0;
    let mut factorizations = 0;
    let mut tmp = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    for _outer in 0..config.max_outer.max(1) {
        let sigma = nu - offset;
        factorizations += 1;
        let solver = match ShiftedSolver::new(ops.pattern.clone(), ops.shifted(t, sigma), config.backend, config.cg_tol) {
            Ok(s) => s,
            Err(_) => {
                offset = 4.0 * offset + 1e-6 * scale_of(nu, t, ops.beta);
                continue;
            }
        };
        let mut prev = nu;
        let mut indefinite = false;
        let mut stalled = false;
        for inner in 0..config.max_inner.max(1) {
            ops.apply_mass(&x, &mut tmp);
            if solver.solve(&mut tmp).is_err() {
                indefinite = true;
                break;
            }
            std::mem::swap(&mut x, &mut tmp);
            m_normalize(ops, &mut x);
            iterations += 1;
            nu = rayleigh(&x);
            last_change = (nu - prev).abs();
            let tol = (0.1 * config.nu_tol * scale_of(nu, t, ops.beta)).max(relax * nu.abs());
            if inner > 0 && last_change <= tol {
                if nu < sigma - 1e-9 * scale_of(nu, t, ops.beta) {
                    // Converged to a point below the shift: the factorization
                    // was not definite after all.
                    indefinite = true;
                    break;
                }
                let mean: f64 = x.iter().sum();
                if mean < 0.0 {
                    x.iter_mut().for_each(|v| *v = -*v);
                }
                let (_, _, w) = ops.forms(&x);
                return Ok(NuEval {
                    t,
                    nu,
                    slope: -w,
                    vector: x,
                    iterations,
                    factorizations,
                });
            }
            prev = nu;
            // Slow contraction: refresh the shift closer to the estimate.
            if inner >= 8 && (inner + 1) % 8 == 0 && (nu - sigma) > 2.0 * (0.1 * nu.abs() + 1e-8) {
                stalled = true;
                break;
            }
        }
        if indefinite {
            offset = 4.0 * offset + 1e-6 * scale_of(nu, t, ops.beta);
        } else if stalled {
            offset = 0.1 * nu.abs() + 1e-8;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations,
        residual: last_change,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// Per-vertex values, positive, with `∫u² = 1`.
    pub eigenfunction: Vec<f64>,
    /// `|∫|∇u|² - λ∫m_D u²|`.
    pub rayleigh_gap: f64,
    /// Total inverse-iteration sweeps.
    pub iterations: usize,
    pub factorizations: usize,
    /// `(t, ν(t))` pairs evaluated during root finding.
    pub nu_samples: Vec<(f64, f64)>,
}

/// Positive root of `ν` on generic operators; `ν(0) ≥ 0` is assumed
/// (Neumann: `ν(0) = 0` with positive slope; Dirichlet: `ν(0) > 0`).
pub fn positive_root(
    ops: &Operators,
    guess: f64,
    warm: Option<&[f64]>,
    config: &SolverConfig,
) -> Result<EigenResult> {
    let mut samples = Vec::new();
    let mut iterations = 0;
    let mut factorizations = 0;
    let mut t = if guess > 0.0 && guess.is_finite() { guess } else { 1.0 };
    let mut t_lo = 0.0;
    let mut warm_vec: Option<Vec<f64>> = warm.map(<[f64]>::to_vec);

    // Newton offset |ν/ν'| within tolerance; either side of the root.
    let converged = |e: &NuEval| {
        let slope = e.slope.abs().max(f64::MIN_POSITIVE);
        // Noise floor of ν itself; normally root_tol decides.
        let floor = 1e-3 * config.nu_tol * scale_of(e.nu, e.t, ops.beta) / slope;
        e.slope < 0.0 && (e.nu / slope).abs() <= (config.root_tol * e.t).max(floor)
    };
    let finish = |e: NuEval, samples: Vec<(f64, f64)>, iterations: usize, factorizations: usize| {
        let mut u = e.vector;
        let max = u.iter().cloned().fold(f64::MIN, f64::max);
        let min = u.iter().cloned().fold(f64::MAX, f64::min);
        if min < -1e-10 * max {
            return Err(Error::NotPrincipal { min, max });
        }
        // M-normalized already, i.e. ∫u² = 1; renormalize against drift.
        m_normalize(ops, &mut u);
        let (k, _, w) = ops.forms(&u);
        Ok(EigenResult {
            lambda: e.t,
            eigenfunction: u,
            rayleigh_gap: (k - e.t * w).abs(),
            iterations,
            factorizations,
            nu_samples: samples,
        })
    };

    // Expand until ν(t) < 0.
    let mut eval = loop {
        let e = principal_nu_bounded(t, ops, warm_vec.as_deref(), None, NEWTON_RELAX, config)?;
        iterations += e.iterations;
        factorizations += e.factorizations;
        samples.push((e.t, e.nu));
        if converged(&e) {
            return finish(e, samples, iterations, factorizations);
        }
        if e.nu < 0.0 {
            break e;
        }
        t_lo = t;
        warm_vec = Some(e.vector);
        t *= 4.0;
        if samples.len() > 40 {
            return Err(Error::BracketingFailed(format!("nu stays nonnegative up to t = {t}")));
        }
    };

    for _ in 0..config.max_outer.max(1) {
        // Newton from the right stays right of the root (ν concave); fall
        // back to bisection if it leaves the bracket.
        let step = -eval.nu / eval.slope;
        let mut next = eval.t + step;
        if !(eval.slope < 0.0 && next > t_lo && next < eval.t) {
            next = 0.5 * (t_lo + eval.t);
        }
        // Concavity: ν(next) ≥ ν(eval.t) for next in [t_lo, eval.t].
        let e = principal_nu_bounded(next, ops, Some(&eval.vector), Some(eval.nu), NEWTON_RELAX, config)?;
        iterations += e.iterations;
        factorizations += e.factorizations;
        samples.push((e.t, e.nu));
        if converged(&e) {
            return finish(e, samples, iterations, factorizations);
        }
        if e.nu < 0.0 {
            eval = e;
        } else {
            t_lo = next;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations,
        residual: eval.nu.abs(),
    })
}

/// Warm start for [`principal_positive_eigenvalue_with`].
#[derive(Debug, Clone, Copy)]
pub struct WarmStart<'a> {
    pub lambda: f64,
    pub eigenfunction: &'a [f64],
}

pub fn principal_positive_eigenvalue(mesh: &Mesh, weight: &WeightField) -> Result<EigenResult> {
    principal_positive_eigenvalue_with(&MeshOperators::new(mesh), weight, None, &SolverConfig::default())
}

/// `λ(D, Ω)` on precomputed mesh operators.
pub fn principal_positive_eigenvalue_with(
    base: &MeshOperators,
    weight: &WeightField,
    warm: Option<WarmStart<'_>>,
    config: &SolverConfig,
) -> Result<EigenResult> {
    if weight.total_integral() >= 0.0 {
        return Err(Error::NegativeAverageViolated {
            total_integral: weight.total_integral(),
        });
    }
    let ops = base.with_weight(weight);
    let (guess, vector) = match warm {
        Some(w) => (w.lambda, Some(w.eigenfunction)),
        // Above the small-set scale 4/|D|; Newton approaches from the right.
        None => (8.0 * weight.beta().max(1.0) / weight.measure().max(1e-300), None),
    };
    positive_root(&ops, guess, vector, config)
}
