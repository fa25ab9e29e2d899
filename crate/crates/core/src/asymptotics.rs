//! Small-measure diagnostics of optimal habitats: peak location, the
//! nearly-spherical parametrization of the free boundary, exponential decay,
//! structure checks, blow-up profiles and the two-term eigenvalue fit.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::eigensolver::{EigenResult, MeshOperators, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{curvature_at, dist, max_curvature, project_to_boundary, BoundaryPoint, DomainSpec, Point};
use crate::limit_problem::{ball_radius, solve_limit_eigenvalue, LimitParams, LimitSolution};
use crate::mesh::{build_mesh, Mesh};
use crate::shape_optimizer::{multi_start, quantile_superlevel, IndicatorSet, OptimizationRecord, OptimizerConfig};

/// Spatial dimension of every mesh handled here.
const DIM: f64 = 2.0;
pub const N_RAYS: usize = 256;
/// Fraction of multi-crossing rays tolerated by the polar parametrization.
const MULTI_CROSS_LIMIT: f64 = 0.05;
/// Crossings closer than this many `δ^{1/N}` (and at least one cell) to the
/// point where the ray leaves Ω are not resolved and count as boundary
/// limited.
const BOUNDARY_LAYER: f64 = 0.125;
const MIN_DECAY_SAMPLES: usize = 30;
const DECAY_FLOOR: f64 = 1e-12;
const ANNULUS_TOLERANCE: f64 = 0.2;
const PARTIAL_WINDOW_LIMIT: f64 = 0.1;
const BLOWUP_RADII: usize = 48;
const BLOWUP_ANGLES: usize = 128;

/// `δ^{1/N}`, the length scale of a habitat of measure `δ`.
pub fn length_scale(delta: f64) -> f64 {
    delta.powf(1.0 / DIM)
}

fn r2() -> f64 {
    ball_radius(2).expect("dimension 2 is supported")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakData {
    pub p_delta: BoundaryPoint,
    pub max_value: f64,
    pub argmax_vertex: usize,
    /// Distance from the argmax vertex to the boundary.
    pub interior_offset: f64,
    /// `(N-1)` times the curvature at `p_delta`.
    pub alpha_delta: f64,
    /// False when a second local maximum above half the peak sits more than
    /// `4δ^{1/N}` away.
    pub unique: bool,
    pub rival: Option<(usize, f64)>,
}

pub fn extract_peak(result: &EigenResult, mesh: &Mesh, spec: &DomainSpec, delta: f64) -> PeakData {
    let u = &result.eigenfunction;
    let mut arg = 0;
    for (i, &v) in u.iter().enumerate() {
        if v > u[arg] {
            arg = i;
        }
    }
    let x = mesh.vertices()[arg];
    let neighbors = mesh.vertex_neighbors();
    let p = refine_on_boundary(mesh, spec, u, arg, &neighbors[arg]);
    let far = 4.0 * length_scale(delta);
    let mut rival: Option<(usize, f64)> = None;
    for (v, nb) in neighbors.iter().enumerate() {
        if v == arg || u[v] <= 0.5 * u[arg] || dist(mesh.vertices()[v], x) <= far {
            continue;
        }
        if nb.iter().all(|&w| u[v] >= u[w]) && rival.map_or(true, |(_, r)| u[v] > r) {
            rival = Some((v, u[v]));
        }
    }
    PeakData {
        p_delta: p,
        max_value: u[arg],
        argmax_vertex: arg,
        interior_offset: dist(x, project_to_boundary(spec, x).position),
        alpha_delta: (DIM - 1.0) * p.curvature,
        unique: rival.is_none(),
        rival,
    }
}

/// Boundary maximum of `u` near the argmax vertex `arg`: a parabola in the
/// boundary angle through `arg` and its two boundary neighbours. Interior
/// argmax vertices are simply projected.
fn refine_on_boundary(mesh: &Mesh, spec: &DomainSpec, u: &[f64], arg: usize, nb: &[usize]) -> BoundaryPoint {
    let x = mesh.vertices()[arg];
    let p = project_to_boundary(spec, x);
    if !mesh.boundary_flags()[arg] {
        return p;
    }
    let wrap = |a: f64| (a + PI).rem_euclid(TAU) - PI;
    let (mut left, mut right): (Option<(f64, f64)>, Option<(f64, f64)>) = (None, None);
    for &v in nb.iter().filter(|&&v| mesh.boundary_flags()[v]) {
        let d = wrap(project_to_boundary(spec, mesh.vertices()[v]).theta - p.theta);
        if d < 0.0 && left.map_or(true, |(l, _)| d > l) {
            left = Some((d, u[v]));
        } else if d > 0.0 && right.map_or(true, |(r, _)| d < r) {
            right = Some((d, u[v]));
        }
    }
    let (Some((a, ua)), Some((b, ub))) = (left, right) else {
        return p;
    };
    let u0 = u[arg];
    // Vertex of the interpolating parabola through (a, ua), (0, u0), (b, ub).
    let num = ua * b * b - ub * a * a - u0 * (b * b - a * a);
    let den = 2.0 * (ua * b - ub * a - u0 * (b - a));
    if den == 0.0 {
        return p;
    }
    let t = (num / den).clamp(a, b);
    curvature_at(spec, p.theta + t)
}

/// Measure-weighted barycenter of `set`, projected to the boundary.
pub fn boundary_center(set: &IndicatorSet, mesh: &Mesh, spec: &DomainSpec) -> BoundaryPoint {
    let mut c = [0.0; 2];
    let mut total = 0.0;
    for &cell in &set.cells {
        let w = mesh.cell_measure()[cell];
        let g = mesh.centroid(cell);
        c[0] += w * g[0];
        c[1] += w * g[1];
        total += w;
    }
    if total > 0.0 {
        c = [c[0] / total, c[1] / total];
    }
    project_to_boundary(spec, c)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearSphereParam {
    pub q_delta: BoundaryPoint,
    /// `(direction angle, ρ)` for rays that cross the free boundary inside Ω.
    pub samples: Vec<(f64, f64)>,
    /// Half-circle L² norm (no reflection).
    pub l2_norm: f64,
    pub sup_norm: f64,
    pub grad_lipschitz_estimate: f64,
    pub multi_cross_rays: usize,
    /// Rays leaving Ω before meeting the free boundary.
    pub boundary_limited_rays: usize,
}

/// Vertex values of the indicator of `set`, averaged over incident cells by
/// area. Its half level set is a smoothed copy of the discrete free boundary.
fn smoothed_indicator(set: &IndicatorSet, mesh: &Mesh) -> Vec<f64> {
    let member = set.indicator(mesh.n_cells());
    let mut inside = vec![0.0; mesh.n_vertices()];
    let mut total = vec![0.0; mesh.n_vertices()];
    for (c, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.cell_measure()[c];
        for &v in tri {
            total[v] += a;
            if member[c] {
                inside[v] += a;
            }
        }
    }
    inside.iter().zip(&total).map(|(i, t)| i / t).collect()
}

enum RayOutcome {
    Crossing { distance: f64, multi: bool },
    BoundaryLimited,
    Empty,
}

#[allow(clippy::too_many_arguments)]
fn trace_ray(mesh: &Mesh, chi: &[f64], level: f64, origin: Point, dir: Point, step: f64, reach: f64, layer: f64) -> RayOutcome {
    let at = |t: f64| [origin[0] + t * dir[0], origin[1] + t * dir[1]];
    let g = |t: f64| mesh.interpolate(chi, at(t)).map(|v| v - level);
    let mut prev: Option<(f64, f64)> = None;
    let mut crossings = Vec::new();
    let mut entered_inside = false;
    let mut started_outside = false;
    let n = (reach / step).ceil() as usize;
    for k in 0..=n {
        let t = (k as f64 + 0.5) * step;
        let Some(v) = g(t) else {
            if prev.is_some() {
                break;
            }
            if t > 8.0 * step {
                return RayOutcome::BoundaryLimited;
            }
            continue;
        };
        match prev {
            None => {
                if v > 0.0 {
                    entered_inside = true;
                } else {
                    started_outside = true;
                }
            }
            Some((tp, vp)) => {
                if v > 0.0 {
                    entered_inside = true;
                }
                if (vp > 0.0) != (v > 0.0) {
                    crossings.push((tp, t, vp > 0.0));
                }
            }
        }
        prev = Some((t, v));
    }
    let first_exit = crossings.iter().find(|c| c.2);
    let Some(&(mut lo, mut hi, _)) = first_exit else {
        return match prev {
            Some((_, v)) if v > 0.0 => RayOutcome::BoundaryLimited,
            _ if entered_inside => RayOutcome::BoundaryLimited,
            _ => RayOutcome::Empty,
        };
    };
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        match g(mid) {
            Some(v) if v > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    let distance = 0.5 * (lo + hi);
    if g(distance + layer).is_none() {
        return RayOutcome::BoundaryLimited;
    }
    RayOutcome::Crossing {
        distance,
        multi: crossings.len() > 1 || started_outside,
    }
}

/// Radial deviation of `∂D ∩ Ω` from the half-ball of measure `δ` about `q`,
/// sampled on [`N_RAYS`] inward rays.
pub fn polar_parametrization(set: &IndicatorSet, q: &BoundaryPoint, delta: f64, mesh: &Mesh) -> Result<NearSphereParam> {
    let chi = smoothed_indicator(set, mesh);
    parametrize(&chi, 0.5, q, delta, mesh)
}

/// As [`polar_parametrization`], with the free boundary taken as the level
/// set `{u = threshold}` of the eigenfunction the set was rearranged from.
/// This resolves the boundary below the cell size.
pub fn polar_parametrization_from_level(
    u: &[f64],
    threshold: f64,
    q: &BoundaryPoint,
    delta: f64,
    mesh: &Mesh,
) -> Result<NearSphereParam> {
    parametrize(u, threshold, q, delta, mesh)
}

fn parametrize(chi: &[f64], level: f64, q: &BoundaryPoint, delta: f64, mesh: &Mesh) -> Result<NearSphereParam> {
    let scale = length_scale(delta);
    let r2 = r2();
    let step = 0.25 * mesh.resolution();
    let reach = 4.0 * r2 * scale;
    let layer = (BOUNDARY_LAYER * scale).max(mesh.resolution());
    let (n, t) = (q.inward_normal, q.tangent);
    let dphi = PI / N_RAYS as f64;
    let mut rho: Vec<Option<f64>> = Vec::with_capacity(N_RAYS);
    let mut samples = Vec::new();
    let (mut multi, mut limited) = (0, 0);
    for j in 0..N_RAYS {
        let phi = -FRAC_PI_2 + (j as f64 + 0.5) * dphi;
        let (s, c) = phi.sin_cos();
        let dir = [c * n[0] + s * t[0], c * n[1] + s * t[1]];
        match trace_ray(mesh, chi, level, q.position, dir, step, reach, layer) {
            RayOutcome::Crossing { distance, multi: m } => {
                multi += m as usize;
                let r = distance / scale - r2;
                samples.push((dir[1].atan2(dir[0]), r));
                rho.push(Some(r));
            }
            RayOutcome::BoundaryLimited => {
                limited += 1;
                rho.push(None);
            }
            RayOutcome::Empty => {
                multi += 1;
                rho.push(None);
            }
        }
    }
    if multi as f64 > MULTI_CROSS_LIMIT * N_RAYS as f64 {
        return Err(Error::NotStarShaped { multi, total: N_RAYS });
    }
    let l2_norm = samples.iter().map(|(_, r)| r * r * dphi).sum::<f64>().sqrt();
    let sup_norm = samples.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    let mut lip: f64 = 0.0;
    for w in rho.windows(3) {
        if let [Some(a), Some(b), Some(c)] = *w {
            lip = lip.max((a - 2.0 * b + c).abs() / (dphi * dphi));
        }
    }
    Ok(NearSphereParam {
        q_delta: *q,
        samples,
        l2_norm,
        sup_norm,
        grad_lipschitz_estimate: lip,
        multi_cross_rays: multi,
        boundary_limited_rays: limited,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted `d/dr` of `log u + (N-1)/2 log r`.
    pub slope: f64,
    /// `-slope`, in physical units.
    pub rate: f64,
    /// `rate · δ^{1/N}`; tends to `√(Iβ)`.
    pub scaled_rate: f64,
    pub samples: usize,
}

/// Exponential decay rate of `u` away from the peak, fitted on the window
/// `δ^{1/N} < |x - P| < 4δ^{1/N}`. The radial `(N-1)/2 · log r` factor of
/// the modified Bessel tail is removed before the linear fit.
pub fn decay_fit(result: &EigenResult, peak: &PeakData, delta: f64, mesh: &Mesh) -> Result<DecayFit> {
    let scale = length_scale(delta);
    let u = &result.eigenfunction;
    let floor = DECAY_FLOOR * peak.max_value;
    let p = peak.p_delta.position;
    let pts: Vec<(f64, f64)> = mesh
        .vertices()
        .iter()
        .zip(u)
        .filter_map(|(&x, &v)| {
            let r = dist(x, p);
            (r > scale && r < 4.0 * scale && v > floor).then(|| (r, v.ln() + 0.5 * (DIM - 1.0) * r.ln()))
        })
        .collect();
    if pts.len() < MIN_DECAY_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: pts.len(),
            needed: MIN_DECAY_SAMPLES,
        });
    }
    let (slope, _, _) = least_squares(&pts);
    Ok(DecayFit {
        slope,
        rate: -slope,
        scaled_rate: -slope * scale,
        samples: pts.len(),
    })
}

/// `(slope, intercept, rms residual)` of the line through `pts`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub connected: bool,
    pub annulus_ok: bool,
}

/// Edge-connectivity of `set` and containment between the balls about the
/// peak of measure `2δ(1 ∓ 0.2)`.
pub fn inclusion_and_connectivity(set: &IndicatorSet, peak: &PeakData, delta: f64, mesh: &Mesh) -> Structure {
    let member = set.indicator(mesh.n_cells());
    let mut seen = vec![false; mesh.n_cells()];
    let mut reached = 0;
    if let Some(&first) = set.cells.first() {
        let nb = mesh.cell_neighbors();
        let mut queue = VecDeque::from([first]);
        seen[first] = true;
        while let Some(c) = queue.pop_front() {
            reached += 1;
            for d in nb[c].iter().flatten() {
                if member[*d] && !seen[*d] {
                    seen[*d] = true;
                    queue.push_back(*d);
                }
            }
        }
    }
    let radius = |f: f64| (2.0 * delta * f / PI).sqrt();
    let (r_minus, r_plus) = (radius(1.0 - ANNULUS_TOLERANCE), radius(1.0 + ANNULUS_TOLERANCE));
    let p = peak.p_delta.position;
    let annulus_ok = (0..mesh.n_cells()).all(|c| {
        let d = dist(mesh.centroid(c), p);
        if member[c] {
            d <= r_plus
        } else {
            d >= r_minus
        }
    });
    Structure {
        connected: !set.cells.is_empty() && reached == set.cells.len(),
        annulus_ok,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlowupData {
    pub sup_error: f64,
    /// More than 10% of the window points inside Ω fell outside the mesh.
    pub partial_window: bool,
    pub exited_fraction: f64,
    pub samples: usize,
}

/// Compares `u(P + δ^{1/N} z) / max u` with `w(|z|) / w(0)` on a polar grid
/// `|z| ≤ 3 r₂` restricted to Ω.
pub fn blowup_profile(
    result: &EigenResult,
    peak: &PeakData,
    delta: f64,
    limit: &LimitSolution,
    mesh: &Mesh,
    spec: &DomainSpec,
) -> BlowupData {
    let scale = length_scale(delta);
    let p = peak.p_delta.position;
    let (n, t) = (peak.p_delta.inward_normal, peak.p_delta.tangent);
    let w0 = limit.profile(0.0).0;
    let window = 3.0 * limit.radius_r2;
    let (mut err, mut used, mut exited): (f64, usize, usize) = (0.0, 0, 0);
    for i in 0..=BLOWUP_RADII {
        let rz = window * i as f64 / BLOWUP_RADII as f64;
        let angles = if i == 0 { 1 } else { BLOWUP_ANGLES };
        for j in 0..angles {
            let (s, c) = (TAU * j as f64 / BLOWUP_ANGLES as f64).sin_cos();
            let z = [rz * c, rz * s];
            let x = [
                p[0] + scale * (z[0] * n[0] + z[1] * t[0]),
                p[1] + scale * (z[0] * n[1] + z[1] * t[1]),
            ];
            if !spec.contains(x) {
                continue;
            }
            match mesh.interpolate(&result.eigenfunction, x) {
                Some(v) => {
                    err = err.max((v / peak.max_value - limit.profile(rz).0 / w0).abs());
                    used += 1;
                }
                None => exited += 1,
            }
        }
    }
    let inside = used + exited;
    let exited_fraction = if inside > 0 { exited as f64 / inside as f64 } else { 1.0 };
    BlowupData {
        sup_error: err,
        partial_window: exited_fraction > PARTIAL_WINDOW_LIMIT,
        exited_fraction,
        samples: used,
    }
}

/// Parameters of a sweep other than the domain, β and the δ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Mesh size used at the first (largest) δ.
    pub mesh_resolution: f64,
    /// Mesh size at δ is `mesh_resolution · (δ/δ₀)^mesh_exponent`. Exponents
    /// above `1/N` refine the mesh relative to the habitat as δ shrinks, so
    /// the discretization error of the blown-up quantities decays too.
    pub mesh_exponent: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub optimizer: OptimizerConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mesh_resolution: 0.02,
            mesh_exponent: 0.75,
            n_starts: 3,
            seed: 0,
            solver: SolverConfig::default(),
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn resolution_for(&self, delta: f64, delta0: f64) -> f64 {
        self.mesh_resolution * (delta / delta0).powf(self.mesh_exponent)
    }
}

/// One δ of a sweep. The first eleven fields form the CSV row.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SweepRow {
    pub delta: f64,
    pub Lambda: f64,
    /// `|D|^{2/N} Λ` with the realized measure of `D`.
    pub scaled_Lambda: f64,
    /// Boundary angle of `P_δ`.
    pub P_delta: f64,
    /// Boundary angle of `Q_δ`.
    pub Q_delta: f64,
    pub H_at_P: f64,
    pub rho_l2: f64,
    pub rho_sup: f64,
    pub decay_rate: f64,
    pub connected: bool,
    pub annulus_ok: bool,
    pub detail: RowDetail,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RowDetail {
    pub converged: bool,
    pub error: Option<String>,
    pub mesh_resolution: f64,
    pub n_vertices: usize,
    pub set_cells: usize,
    pub measure: f64,
    pub lambda_trace: Vec<f64>,
    pub monotone: bool,
    pub idempotent: bool,
    pub winning_start: usize,
    pub peak: Option<PeakData>,
    pub q_delta: Option<BoundaryPoint>,
    /// `|Q_δ - P_δ| / δ^{1/N}`.
    pub qp_scaled: f64,
    pub star_shaped: bool,
    pub rho_grad_lipschitz: f64,
    pub multi_cross_rays: usize,
    pub boundary_limited_rays: usize,
    pub decay: Option<DecayFit>,
    pub blowup: Option<BlowupData>,
}

pub const CSV_HEADER: &str =
    "delta,Lambda,scaled_Lambda,P_delta,Q_delta,H_at_P,rho_l2,rho_sup,decay_rate,connected,annulus_ok";

impl SweepRow {
    fn failed(delta: f64, resolution: f64, error: String) -> Self {
        Self {
            delta,
            Lambda: f64::NAN,
            scaled_Lambda: f64::NAN,
            P_delta: f64::NAN,
            Q_delta: f64::NAN,
            H_at_P: f64::NAN,
            rho_l2: f64::NAN,
            rho_sup: f64::NAN,
            decay_rate: f64::NAN,
            connected: false,
            annulus_ok: false,
            detail: RowDetail {
                error: Some(error),
                mesh_resolution: resolution,
                qp_scaled: f64::NAN,
                rho_grad_lipschitz: f64::NAN,
                ..RowDetail::default()
            },
        }
    }

    pub fn csv_line(&self) -> String {
        let f = crate::report::fmt_f64;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            f(self.delta),
            f(self.Lambda),
            f(self.scaled_Lambda),
            f(self.P_delta),
            f(self.Q_delta),
            f(self.H_at_P),
            f(self.rho_l2),
            f(self.rho_sup),
            f(self.decay_rate),
            self.connected,
            self.annulus_ok
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub fitted_I: f64,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub fit_residual: f64,
    pub I: f64,
    pub Gamma: f64,
    pub H_hat: f64,
    pub seed: u64,
}

impl SweepReport {
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "fitted_I": self.fitted_I,
            "fitted_slope": self.fitted_slope,
            "predicted_slope": self.predicted_slope,
            "fit_residual": self.fit_residual,
            "I": self.I,
            "Gamma": self.Gamma,
            "H_hat": self.H_hat,
            "seed": self.seed,
        })
    }
}

/// Everything measured on one optimized habitat.
pub struct Analysis {
    pub peak: PeakData,
    pub q_delta: BoundaryPoint,
    pub polar: Result<NearSphereParam>,
    pub decay: Result<DecayFit>,
    pub structure: Structure,
    pub blowup: BlowupData,
}

pub fn analyze(
    record: &OptimizationRecord,
    mesh: &Mesh,
    spec: &DomainSpec,
    delta: f64,
    limit: &LimitSolution,
) -> Analysis {
    let result = &record.final_result;
    let peak = extract_peak(result, mesh, spec, delta);
    let q_delta = boundary_center(&record.final_set, mesh, spec);
    Analysis {
        polar: polar_parametrization_from_level(&result.eigenfunction, record.final_set.threshold_level, &q_delta, delta, mesh),
        decay: decay_fit(result, &peak, delta, mesh),
        structure: inclusion_and_connectivity(&record.final_set, &peak, delta, mesh),
        blowup: blowup_profile(result, &peak, delta, limit, mesh, spec),
        peak,
        q_delta,
    }
}

/// Whether one more rearrangement of the final eigenfunction reproduces the
/// final set.
pub fn is_idempotent(record: &OptimizationRecord, mesh: &Mesh, beta: f64, delta: f64) -> bool {
    let floor = mesh.cell_measure().iter().cloned().fold(f64::INFINITY, f64::min);
    quantile_superlevel(&record.final_result.eigenfunction, mesh, delta, beta)
        .map(|s| s.symmetric_difference(&record.final_set, mesh) < floor)
        .unwrap_or(false)
}

pub fn is_monotone(trace: &[f64]) -> bool {
    trace
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + crate::shape_optimizer::MONOTONICITY_SLACK))
}

fn sweep_row(
    spec: &DomainSpec,
    beta: f64,
    delta: f64,
    resolution: f64,
    limit: &LimitSolution,
    config: &SweepConfig,
) -> SweepRow {
    let run = || -> Result<(Mesh, OptimizationRecord)> {
        let mesh = build_mesh(spec, resolution)?;
        let base = MeshOperators::new(&mesh);
        let rec = multi_start(
            &mesh,
            &base,
            spec,
            beta,
            delta,
            config.n_starts,
            config.seed,
            &config.optimizer,
            &config.solver,
        )?;
        Ok((mesh, rec))
    };
    let (mesh, rec) = match run() {
        Ok(x) => x,
        Err(e) => return SweepRow::failed(delta, resolution, format!("{}: {e}", e.code())),
    };
    let a = analyze(&rec, &mesh, spec, delta, limit);
    let scale = length_scale(delta);
    let lambda = rec.final_result.lambda;
    let (rho_l2, rho_sup, lip, multi, limited) = match &a.polar {
        Ok(p) => (p.l2_norm, p.sup_norm, p.grad_lipschitz_estimate, p.multi_cross_rays, p.boundary_limited_rays),
        Err(Error::NotStarShaped { multi, .. }) => (f64::NAN, f64::NAN, f64::NAN, *multi, 0),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN, 0, 0),
    };
    SweepRow {
        delta,
        Lambda: lambda,
        scaled_Lambda: rec.final_set.measure.powf(2.0 / DIM) * lambda,
        P_delta: a.peak.p_delta.theta,
        Q_delta: a.q_delta.theta,
        H_at_P: a.peak.p_delta.curvature,
        rho_l2,
        rho_sup,
        decay_rate: a.decay.as_ref().map_or(f64::NAN, |d| d.rate),
        connected: a.structure.connected,
        annulus_ok: a.structure.annulus_ok,
        detail: RowDetail {
            converged: rec.converged,
            error: None,
            mesh_resolution: resolution,
            n_vertices: mesh.n_vertices(),
            set_cells: rec.final_set.cells.len(),
            measure: rec.final_set.measure,
            monotone: is_monotone(&rec.lambda_trace),
            idempotent: is_idempotent(&rec, &mesh, beta, delta),
            lambda_trace: rec.lambda_trace.clone(),
            winning_start: rec.winning_start,
            qp_scaled: dist(a.q_delta.position, a.peak.p_delta.position) / scale,
            q_delta: Some(a.q_delta),
            peak: Some(a.peak),
            star_shaped: a.polar.is_ok(),
            rho_grad_lipschitz: lip,
            multi_cross_rays: multi,
            boundary_limited_rays: limited,
            decay: a.decay.ok(),
            blowup: Some(a.blowup),
        },
    }
}

/// Optimizes the habitat for each δ of `delta_grid` and fits
/// `|D|^{2/N} Λ ≈ I + slope · δ^{1/N}` over the converged rows.
pub fn sweep_and_fit(spec: &DomainSpec, beta: f64, delta_grid: &[f64], config: &SweepConfig) -> Result<SweepReport> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty delta grid".into()));
    }
    if delta_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("delta grid must be strictly decreasing".into()));
    }
    let bound = spec.admissible_bound(beta);
    for &d in delta_grid {
        if !(d > 0.0 && d < bound) {
            return Err(Error::InadmissibleMeasure { delta: d, bound });
        }
    }
    if !(config.mesh_resolution > 0.0) {
        return Err(Error::Config("mesh_resolution must be positive".into()));
    }
    let limit = solve_limit_eigenvalue(&LimitParams::new(beta, 2)?)?;
    let rows: Vec<SweepRow> = crate::par_map(delta_grid, |&d| {
        sweep_row(spec, beta, d, config.resolution_for(d, delta_grid[0]), &limit, config)
    });
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.detail.converged)
        .map(|r| (length_scale(r.delta), r.scaled_Lambda))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            converged: pts.len(),
            needed: 3,
        });
    }
    let (slope, intercept, rms) = least_squares(&pts);
    let h_hat = max_curvature(spec).curvature;
    Ok(SweepReport {
        rows,
        fitted_I: intercept,
        fitted_slope: slope,
        predicted_slope: -limit.eigenvalue_i * limit.capital_gamma * h_hat,
        fit_residual: rms,
        I: limit.eigenvalue_i,
        Gamma: limit.capital_gamma,
        H_hat: h_hat,
        seed: config.seed,
    })
}
