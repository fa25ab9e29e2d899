//! `Λ(δ) = min{λ(D) : |D| = δ}` by the superlevel-set fixed-point
//! iteration.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{
    principal_positive_eigenvalue_with, EigenResult, MeshOperators, SolverConfig, WarmStart, WeightField,
};
use crate::error::{Error, Result};
use crate::geometry::{max_curvature, DomainSpec, Point};
use crate::mesh::Mesh;

/// Slack allowed on an increase of λ between iterates before the run is
/// declared non-monotone.
pub const MONOTONICITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSet {
    /// Sorted cell indices.
    pub cells: Vec<usize>,
    pub measure: f64,
    pub threshold_level: f64,
}

impl IndicatorSet {
    pub fn from_cells(mesh: &Mesh, mut cells: Vec<usize>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        let measure = cells.iter().map(|&c| mesh.cell_measure()[c]).sum();
        Self {
            cells,
            measure,
            threshold_level: f64::NAN,
        }
    }

    pub fn indicator(&self, n_cells: usize) -> Vec<bool> {
        let mut v = vec![false; n_cells];
        for &c in &self.cells {
            v[c] = true;
        }
        v
    }

    /// `|self Δ other|`.
    pub fn symmetric_difference(&self, other: &Self, mesh: &Mesh) -> f64 {
        let (mut i, mut j, mut total) = (0, 0, 0.0);
        let (a, b) = (&self.cells, &other.cells);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                total += mesh.cell_measure()[a[i]];
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                total += mesh.cell_measure()[b[j]];
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        total
    }
}

fn admissible_bound(mesh: &Mesh, beta: f64) -> f64 {
    beta * mesh.total_measure() / (beta + 1.0)
}

fn check_delta(mesh: &Mesh, beta: f64, delta: f64) -> Result<()> {
    let bound = admissible_bound(mesh, beta);
    if !(delta > 0.0) || delta >= bound {
        return Err(Error::InadmissibleMeasure { delta, bound });
    }
    Ok(())
}

/// Takes cells in the given priority order until the measure first reaches
/// `delta`; the last cell stays iff that leaves `|measure - delta|` no larger
/// (exact ties, up to 1e-12 relative, keep it).
fn fill_to_measure(mesh: &Mesh, order: &[usize], delta: f64) -> (Vec<usize>, f64) {
    let mut cells = Vec::new();
    let mut measure = 0.0;
    for &c in order {
        let a = mesh.cell_measure()[c];
        if measure + a >= delta {
            let over = measure + a - delta;
            let under = delta - measure;
            if cells.is_empty() || over <= under + 1e-12 * delta {
                cells.push(c);
                measure += a;
            }
            break;
        }
        cells.push(c);
        measure += a;
    }
    (cells, measure)
}

/// Measure-`delta` superlevel set of `u`, ranking cells by their mean vertex
/// value (descending, ties by cell index).
pub fn quantile_superlevel(u: &[f64], mesh: &Mesh, delta: f64, beta: f64) -> Result<IndicatorSet> {
    check_delta(mesh, beta, delta)?;
    if u.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values for {} vertices",
            u.len(),
            mesh.n_vertices()
        )));
    }
    let values: Vec<f64> = (0..mesh.n_cells()).map(|c| mesh.cell_mean(u, c)).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi - lo > 1e-14 * hi.abs().max(lo.abs())) {
        return Err(Error::NotApplicable);
    }
    let mut order: Vec<usize> = (0..mesh.n_cells()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let (cells, _) = fill_to_measure(mesh, &order, delta);
    let threshold_level = values[*cells.last().expect("nonempty")];
    let mut set = IndicatorSet::from_cells(mesh, cells);
    set.threshold_level = threshold_level;
    Ok(set)
}

/// Cells closest (by centroid) to `center`, filled to measure `delta`.
pub fn ball_set(mesh: &Mesh, center: Point, delta: f64) -> IndicatorSet {
    let d: Vec<f64> = (0..mesh.n_cells())
        .map(|c| {
            let p = mesh.centroid(c);
            (p[0] - center[0]).hypot(p[1] - center[1])
        })
        .collect();
    let mut order: Vec<usize> = (0..mesh.n_cells()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let (cells, _) = fill_to_measure(mesh, &order, delta);
    IndicatorSet::from_cells(mesh, cells)
}

/// Ball of measure `delta` around a seeded uniformly random mesh point.
/// Scattered random cells would not do: without any vertex surrounded by
/// favorable cells the discrete problem has no positive eigenvalue.
pub fn random_set(mesh: &Mesh, delta: f64, seed: u64) -> IndicatorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = mesh.total_measure();
    let pick = rng.gen_range(0.0..total);
    let mut acc = 0.0;
    let mut cell = mesh.n_cells() - 1;
    for (c, a) in mesh.cell_measure().iter().enumerate() {
        acc += a;
        if acc > pick {
            cell = c;
            break;
        }
    }
    let [a, b, c] = mesh.triangles()[cell].map(|i| mesh.vertices()[i]);
    let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
    if s + t > 1.0 {
        (s, t) = (1.0 - s, 1.0 - t);
    }
    let p = [
        a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
        a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
    ];
    ball_set(mesh, p, delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub lambda_trace: Vec<f64>,
    pub final_result: EigenResult,
    pub final_set: IndicatorSet,
    pub converged: bool,
    pub restarts_used: usize,
    /// Index of the start that produced this record (multi-start only).
    pub winning_start: usize,
}

/// Alternates `D → u_D → superlevel set of u_D` until the set repeats.
pub fn optimize(
    mesh: &Mesh,
    base: &MeshOperators,
    beta: f64,
    delta: f64,
    init: &IndicatorSet,
    config: &OptimizerConfig,
    solver: &SolverConfig,
) -> Result<OptimizationRecord> {
    check_delta(mesh, beta, delta)?;
    let floor = mesh.cell_measure().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut set = init.clone();
    let weight = WeightField::new(mesh, set.indicator(mesh.n_cells()), beta)?;
    let mut result = principal_positive_eigenvalue_with(base, &weight, None, solver)?;
    let mut trace = vec![result.lambda];
    let mut converged = false;
    for _ in 0..config.max_iters {
        let next_set = quantile_superlevel(&result.eigenfunction, mesh, delta, beta)?;
        if next_set.symmetric_difference(&set, mesh) < floor {
            // Fixed point; keep the level from the rearrangement.
            set.threshold_level = next_set.threshold_level;
            converged = true;
            break;
        }
        let weight = WeightField::new(mesh, next_set.indicator(mesh.n_cells()), beta)?;
        let next = principal_positive_eigenvalue_with(
            base,
            &weight,
            Some(WarmStart {
                lambda: result.lambda,
                eigenfunction: &result.eigenfunction,
            }),
            solver,
        )?;
        if next.lambda > result.lambda * (1.0 + MONOTONICITY_SLACK) {
            return Err(Error::MonotonicityViolation {
                previous: result.lambda,
                next: next.lambda,
            });
        }
        trace.push(next.lambda);
        result = next;
        set = next_set;
    }
    Ok(OptimizationRecord {
        lambda_trace: trace,
        final_result: result,
        final_set: set,
        converged,
        restarts_used: 1,
        winning_start: 0,
    })
}

/// Initial sets for [`multi_start`]: boundary caps at the curvature maximizer
/// and at `n_starts - 2` further equally spaced angles, then one seeded random
/// set.
pub fn start_sets(mesh: &Mesh, spec: &DomainSpec, delta: f64, n_starts: usize, seed: u64) -> Vec<IndicatorSet> {
    let theta0 = max_curvature(spec).theta;
    let mut sets = Vec::with_capacity(n_starts);
    for j in 0..n_starts {
        if j > 0 && j == n_starts - 1 {
            sets.push(random_set(mesh, delta, seed));
        } else {
            let theta = theta0 + TAU * j as f64 / (n_starts - 1).max(1) as f64;
            sets.push(ball_set(mesh, spec.point(theta), delta));
        }
    }
    sets
}

/// Best of [`optimize`] over [`start_sets`]; ties keep the earliest start.
#[allow(clippy::too_many_arguments)]
pub fn multi_start(
    mesh: &Mesh,
    base: &MeshOperators,
    spec: &DomainSpec,
    beta: f64,
    delta: f64,
    n_starts: usize,
    seed: u64,
    config: &OptimizerConfig,
    solver: &SolverConfig,
) -> Result<OptimizationRecord> {
    if n_starts == 0 {
        return Err(Error::InvalidArgument("n_starts must be at least 1".into()));
    }
    check_delta(mesh, beta, delta)?;
    let starts = start_sets(mesh, spec, delta, n_starts, seed);
    let runs: Vec<Result<OptimizationRecord>> =
        crate::par_map(&starts, |init| optimize(mesh, base, beta, delta, init, config, solver));
    let mut best: Option<(usize, OptimizationRecord)> = None;
    let mut first_err = None;
    for (i, run) in runs.into_iter().enumerate() {
        match run {
            Ok(rec) => {
                if best
                    .as_ref()
                    .map_or(true, |(_, b)| rec.final_result.lambda < b.final_result.lambda)
                {
                    best = Some((i, rec));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((i, mut rec)) => {
            rec.restarts_used = n_starts;
            rec.winning_start = i;
            Ok(rec)
        }
        None => Err(first_err.expect("at least one start ran")),
    }
}
