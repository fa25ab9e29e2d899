mod common;

use habitat_core::eigensolver::{
    principal_nu, principal_positive_eigenvalue, MeshOperators, SolverConfig, WeightField,
};
use habitat_core::geometry::DomainSpec;
use habitat_core::limit_problem::{solve_limit_eigenvalue, LimitParams};
use habitat_core::mesh::{build_mesh, Mesh};
use habitat_core::shape_optimizer::ball_set;
use habitat_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk(h: f64) -> Mesh {
    build_mesh(&DomainSpec::disk(1.0).unwrap(), h).unwrap()
}

fn cap(mesh: &Mesh, delta: f64, beta: f64) -> WeightField {
    let set = ball_set(mesh, [1.0, 0.0], delta);
    WeightField::from_cells(mesh, &set.cells, beta).unwrap()
}

/// Cells outside radius `rho`; ring-aligned, so the same region at every
/// resolution whose ring count is a multiple of four.
fn outer_band(mesh: &Mesh, rho: f64) -> WeightField {
    let cells: Vec<usize> = (0..mesh.n_cells())
        .filter(|&c| {
            let p = mesh.centroid(c);
            p[0].hypot(p[1]) > rho
        })
        .collect();
    WeightField::from_cells(mesh, &cells, 1.0).unwrap()
}

#[test]
fn nu_matches_dense_spectrum() {
    let mesh = disk(0.12);
    assert!(mesh.n_vertices() <= 300, "{} vertices", mesh.n_vertices());
    let base = MeshOperators::new(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius: f64 = rng.gen_range(0.0..1.0);
        let delta: f64 = rng.gen_range(0.2..1.2);
        let beta: f64 = rng.gen_range(0.5..3.0);
        let set = ball_set(&mesh, [radius * angle.cos(), radius * angle.sin()], delta);
        let weight = WeightField::from_cells(&mesh, &set.cells, beta).unwrap();
        let ops = base.with_weight(&weight);
        let t: f64 = rng.gen_range(0.0..20.0);
        let nu = principal_nu(t, &ops, None, &SolverConfig::default()).unwrap().nu;
        let oracle = common::dense_spectrum(&ops, t)[0];
        assert!((nu - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "t={t}: {nu} vs {oracle}");
    }
}

#[test]
fn slope_at_zero_is_mean_weight() {
    let mesh = disk(0.05);
    let weight = cap(&mesh, 0.3, 1.0);
    let ops = MeshOperators::new(&mesh).with_weight(&weight);
    let eps = 1e-6;
    let nu0 = principal_nu(0.0, &ops, None, &SolverConfig::default()).unwrap().nu;
    let nu = principal_nu(eps, &ops, None, &SolverConfig::default()).unwrap().nu;
    let want = -weight.total_integral() / mesh.total_measure();
    assert!(((nu - nu0) / eps / want - 1.0).abs() < 0.01);
}

#[test]
fn whole_domain_is_inadmissible() {
    let mesh = disk(0.1);
    let all: Vec<usize> = (0..mesh.n_cells()).collect();
    let weight = WeightField::from_cells(&mesh, &all, 1.0).unwrap();
    assert!(matches!(
        principal_positive_eigenvalue(&mesh, &weight),
        Err(Error::NegativeAverageViolated { .. })
    ));
}

#[test]
fn larger_habitat_lowers_eigenvalue() {
    let mesh = disk(0.06);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius: f64 = rng.gen_range(0.0..1.0);
        let center = [radius * angle.cos(), radius * angle.sin()];
        let small: f64 = rng.gen_range(0.05..0.6);
        let large = small + rng.gen_range(0.05..0.8);
        let (a, b) = (ball_set(&mesh, center, small), ball_set(&mesh, center, large));
        assert!(a.cells.iter().all(|c| b.cells.contains(c)));
        let la = principal_positive_eigenvalue(&mesh, &WeightField::from_cells(&mesh, &a.cells, 1.0).unwrap())
            .unwrap()
            .lambda;
        let lb = principal_positive_eigenvalue(&mesh, &WeightField::from_cells(&mesh, &b.cells, 1.0).unwrap())
            .unwrap()
            .lambda;
        assert!(lb <= la * (1.0 + 1e-12), "{lb} > {la}");
    }
}

#[test]
fn small_cap_scales_like_limit_eigenvalue() {
    let mesh = disk(0.01);
    let weight = cap(&mesh, 0.02, 1.0);
    let result = principal_positive_eigenvalue(&mesh, &weight).unwrap();
    let i = solve_limit_eigenvalue(&LimitParams::new(1.0, 2).unwrap()).unwrap().eigenvalue_i;
    let scaled = weight.measure() * result.lambda;
    assert!((scaled / i - 1.0).abs() < 0.15, "{scaled} vs {i}");
}

#[test]
fn root_finding_samples_are_concave_and_residual_small() {
    let mesh = disk(0.03);
    let weight = cap(&mesh, 0.2, 2.0);
    let result = principal_positive_eigenvalue(&mesh, &weight).unwrap();
    let mut pts = result.nu_samples.clone();
    pts.push((0.0, 0.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 * b.0.abs().max(1.0));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                let chord = a.1 + (c.1 - a.1) * (b.0 - a.0) / (c.0 - a.0);
                assert!(b.1 >= chord - 1e-9 * (1.0 + chord.abs()), "{a:?} {b:?} {c:?}");
            }
        }
    }
    let ops = MeshOperators::new(&mesh).with_weight(&weight);
    assert!(ops.residual_ratio(result.lambda, &result.eigenfunction) <= 1e-7);
    assert!(result.eigenfunction.iter().all(|&v| v > 0.0));
}

#[test]
fn mesh_convergence_of_fixed_band() {
    let lambdas: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&h| {
            let mesh = disk(h);
            principal_positive_eigenvalue(&mesh, &outer_band(&mesh, 0.75)).unwrap().lambda
        })
        .collect();
    let change = (lambdas[1] / lambdas[0] - 1.0).abs();
    assert!(change <= 0.02, "{lambdas:?}");
    let order = ((lambdas[0] - lambdas[1]) / (lambdas[1] - lambdas[2])).abs().log2();
    assert!(order >= 1.5, "order {order} from {lambdas:?}");
}

#[test]
fn rescaling_covariance() {
    let mesh = disk(0.04);
    let set = ball_set(&mesh, [1.0, 0.0], 0.1);
    let lambda = |s: f64| {
        let scaled = mesh.mapped(|p| [s * p[0], s * p[1]], s).unwrap();
        let w = WeightField::from_cells(&scaled, &set.cells, 1.0).unwrap();
        principal_positive_eigenvalue(&scaled, &w).unwrap().lambda * s * s
    };
    let base = lambda(1.0);
    for s in [0.5, 2.0, 3.0] {
        assert!((lambda(s) / base - 1.0).abs() < 1e-8);
    }
}
