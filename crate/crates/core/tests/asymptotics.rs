use habitat_core::asymptotics::{
    blowup_profile, boundary_center, decay_fit, extract_peak, inclusion_and_connectivity, length_scale,
    polar_parametrization, sweep_and_fit, SweepConfig,
};
use habitat_core::eigensolver::{EigenResult, MeshOperators, SolverConfig};
use habitat_core::geometry::{curvature_at, DomainSpec, Point};
use habitat_core::limit_problem::{ball_radius, solve_limit_eigenvalue, LimitParams, LimitSolution};
use habitat_core::mesh::{build_mesh, Mesh};
use habitat_core::shape_optimizer::{ball_set, multi_start, IndicatorSet, OptimizerConfig};
use habitat_core::Error;

fn limit() -> LimitSolution {
    solve_limit_eigenvalue(&LimitParams::new(1.0, 2).unwrap()).unwrap()
}

fn field(mesh: &Mesh, f: impl Fn(Point) -> f64) -> EigenResult {
    EigenResult {
        lambda: 1.0,
        eigenfunction: mesh.vertices().iter().map(|&p| f(p)).collect(),
        rayleigh_gap: 0.0,
        iterations: 0,
        factorizations: 0,
        nu_samples: Vec::new(),
    }
}

/// The limit profile blown down around `p` to measure scale `delta`.
fn profile_field(mesh: &Mesh, lim: &LimitSolution, p: Point, delta: f64) -> EigenResult {
    let s = length_scale(delta);
    field(mesh, |x| lim.profile((x[0] - p[0]).hypot(x[1] - p[1]) / s).0)
}

fn cells_where(mesh: &Mesh, keep: impl Fn(Point) -> bool) -> IndicatorSet {
    let cells = (0..mesh.n_cells()).filter(|&c| keep(mesh.centroid(c))).collect();
    IndicatorSet::from_cells(mesh, cells)
}

#[test]
fn peak_of_optimal_cap_and_center() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let h = 0.012;
    let mesh = build_mesh(&spec, h).unwrap();
    let base = MeshOperators::new(&mesh);
    let delta = 0.02;
    let rec = multi_start(
        &mesh,
        &base,
        &spec,
        1.0,
        delta,
        1,
        0,
        &OptimizerConfig::default(),
        &SolverConfig::default(),
    )
    .unwrap();
    let peak = extract_peak(&rec.final_result, &mesh, &spec, delta);
    let p = peak.p_delta.position;
    assert!((p[0] - 1.0).hypot(p[1]) <= h, "{p:?}");
    assert!(peak.unique);
    assert!(peak.interior_offset <= 2.0 * h);
    let q = boundary_center(&rec.final_set, &mesh, &spec).position;
    assert!((q[0] - 1.0).hypot(q[1]) <= h);
    let s = inclusion_and_connectivity(&rec.final_set, &peak, delta, &mesh);
    assert!(s.connected && s.annulus_ok);
}

#[test]
fn two_bumps_flag_non_uniqueness() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.03).unwrap();
    let bump = |x: Point, c: Point| (-40.0 * ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2))).exp();
    let two = field(&mesh, |x| bump(x, [1.0, 0.0]) + 0.8 * bump(x, [-1.0, 0.0]));
    let peak = extract_peak(&two, &mesh, &spec, 0.02);
    assert!(!peak.unique);
    assert!(peak.rival.is_some());
    let one = field(&mesh, |x| bump(x, [1.0, 0.0]));
    assert!(extract_peak(&one, &mesh, &spec, 0.02).unique);
}

#[test]
fn full_disk_center_projects_to_zero_angle() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.05).unwrap();
    let all = IndicatorSet::from_cells(&mesh, (0..mesh.n_cells()).collect());
    assert_eq!(boundary_center(&all, &mesh, &spec).theta, 0.0);
}

#[test]
fn exact_cap_has_flat_parametrization() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let h = 0.008;
    let mesh = build_mesh(&spec, h).unwrap();
    let delta = 0.05;
    let set = ball_set(&mesh, [1.0, 0.0], delta);
    let q = boundary_center(&set, &mesh, &spec);
    let polar = polar_parametrization(&set, &q, delta, &mesh).unwrap();
    assert!(polar.sup_norm <= h / length_scale(delta), "{}", polar.sup_norm);
    let peak = extract_peak(&profile_field(&mesh, &limit(), [1.0, 0.0], delta), &mesh, &spec, delta);
    let s = inclusion_and_connectivity(&set, &peak, delta, &mesh);
    assert!(s.connected && s.annulus_ok);
}

#[test]
fn perturbed_cap_amplitude_is_recovered() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.006).unwrap();
    let delta = 0.1;
    let (s, r2) = (length_scale(delta), ball_radius(2).unwrap());
    // Radius r₂(1 + 0.05 cos 2φ), φ measured from the inward normal at (1, 0).
    let set = cells_where(&mesh, |x| {
        let d = [x[0] - 1.0, x[1]];
        let phi = d[1].atan2(-d[0]);
        d[0].hypot(d[1]) < s * r2 * (1.0 + 0.05 * (2.0 * phi).cos())
    });
    let q = curvature_at(&spec, 0.0);
    let polar = polar_parametrization(&set, &q, delta, &mesh).unwrap();
    let want = 0.05 * r2;
    assert!((polar.sup_norm / want - 1.0).abs() < 0.2, "{} vs {want}", polar.sup_norm);
}

#[test]
fn split_set_is_disconnected() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.03).unwrap();
    let a = ball_set(&mesh, [1.0, 0.0], 0.02);
    let b = ball_set(&mesh, [-1.0, 0.0], 0.02);
    let both = IndicatorSet::from_cells(&mesh, a.cells.iter().chain(&b.cells).cloned().collect());
    let peak = extract_peak(&profile_field(&mesh, &limit(), [1.0, 0.0], 0.04), &mesh, &spec, 0.04);
    assert!(!inclusion_and_connectivity(&both, &peak, 0.04, &mesh).connected);
}

#[test]
fn decay_of_limit_profile_is_recovered() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.01).unwrap();
    let lim = limit();
    let delta = 0.02;
    let result = profile_field(&mesh, &lim, [1.0, 0.0], delta);
    let peak = extract_peak(&result, &mesh, &spec, delta);
    let fit = decay_fit(&result, &peak, delta, &mesh).unwrap();
    assert!(fit.slope < 0.0);
    assert!((fit.scaled_rate / lim.decay_rate() - 1.0).abs() < 0.05, "{} vs {}", fit.scaled_rate, lim.decay_rate());
}

#[test]
fn spike_has_too_few_decay_samples() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.03).unwrap();
    let top = mesh
        .vertices()
        .iter()
        .position(|p| (p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12)
        .unwrap();
    let mut result = field(&mesh, |_| 0.0);
    result.eigenfunction[top] = 1.0;
    let peak = extract_peak(&result, &mesh, &spec, 0.02);
    assert!(matches!(
        decay_fit(&result, &peak, 0.02, &mesh),
        Err(Error::InsufficientSamples { .. })
    ));
}

#[test]
fn blowup_of_exact_profile_is_interpolation_error() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.004).unwrap();
    let lim = limit();
    let delta = 0.05;
    let result = profile_field(&mesh, &lim, [1.0, 0.0], delta);
    let peak = extract_peak(&result, &mesh, &spec, delta);
    let b = blowup_profile(&result, &peak, delta, &lim, &mesh, &spec);
    assert!(!b.partial_window);
    assert!(b.sup_error <= 1e-3, "{}", b.sup_error);
}

#[test]
fn blowup_is_rotation_invariant() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let mesh = build_mesh(&spec, 0.02).unwrap();
    let lim = limit();
    let delta = 0.04;
    let centre = spec.point(0.3);
    let bump = |x: Point| (-((x[0] - centre[0]).powi(2) + (x[1] - centre[1]).powi(2)) / delta).exp();
    let result = field(&mesh, bump);
    let peak = extract_peak(&result, &mesh, &spec, delta);
    let base = blowup_profile(&result, &peak, delta, &lim, &mesh, &spec).sup_error;

    let angle = 1.1f64;
    let (sn, cs) = angle.sin_cos();
    let turned_mesh = mesh.mapped(|p| [cs * p[0] - sn * p[1], sn * p[0] + cs * p[1]], 1.0).unwrap();
    let turned_spec = spec.rotated(angle);
    let turned_peak = extract_peak(&result, &turned_mesh, &turned_spec, delta);
    let turned = blowup_profile(&result, &turned_peak, delta, &lim, &turned_mesh, &turned_spec).sup_error;
    assert!((turned - base).abs() < 1e-8, "{turned} vs {base}");
}

#[test]
fn sweep_rejects_bad_grids() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let config = SweepConfig::default();
    assert!(sweep_and_fit(&spec, 1.0, &[0.02, 0.04, 0.01], &config).is_err());
    assert!(matches!(
        sweep_and_fit(&spec, 1.0, &[2.0, 0.04, 0.01], &config),
        Err(Error::InadmissibleMeasure { .. })
    ));
}

#[test]
fn small_sweep_fits_and_reports() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let config = SweepConfig {
        mesh_resolution: 0.03,
        n_starts: 2,
        seed: 4,
        ..SweepConfig::default()
    };
    let report = sweep_and_fit(&spec, 1.0, &[0.16, 0.08, 0.04], &config).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows.iter().all(|r| r.detail.converged && r.detail.monotone && r.detail.idempotent));
    let csv = report.csv();
    assert_eq!(
        csv.lines().next().unwrap(),
        "delta,Lambda,scaled_Lambda,P_delta,Q_delta,H_at_P,rho_l2,rho_sup,decay_rate,connected,annulus_ok"
    );
    assert_eq!(csv.lines().count(), 4);
    let summary = report.summary();
    let keys: Vec<&str> = summary.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["Gamma", "H_hat", "I", "fit_residual", "fitted_I", "fitted_slope", "predicted_slope", "seed"]
    );
    assert!((report.predicted_slope + report.I * report.Gamma * report.H_hat).abs() < 1e-12);
    assert!(report.fitted_slope < 0.0);
}
