use std::f64::consts::{PI, TAU};

use habitat_core::geometry::{curvature_at, max_curvature, project_to_boundary, DomainSpec};
use habitat_core::mesh::{aspect_ratio, build_mesh, MAX_ASPECT_RATIO};

#[test]
fn perturbed_disk_tie_resolves_to_zero() {
    let spec = DomainSpec::new([0.0, 0.0], vec![1.0, 0.0, 0.1], vec![]).unwrap();
    // Closed-form curvature of r = 1 + 0.1 cos 2θ on a dense scan.
    let kappa = |t: f64| {
        let (r, r1, r2) = (1.0 + 0.1 * (2.0 * t).cos(), -0.2 * (2.0 * t).sin(), -0.4 * (2.0 * t).cos());
        (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(1.5)
    };
    let scan_max = (0..100_000).map(|i| kappa(TAU * i as f64 / 100_000.0)).fold(f64::MIN, f64::max);
    let top = max_curvature(&spec);
    assert_eq!(top.theta, 0.0);
    assert!((top.curvature - scan_max).abs() < 1e-9);
    assert!((curvature_at(&spec, PI).curvature - top.curvature).abs() < 1e-12);
}

#[test]
fn ellipse_projection_matches_dense_scan() {
    let spec = DomainSpec::ellipse(2.0, 1.0).unwrap();
    let p = [1.9, 0.0];
    let n = 1_000_000;
    let (mut best, mut arg) = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..n {
        let s = TAU * i as f64 / n as f64;
        let q = [2.0 * s.cos(), s.sin()];
        let d = (q[0] - p[0]).hypot(q[1] - p[1]);
        if d < best {
            best = d;
            arg = q;
        }
    }
    let got = project_to_boundary(&spec, p).position;
    assert!((got[0] - arg[0]).abs() < 1e-8 && (got[1] - arg[1]).abs() < 1e-8, "{got:?} vs {arg:?}");
    assert!((got[0] - 2.0).abs() < 1e-8 && got[1].abs() < 1e-8);
}

#[test]
fn areas_within_tenth_of_a_percent() {
    let disk = build_mesh(&DomainSpec::disk(1.0).unwrap(), 0.05).unwrap();
    assert!((disk.total_measure() / PI - 1.0).abs() < 1e-3);
    let ellipse = build_mesh(&DomainSpec::ellipse(2.0, 1.0).unwrap(), 0.05).unwrap();
    assert!((ellipse.total_measure() / TAU - 1.0).abs() < 1e-3);
}

#[test]
fn area_converges_at_second_order() {
    let spec = DomainSpec::disk(1.0).unwrap();
    let errors: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
        .iter()
        .map(|&h| (PI - build_mesh(&spec, h).unwrap().total_measure()).abs())
        .collect();
    for w in errors.windows(2) {
        assert!(w[0] / w[1] >= 3.0, "{errors:?}");
    }
}

#[test]
fn cells_positive_and_well_shaped_on_ellipse() {
    let mesh = build_mesh(&DomainSpec::ellipse(2.0, 1.0).unwrap(), 0.03).unwrap();
    let exact: f64 = mesh.cell_measure().iter().sum();
    assert!((exact - mesh.total_measure()).abs() < 1e-12);
    for tri in mesh.triangles() {
        let [a, b, c] = tri.map(|i| mesh.vertices()[i]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        assert!(area > 0.0);
        assert!(aspect_ratio(a, b, c) < MAX_ASPECT_RATIO);
    }
}
