// Success paths only: building a `JsError` needs a JavaScript host.

use habitat_web::{boundary_curvature, limit_profile, optimal_habitat};

fn parse(s: String) -> serde_json::Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn limit_profile_starts_at_one() {
    let v = parse(limit_profile(1.0, 50).unwrap());
    let w = v["w"].as_array().unwrap();
    assert_eq!(w.len(), 50);
    assert!((w[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["identity_residual"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn ellipse_curvature_peaks_at_the_vertex() {
    let v = parse(boundary_curvature(2.0, 1.0, 64).unwrap());
    assert!((v["max_curvature"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["theta"].as_array().unwrap().len(), 64);
}

#[test]
fn habitat_solution_is_consistent() {
    let v = parse(optimal_habitat(1.0, 1.0, 1.0, 0.2, 0.08, 1).unwrap());
    let cells = v["in_set"].as_array().unwrap();
    assert_eq!(cells.len(), v["triangles"].as_array().unwrap().len());
    assert!(cells.iter().any(|c| c.as_bool().unwrap()));
    assert!(v["lambda"].as_f64().unwrap() > 0.0);
    assert!(v["converged"].as_bool().unwrap());
}
