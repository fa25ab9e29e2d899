//! Browser bindings. Every export returns a JSON string for the page script.

use habitat_core::eigensolver::{MeshOperators, SolverConfig};
use habitat_core::geometry::{curvature_at, max_curvature, DomainSpec};
use habitat_core::limit_problem::{solve_limit_eigenvalue, LimitParams};
use habitat_core::mesh::build_mesh;
use habitat_core::shape_optimizer::{multi_start, OptimizerConfig};
use habitat_core::Error;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: Error) -> JsError {
    JsError::new(&format!("{}: {e}", e.code()))
}

fn domain(a: f64, b: f64) -> Result<DomainSpec, JsError> {
    if (a - b).abs() < 1e-12 {
        DomainSpec::disk(a).map_err(js_err)
    } else {
        DomainSpec::ellipse(a, b).map_err(js_err)
    }
}

/// Radial profile `w(r)/w(0)` of the planar limit problem on `[0, 3 r₂]`.
#[wasm_bindgen]
pub fn limit_profile(beta: f64, samples: usize) -> Result<String, JsError> {
    let sol = solve_limit_eigenvalue(&LimitParams::new(beta, 2).map_err(js_err)?).map_err(js_err)?;
    let n = samples.max(2);
    let w0 = sol.profile(0.0).0;
    let (r, w): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let r = 3.0 * sol.radius_r2 * i as f64 / (n - 1) as f64;
            (r, sol.profile(r).0 / w0)
        })
        .unzip();
    Ok(json!({
        "I": sol.eigenvalue_i,
        "r2": sol.radius_r2,
        "Gamma": sol.capital_gamma,
        "identity_residual": sol.identity_residual(),
        "r": r,
        "w": w,
    })
    .to_string())
}

/// Boundary points and curvature of the ellipse with semi-axes `a`, `b`.
#[wasm_bindgen]
pub fn boundary_curvature(a: f64, b: f64, samples: usize) -> Result<String, JsError> {
    let spec = domain(a, b)?;
    let n = samples.max(8);
    let pts: Vec<_> = (0..n)
        .map(|i| curvature_at(&spec, std::f64::consts::TAU * i as f64 / n as f64))
        .collect();
    let top = max_curvature(&spec);
    Ok(json!({
        "theta": pts.iter().map(|p| p.theta).collect::<Vec<_>>(),
        "curvature": pts.iter().map(|p| p.curvature).collect::<Vec<_>>(),
        "x": pts.iter().map(|p| p.position[0]).collect::<Vec<_>>(),
        "y": pts.iter().map(|p| p.position[1]).collect::<Vec<_>>(),
        "max_theta": top.theta,
        "max_curvature": top.curvature,
    })
    .to_string())
}

/// Optimal habitat of measure `delta` in the ellipse `a × b` on a mesh of
/// size `h`, with the mesh, the habitat cells and the eigenfunction.
#[wasm_bindgen]
pub fn optimal_habitat(a: f64, b: f64, beta: f64, delta: f64, h: f64, seed: u64) -> Result<String, JsError> {
    let spec = domain(a, b)?;
    let mesh = build_mesh(&spec, h).map_err(js_err)?;
    let base = MeshOperators::new(&mesh);
    let rec = multi_start(
        &mesh,
        &base,
        &spec,
        beta,
        delta,
        3,
        seed,
        &OptimizerConfig::default(),
        &SolverConfig::default(),
    )
    .map_err(js_err)?;
    let in_set = rec.final_set.indicator(mesh.n_cells());
    Ok(json!({
        "lambda": rec.final_result.lambda,
        "scaled_lambda": rec.final_result.lambda * rec.final_set.measure,
        "iterations": rec.lambda_trace.len(),
        "converged": rec.converged,
        "vertices": mesh.vertices(),
        "triangles": mesh.triangles(),
        "in_set": in_set,
        "u": rec.final_result.eigenfunction,
    })
    .to_string())
}
