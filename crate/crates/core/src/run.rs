//! Batch runs driven by a single JSON configuration document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{
    boundary_center, extract_peak, polar_parametrization_from_level, sweep_and_fit, SweepConfig,
};
use crate::eigensolver::{MeshOperators, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{DomainConfig, DomainSpec};
use crate::limit_problem::{solve_limit_eigenvalue, LimitParams};
use crate::mesh::build_mesh;
use crate::report::{to_json, write_files};
use crate::shape_optimizer::{multi_start, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Limit,
    Solve,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    pub beta: f64,
    /// Dimension of the limit problem (`limit` only).
    #[serde(default = "default_dim")]
    pub dim: u32,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub mesh_resolution: Option<f64>,
    #[serde(default)]
    pub mesh_exponent: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_dim() -> u32 {
    2
}

fn default_starts() -> usize {
    3
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn domain(&self) -> Result<DomainSpec> {
        let d = self
            .domain
            .as_ref()
            .ok_or_else(|| Error::Config("missing field `domain`".into()))?;
        DomainSpec::from_config(d)
    }

    fn resolution(&self) -> Result<f64> {
        match self.mesh_resolution {
            Some(h) if h > 0.0 && h.is_finite() => Ok(h),
            Some(h) => Err(Error::Config(format!("mesh_resolution must be positive, got {h}"))),
            None => Err(Error::Config("missing field `mesh_resolution`".into())),
        }
    }

    /// Checks every field the command needs, including admissibility of
    /// all measures, without solving anything.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.command == Command::Limit {
            return LimitParams::new(self.beta, self.dim).map(|_| ());
        }
        let spec = self.domain()?;
        self.resolution()?;
        if self.n_starts == 0 {
            return Err(Error::Config("n_starts must be at least 1".into()));
        }
        let deltas = match self.command {
            Command::Solve => vec![self.delta.ok_or_else(|| Error::Config("missing field `delta`".into()))?],
            _ => self
                .delta_grid
                .clone()
                .ok_or_else(|| Error::Config("missing field `delta_grid`".into()))?,
        };
        if deltas.is_empty() {
            return Err(Error::Config("delta_grid is empty".into()));
        }
        if deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("delta_grid must be strictly decreasing".into()));
        }
        let bound = spec.admissible_bound(self.beta);
        for &d in &deltas {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("measures must be positive, got {d}")));
            }
            if d >= bound {
                // ∫ m_D = δ - β(|Ω| - δ) ≥ 0.
                return Err(Error::NegativeAverageViolated {
                    total_integral: d - self.beta * (spec.area() - d),
                });
            }
        }
        Ok(())
    }
}

/// Runs `config`, writing into `output` (or the configured directory).
/// Returns the written paths.
pub fn run(config: &RunConfig, output: Option<&Path>, overwrite: bool) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let dir = output
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory (use --output or output_dir)".into()))?;
    let files = match config.command {
        Command::Limit => limit_files(config)?,
        Command::Solve => solve_files(config)?,
        Command::Sweep => sweep_files(config)?,
    };
    let refs: Vec<(&str, String)> = files.iter().map(|(n, b)| (*n, b.clone())).collect();
    write_files(&dir, &refs, overwrite)
}

fn limit_files(config: &RunConfig) -> Result<Vec<(&'static str, String)>> {
    let sol = solve_limit_eigenvalue(&LimitParams::new(config.beta, config.dim)?)?;
    let body = json!({
        "beta": sol.params.beta,
        "dim": sol.params.dim,
        "I": sol.eigenvalue_i,
        "r2": sol.radius_r2,
        "gamma": sol.gamma,
        "gamma1": sol.gamma1,
        "Gamma": sol.capital_gamma,
        "grad_sq_halfspace": sol.grad_sq_halfspace,
        "mw2_halfspace": sol.mw2_halfspace,
        "identity_residual": sol.identity_residual(),
    });
    Ok(vec![("limit.json", to_json(&body)?)])
}

fn solve_files(config: &RunConfig) -> Result<Vec<(&'static str, String)>> {
    let spec = config.domain()?;
    let delta = config.delta.expect("validated");
    let mesh = build_mesh(&spec, config.resolution()?)?;
    let base = MeshOperators::new(&mesh);
    let rec = multi_start(
        &mesh,
        &base,
        &spec,
        config.beta,
        delta,
        config.n_starts,
        config.seed,
        &config.optimizer,
        &config.solver,
    )?;
    let result = &rec.final_result;
    let peak = extract_peak(result, &mesh, &spec, delta);
    let q = boundary_center(&rec.final_set, &mesh, &spec);
    let near_sphere = match polar_parametrization_from_level(
        &result.eigenfunction,
        rec.final_set.threshold_level,
        &q,
        delta,
        &mesh,
    ) {
        Ok(p) => serde_json::to_value(p).map_err(|e| Error::Io(e.to_string()))?,
        Err(e) => json!({ "error": e.code(), "message": e.to_string() }),
    };
    let solution = json!({
        "eigenvalue": result.lambda,
        "measure": rec.final_set.measure,
        "threshold_level": rec.final_set.threshold_level,
        "converged": rec.converged,
        "winning_start": rec.winning_start,
        "lambda_trace": rec.lambda_trace,
        "rayleigh_gap": result.rayleigh_gap,
        "set_cells": rec.final_set.cells,
        "eigenfunction": result.eigenfunction,
    });
    let shape = json!({ "peak": peak, "near_sphere": near_sphere });
    Ok(vec![
        ("solution.json", to_json(&solution)?),
        ("peak.json", to_json(&shape)?),
        ("mesh.txt", mesh.to_export_string()),
    ])
}

fn sweep_files(config: &RunConfig) -> Result<Vec<(&'static str, String)>> {
    let spec = config.domain()?;
    let defaults = SweepConfig::default();
    let sweep = SweepConfig {
        mesh_resolution: config.resolution()?,
        mesh_exponent: config.mesh_exponent.unwrap_or(defaults.mesh_exponent),
        n_starts: config.n_starts,
        seed: config.seed,
        solver: config.solver,
        optimizer: config.optimizer,
    };
    let report = sweep_and_fit(&spec, config.beta, config.delta_grid.as_deref().expect("validated"), &sweep)?;
    Ok(vec![
        ("sweep.csv", report.csv()),
        ("summary.json", to_json(&report.summary())?),
        ("rows.json", to_json(&report.rows)?),
    ])
}
