//! Symmetric sparse matrices sharing one CSR pattern, and the shifted
//! solvers used by inverse iteration.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

/// Full (both triangles) CSR pattern of a symmetric matrix. Column indices
/// are sorted within each row.
#[derive(Debug)]
pub struct Pattern {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    #[cfg(feature = "direct-solver")]
    symbolic: OnceLock<Option<faer::sparse::linalg::solvers::SymbolicLlt<usize>>>,
    #[cfg(not(feature = "direct-solver"))]
    #[allow(dead_code)]
    symbolic: OnceLock<()>,
}

impl Pattern {
    /// Builds a pattern from per-row column lists (deduplicated and sorted
    /// here). The caller guarantees structural symmetry.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Arc<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        Arc::new(Self {
            row_ptr,
            col_idx,
            symbolic: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Storage slot of entry `(i, j)`.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].binary_search(&j).ok().map(|k| a + k)
    }

    /// `y = A x` for values `a` on this pattern.
    pub fn matvec(&self, a: &[f64], x: &[f64], y: &mut [f64]) {
        for i in 0..self.n() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += a[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    /// `xᵀ A x`.
    pub fn quadratic(&self, a: &[f64], x: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += a[k] * x[self.col_idx[k]];
            }
            total += x[i] * s;
        }
        total
    }

    pub fn diagonal(&self, a: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.slot(i, i).map_or(0.0, |k| a[k]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearBackend {
    /// Sparse Cholesky (requires the `direct-solver` feature).
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

impl Default for LinearBackend {
    fn default() -> Self {
        if cfg!(feature = "direct-solver") {
            LinearBackend::Cholesky
        } else {
            LinearBackend::ConjugateGradient
        }
    }
}

/// The shifted operator is not positive definite (shift above the bottom of
/// the spectrum).
#[derive(Debug, Clone, Copy)]
pub struct NotPositiveDefinite;

#[derive(Debug)]
pub struct ShiftedSolver {
    pattern: Arc<Pattern>,
    values: Vec<f64>,
    kind: Kind,
}

#[derive(Debug)]
enum Kind {
    #[cfg(feature = "direct-solver")]
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Cg { inv_diag: Vec<f64>, tol: f64, max_iter: usize },
}

/// Outcome of one linear solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

impl ShiftedSolver {
    /// Prepares solves with the symmetric matrix `values` on `pattern`.
    pub fn new(
        pattern: Arc<Pattern>,
        values: Vec<f64>,
        backend: LinearBackend,
        cg_tol: f64,
    ) -> Result<Self, NotPositiveDefinite> {
        match backend {
            #[cfg(feature = "direct-solver")]
            LinearBackend::Cholesky => {
                let llt = cholesky(&pattern, &values)?;
                Ok(Self {
                    pattern,
                    values,
                    kind: Kind::Cholesky(llt),
                })
            }
            _ => {
                let diag = pattern.diagonal(&values);
                if diag.iter().any(|&d| !(d > 0.0)) {
                    return Err(NotPositiveDefinite);
                }
                let max_iter = 20 * pattern.n() + 100;
                Ok(Self {
                    pattern,
                    values,
                    kind: Kind::Cg {
                        inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                        tol: cg_tol,
                        max_iter,
                    },
                })
            }
        }
    }

    /// Solves in place; `rhs` becomes the solution.
    pub fn solve(&self, rhs: &mut [f64]) -> Result<SolveStats, NotPositiveDefinite> {
        match &self.kind {
            #[cfg(feature = "direct-solver")]
            Kind::Cholesky(llt) => {
                use faer::linalg::solvers::Solve;
                let n = rhs.len();
                llt.solve_in_place(faer::MatMut::from_column_major_slice_mut(rhs, n, 1));
                Ok(SolveStats {
                    iterations: 1,
                    relative_residual: 0.0,
                })
            }
            Kind::Cg { inv_diag, tol, max_iter } => {
                pcg(&self.pattern, &self.values, inv_diag, rhs, *tol, *max_iter)
            }
        }
    }
}

#[cfg(feature = "direct-solver")]
fn cholesky(
    pattern: &Pattern,
    values: &[f64],
) -> Result<faer::sparse::linalg::solvers::Llt<usize, f64>, NotPositiveDefinite> {
    use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
    use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
    use faer::Side;
    // A symmetric CSR matrix is its own CSC transpose.
    let n = pattern.n();
    let symbolic_mat = SymbolicSparseColMat::new_checked(n, n, pattern.row_ptr.clone(), None, pattern.col_idx.clone());
    let symbolic = pattern
        .symbolic
        .get_or_init(|| SymbolicLlt::try_new(symbolic_mat.as_ref(), Side::Lower).ok())
        .clone()
        .ok_or(NotPositiveDefinite)?;
    let mat = SparseColMatRef::new(symbolic_mat.as_ref(), values);
    Llt::try_new_with_symbolic(symbolic, mat, Side::Lower).map_err(|_| NotPositiveDefinite)
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// A non-positive curvature direction reports `NotPositiveDefinite`.
pub fn pcg(
    pattern: &Pattern,
    a: &[f64],
    inv_diag: &[f64],
    rhs: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats, NotPositiveDefinite> {
    let n = rhs.len();
    let b_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        rhs.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut rel = 1.0;
    let mut it = 0;
    while it < max_iter {
        pattern.matvec(a, &p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(NotPositiveDefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        if rel <= tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    rhs.copy_from_slice(&x);
    Ok(SolveStats {
        iterations: it,
        relative_residual: rel,
    })
}
