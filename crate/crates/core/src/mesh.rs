//! Boundary-fitted radial-annular triangulations of star-shaped domains.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{dist, ArclengthMap, DomainSpec, Point};

pub const MAX_ASPECT_RATIO: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    cell_measure: Vec<f64>,
    boundary_flags: Vec<bool>,
    resolution: f64,
    locator: Locator,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Longest edge squared over area, scaled so the equilateral triangle scores 1.
pub fn aspect_ratio(a: Point, b: Point, c: Point) -> f64 {
    let longest = dist(a, b).max(dist(b, c)).max(dist(c, a));
    longest * longest * 3f64.sqrt() / (4.0 * signed_area(a, b, c).abs())
}

/// Zips two closed rings (inner `a`, outer `b`) into a strip of CCW
/// triangles, each step taking the shorter of the two candidate diagonals.
fn stitch(vertices: &[Point], a: &[usize], b: &[usize], out: &mut Vec<[usize; 3]>) {
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_a = if i == na {
            false
        } else if j == nb {
            true
        } else {
            let diag_a = dist(vertices[a[(i + 1) % na]], vertices[b[j % nb]]);
            let diag_b = dist(vertices[a[i % na]], vertices[b[(j + 1) % nb]]);
            diag_a <= diag_b
        };
        if advance_a {
            out.push([a[i % na], b[j % nb], a[(i + 1) % na]]);
            i += 1;
        } else {
            out.push([a[i % na], b[j % nb], b[(j + 1) % nb]]);
            j += 1;
        }
    }
}

/// Radial-annular mesh: `n_r = ceil(R_max/h)` rings at fractions `k/n_r` of
/// `R(θ)`, nodes equispaced in boundary arclength, fan at the center.
pub fn build_mesh(spec: &DomainSpec, resolution: f64) -> Result<Mesh> {
    if !(resolution > 0.0 && resolution < spec.r_min() / 4.0) {
        return Err(Error::InvalidArgument(format!(
            "mesh resolution {resolution} must lie in (0, R_min/4 = {})",
            spec.r_min() / 4.0
        )));
    }
    let arc = ArclengthMap::new(spec);
    let n_r = (spec.r_max() / resolution).ceil() as usize;
    let c = spec.center();
    let mut vertices = vec![c];
    let mut boundary_flags = vec![false];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=n_r {
        let frac = k as f64 / n_r as f64;
        let count = ((frac * arc.total() / resolution).ceil() as usize).max(6);
        let mut ring = Vec::with_capacity(count);
        for j in 0..count {
            let theta = arc.theta_at(j as f64 / count as f64);
            let r = if k == n_r {
                spec.radius(theta)
            } else {
                frac * spec.radius(theta)
            };
            let (s, co) = theta.sin_cos();
            ring.push(vertices.len());
            vertices.push([c[0] + r * co, c[1] + r * s]);
            boundary_flags.push(k == n_r);
        }
        rings.push(ring);
    }
    let mut triangles = Vec::new();
    let first = &rings[1];
    for j in 0..first.len() {
        triangles.push([0, first[j], first[(j + 1) % first.len()]]);
    }
    for k in 1..n_r {
        stitch(&vertices, &rings[k], &rings[k + 1], &mut triangles);
    }
    Mesh::from_parts(vertices, triangles, boundary_flags, resolution)
}

impl Mesh {
    /// Validates orientation and quality and builds the point locator.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_flags: Vec<bool>,
        resolution: f64,
    ) -> Result<Self> {
        if boundary_flags.len() != vertices.len() {
            return Err(Error::InvalidArgument("one boundary flag per vertex required".into()));
        }
        let mut cell_measure = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::MeshFailure {
                    triangle: t,
                    vertices: *tri,
                    reason: "vertex index out of range".into(),
                });
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let area = signed_area(a, b, c);
            if !(area > 0.0) {
                return Err(Error::MeshFailure {
                    triangle: t,
                    vertices: *tri,
                    reason: format!("non-positive orientation (area {area:e})"),
                });
            }
            let q = aspect_ratio(a, b, c);
            if !(q < MAX_ASPECT_RATIO) {
                return Err(Error::MeshFailure {
                    triangle: t,
                    vertices: *tri,
                    reason: format!("aspect ratio {q:.3} exceeds {MAX_ASPECT_RATIO}"),
                });
            }
            cell_measure.push(area);
        }
        let locator = Locator::new(&vertices, &triangles);
        Ok(Self {
            vertices,
            triangles,
            cell_measure,
            boundary_flags,
            resolution,
            locator,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn cell_measure(&self) -> &[f64] {
        &self.cell_measure
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary_flags
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.triangles.len()
    }

    pub fn total_measure(&self) -> f64 {
        self.cell_measure.iter().sum()
    }

    pub fn centroid(&self, cell: usize) -> Point {
        let [a, b, c] = self.triangles[cell].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn cell_mean(&self, field: &[f64], cell: usize) -> f64 {
        self.triangles[cell].iter().map(|&i| field[i]).sum::<f64>() / 3.0
    }

    /// Same topology with every vertex moved by `f`; `resolution_scale`
    /// rescales the nominal edge length.
    pub fn mapped(&self, f: impl Fn(Point) -> Point, resolution_scale: f64) -> Result<Self> {
        Self::from_parts(
            self.vertices.iter().map(|&p| f(p)).collect(),
            self.triangles.clone(),
            self.boundary_flags.clone(),
            self.resolution * resolution_scale,
        )
    }

    /// For every cell, the neighbor across each edge (`edge k` is opposite
    /// local vertex `k`).
    pub fn cell_neighbors(&self) -> Vec<[Option<usize>; 3]> {
        let mut by_edge: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut out = vec![[None; 3]; self.triangles.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some((other, ok)) = by_edge.remove(&key) {
                    out[t][k] = Some(other);
                    out[other][ok] = Some(t);
                } else {
                    by_edge.insert(key, (t, k));
                }
            }
        }
        out
    }

    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Containing cell and barycentric weights of `p`, if inside the mesh.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        self.locator.locate(p, &self.vertices, &self.triangles)
    }

    /// P1 interpolation of a per-vertex field.
    pub fn interpolate(&self, field: &[f64], p: Point) -> Option<f64> {
        self.locate(p).map(|(t, w)| {
            let tri = self.triangles[t];
            w[0] * field[tri[0]] + w[1] * field[tri[1]] + w[2] * field[tri[2]]
        })
    }

    /// Plain-text export: `v x y` lines then `t i j k` lines, zero-based.
    pub fn to_export_string(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.16e} {:.16e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    /// Parses the export format. Boundary flags are recovered as vertices on
    /// edges that belong to a single triangle.
    pub fn from_export_str(text: &str, resolution: f64) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            let bad = || Error::InvalidArgument(format!("mesh line {}: malformed", n + 1));
            match it.next() {
                Some("v") => {
                    let x = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                    let y = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                    vertices.push([x, y]);
                }
                Some("t") => {
                    let mut tri = [0usize; 3];
                    for slot in &mut tri {
                        *slot = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                    }
                    triangles.push(tri);
                }
                None => {}
                Some(_) => return Err(bad()),
            }
        }
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut flags = vec![false; vertices.len()];
        for ((a, b), count) in edge_count {
            if count == 1 && a < flags.len() && b < flags.len() {
                flags[a] = true;
                flags[b] = true;
            }
        }
        Self::from_parts(vertices, triangles, flags, resolution)
    }
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Debug, Clone)]
struct Locator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl Locator {
    fn new(vertices: &[Point], triangles: &[[usize; 3]]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        if triangles.is_empty() {
            return Self {
                origin: [0.0; 2],
                cell: 1.0,
                nx: 0,
                ny: 0,
                buckets: Vec::new(),
            };
        }
        let area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(1e-300);
        // About two triangles per bucket.
        let cell = (2.0 * area / triangles.len() as f64).sqrt().max(1e-300);
        let nx = (((hi[0] - lo[0]) / cell) as usize + 1).min(1 << 14);
        let ny = (((hi[1] - lo[1]) / cell) as usize + 1).min(1 << 14);
        let mut buckets = vec![Vec::new(); nx * ny];
        let index = |x: f64, n: usize, o: f64| (((x - o) / cell).floor().max(0.0) as usize).min(n - 1);
        for (t, tri) in triangles.iter().enumerate() {
            let ps = tri.map(|i| vertices[i]);
            let (x0, x1) = (ps.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), ps.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max));
            let (y0, y1) = (ps.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min), ps.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max));
            for iy in index(y0, ny, lo[1])..=index(y1, ny, lo[1]) {
                for ix in index(x0, nx, lo[0])..=index(x1, nx, lo[0]) {
                    buckets[iy * nx + ix].push(t as u32);
                }
            }
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn locate(&self, p: Point, vertices: &[Point], triangles: &[[usize; 3]]) -> Option<(usize, [f64; 3])> {
        if self.nx == 0 || !(p[0].is_finite() && p[1].is_finite()) {
            return None;
        }
        let fx = (p[0] - self.origin[0]) / self.cell;
        let fy = (p[1] - self.origin[1]) / self.cell;
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > self.nx as f64 + eps || fy > self.ny as f64 + eps {
            return None;
        }
        let ix = (fx.max(0.0) as usize).min(self.nx - 1);
        let iy = (fy.max(0.0) as usize).min(self.ny - 1);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[iy * self.nx + ix] {
            let t = t as usize;
            let [a, b, c] = triangles[t].map(|i| vertices[i]);
            let area = signed_area(a, b, c);
            let w = [
                signed_area(p, b, c) / area,
                signed_area(a, p, c) / area,
                signed_area(a, b, p) / area,
            ];
            let worst = w[0].min(w[1]).min(w[2]);
            if worst >= 0.0 {
                return Some((t, w));
            }
            if best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((t, w, worst));
            }
        }
        // Points on a shared edge may miss by round-off.
        best.filter(|b| b.2 > -1e-12).map(|(t, w, _)| (t, w))
    }
}
