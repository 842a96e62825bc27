use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{assemble, solve_eigs, EigenPairs, EigenSolverOptions, FemError, SparseSymMatrix};
use crate::geometry::Vec2;
use crate::meshing::TriangleMesh;

/// Where boundary gradients come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientSource {
    /// `(∂φ/∂s)·t` from the nodal boundary trace, using `∂φ/∂ν = 0`.
    #[default]
    Tangential,
    /// Piecewise-constant gradient of the boundary element (diagnostic).
    Element,
}

/// Local data of the boundary polygon at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub point: Vec2,
    /// Unit tangent of the containing boundary edge, counterclockwise.
    pub tangent: Vec2,
    /// Outward unit normal of the containing edge.
    pub normal: Vec2,
    /// `dS/dθ` along the edge.
    pub speed: f64,
    // segment index and interpolation weight of the next node
    segment: usize,
    weight: f64,
}

/// Values and arclength derivatives of one eigenfunction on a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
    pub tangential: Vec<f64>,
}

/// Computed Neumann eigenpairs of one mesh.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    mesh: Arc<TriangleMesh>,
    mass: Arc<SparseSymMatrix>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    iterations: usize,
}

/// Assembles the mesh and computes its `count` smallest eigenpairs.
pub fn solve_mesh(
    mesh: Arc<TriangleMesh>,
    count: usize,
    opts: &EigenSolverOptions,
) -> Result<EigenSolution, FemError> {
    let (k, m) = assemble(&mesh)?;
    let pairs = solve_eigs(&k, &m, count, opts)?;
    Ok(EigenSolution::new(mesh, Arc::new(m), pairs))
}

impl EigenSolution {
    pub fn new(mesh: Arc<TriangleMesh>, mass: Arc<SparseSymMatrix>, pairs: EigenPairs) -> Self {
        EigenSolution {
            mesh,
            mass,
            values: pairs.values,
            vectors: pairs.vectors,
            iterations: pairs.iterations,
        }
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn mass(&self) -> &SparseSymMatrix {
        &self.mass
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Nodal coefficients of eigenvector `k`.
    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// Replaces the eigenvectors (e.g. with a recombined basis of a cluster).
    pub fn with_vectors(&self, vectors: DMatrix<f64>) -> Self {
        assert_eq!(vectors.nrows(), self.vectors.nrows());
        assert_eq!(vectors.ncols(), self.values.len());
        EigenSolution {
            vectors,
            ..self.clone()
        }
    }

    /// `⟨φ_i, φ_j⟩` in `L²` of the meshed domain.
    pub fn inner_product(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.vectors.column(i), self.vectors.column(j));
        self.mass.bilinear(a.as_slice(), b.as_slice())
    }

    /// Boundary polygon data at parameter `theta` (taken modulo 2π).
    pub fn boundary_sample(&self, theta: f64) -> BoundarySample {
        let nodes = &self.mesh.boundary_loop;
        let n = nodes.len();
        let t = theta.rem_euclid(TAU);
        let seg = match nodes.partition_point(|b| b.param <= t) {
            0 => n - 1,
            i => i - 1,
        };
        let next = (seg + 1) % n;
        let mut p0 = nodes[seg].param;
        let mut p1 = nodes[next].param;
        let mut tt = t;
        if next == 0 {
            p1 += TAU;
        }
        if tt < p0 {
            tt += TAU;
        }
        if p1 <= p0 {
            p0 -= TAU;
        }
        let weight = (tt - p0) / (p1 - p0);
        let (a, b) = (
            self.mesh.vertices[nodes[seg].vertex],
            self.mesh.vertices[nodes[next].vertex],
        );
        let edge = b - a;
        let len = edge.norm();
        let tangent = edge / len;
        BoundarySample {
            point: a + weight * edge,
            tangent,
            normal: Vec2::new(tangent.y, -tangent.x),
            speed: len / (p1 - p0),
            segment: seg,
            weight,
        }
    }

    /// Nodal boundary values and arclength derivatives of eigenvector `k`, in loop order.
    fn nodal_trace(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let nodes = &self.mesh.boundary_loop;
        let n = nodes.len();
        let u: Vec<f64> = nodes.iter().map(|b| self.vectors[(b.vertex, k)]).collect();
        let x: Vec<Vec2> = nodes.iter().map(|b| self.mesh.vertices[b.vertex]).collect();
        let du = (0..n)
            .map(|j| {
                let (prev, next) = ((j + n - 1) % n, (j + 1) % n);
                let sp = (x[j] - x[prev]).norm();
                let sn = (x[next] - x[j]).norm();
                // second-order three-point derivative on a nonuniform stencil
                ((u[next] - u[j]) * sp / sn + (u[j] - u[prev]) * sn / sp) / (sp + sn)
            })
            .collect();
        (u, du)
    }

    /// Eigenfunction `k` and its arclength derivative at the parameters in
    /// `thetas`, interpolated linearly between boundary nodes.
    pub fn boundary_trace(&self, k: usize, thetas: &[f64]) -> BoundaryTrace {
        let (u, du) = self.nodal_trace(k);
        let n = u.len();
        let (mut values, mut tangential) = (Vec::with_capacity(thetas.len()), Vec::with_capacity(thetas.len()));
        for &t in thetas {
            let s = self.boundary_sample(t);
            let next = (s.segment + 1) % n;
            values.push((1.0 - s.weight) * u[s.segment] + s.weight * u[next]);
            tangential.push((1.0 - s.weight) * du[s.segment] + s.weight * du[next]);
        }
        BoundaryTrace { values, tangential }
    }

    /// Boundary gradients of eigenfunction `k` at the given parameters.
    pub fn boundary_gradients(&self, k: usize, thetas: &[f64], source: GradientSource) -> Vec<Vec2> {
        match source {
            GradientSource::Tangential => {
                let trace = self.boundary_trace(k, thetas);
                thetas
                    .iter()
                    .zip(&trace.tangential)
                    .map(|(&t, &d)| d * self.boundary_sample(t).tangent)
                    .collect()
            }
            GradientSource::Element => thetas
                .iter()
                .map(|&t| {
                    let s = self.boundary_sample(t);
                    // nudge inside so the owning boundary element is found
                    let p = s.point - 1e-9 * self.mesh.scale() * s.normal;
                    self.interpolate(k, p).map(|(_, g)| g).unwrap_or_else(|_| Vec2::zeros())
                })
                .collect(),
        }
    }

    /// Vertex gradients of eigenfunction `k`: area-weighted averages of the
    /// element gradients inside, and the tangential trace along the vertex
    /// tangent on the boundary (where the normal derivative vanishes).
    pub fn recovered_gradients(&self, k: usize) -> Vec<Vec2> {
        let mesh = &*self.mesh;
        let mut sum = vec![Vec2::zeros(); mesh.n_vertices()];
        let mut weight = vec![0.0; mesh.n_vertices()];
        for tri in &mesh.triangles {
            let pts = tri.map(|v| mesh.vertices[v]);
            let area2 = (pts[1] - pts[0]).perp(&(pts[2] - pts[0]));
            let mut grad = Vec2::zeros();
            for i in 0..3 {
                let e = pts[(i + 2) % 3] - pts[(i + 1) % 3];
                grad += self.vectors[(tri[i], k)] * Vec2::new(-e.y, e.x) / area2;
            }
            for &v in tri {
                sum[v] += 0.5 * area2 * grad;
                weight[v] += 0.5 * area2;
            }
        }
        let mut grads: Vec<Vec2> = sum.iter().zip(&weight).map(|(g, w)| g / *w).collect();
        let (_, du) = self.nodal_trace(k);
        let nodes = &mesh.boundary_loop;
        let n = nodes.len();
        for j in 0..n {
            let prev = mesh.vertices[nodes[(j + n - 1) % n].vertex];
            let next = mesh.vertices[nodes[(j + 1) % n].vertex];
            grads[nodes[j].vertex] = du[j] * (next - prev).normalize();
        }
        grads
    }

    /// P1 value of eigenfunction `k` at `p` together with the linear
    /// interpolant of precomputed vertex gradients (see [`Self::recovered_gradients`]).
    pub fn interpolate_recovered(&self, k: usize, p: Vec2, grads: &[Vec2]) -> Result<(f64, Vec2), FemError> {
        let loc = self
            .mesh
            .locate(p)
            .ok_or(FemError::PointOutsideDomain { x: p.x, y: p.y })?;
        let tri = self.mesh.triangles[loc.triangle];
        let mut value = 0.0;
        let mut grad = Vec2::zeros();
        for i in 0..3 {
            value += loc.barycentric[i] * self.vectors[(tri[i], k)];
            grad += loc.barycentric[i] * grads[tri[i]];
        }
        Ok((value, grad))
    }

    /// P1 value and element gradient of eigenfunction `k` at `p`.
    pub fn interpolate(&self, k: usize, p: Vec2) -> Result<(f64, Vec2), FemError> {
        let loc = self
            .mesh
            .locate(p)
            .ok_or(FemError::PointOutsideDomain { x: p.x, y: p.y })?;
        let tri = self.mesh.triangles[loc.triangle];
        let pts = tri.map(|v| self.mesh.vertices[v]);
        let area2 = (pts[1] - pts[0]).perp(&(pts[2] - pts[0]));
        let mut value = 0.0;
        let mut grad = Vec2::zeros();
        for i in 0..3 {
            let u = self.vectors[(tri[i], k)];
            value += loc.barycentric[i] * u;
            let e = pts[(i + 2) % 3] - pts[(i + 1) % 3];
            grad += u * Vec2::new(-e.y, e.x) / area2;
        }
        Ok((value, grad))
    }
}
