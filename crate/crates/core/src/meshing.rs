//! Mapped polar triangulations of star domains and structured triangulations of
//! rectangles, with a parameterized boundary loop and constant-time point location.

use std::f64::consts::TAU;
use std::io::{self, Write};

use crate::geometry::{PerturbationFamily, StarDomain, Vec2};

/// Default cap on the vertex count implied by a resolution choice.
pub const DEFAULT_VERTEX_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("invalid mesh resolution: {0}")]
    InvalidResolution(String),
    #[error("resolution needs {vertices} vertices, above the cap of {cap}")]
    ResolutionBudgetExceeded { vertices: usize, cap: usize },
}

/// Vertex on the boundary loop together with its boundary parameter in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub vertex: usize,
    pub param: f64,
}

/// Index structure of a generated mesh, used for point location.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshLayout {
    /// Center vertex 0, then `n_radial` rings of `n_angular` vertices on the rays `θ_j = 2πj/n_angular`.
    Polar {
        center: Vec2,
        n_radial: usize,
        n_angular: usize,
    },
    /// `(nx + 1) × (ny + 1)` lattice on `[x₀, x₀ + width] × [y₀, y₀ + height]`.
    Grid {
        origin: Vec2,
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    },
}

/// Conforming triangulation with counterclockwise triangles and a single
/// counterclockwise boundary loop sorted by parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_loop: Vec<BoundaryNode>,
    pub layout: MeshLayout,
}

/// Containing triangle and barycentric coordinates of a located point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub barycentric: [f64; 3],
}

/// Ring fraction `√(i/n)`: rings crowd toward the boundary.
fn ring_fraction(i: usize, n_radial: usize) -> f64 {
    (i as f64 / n_radial as f64).sqrt()
}

/// Mapped polar mesh of `domain`: ring `i` sits at `√(i/n_radial)·ρ(θ)`.
pub fn generate_mesh(
    domain: &StarDomain,
    n_radial: usize,
    n_angular: usize,
) -> Result<TriangleMesh, MeshError> {
    if n_radial < 1 || n_angular < 3 {
        return Err(MeshError::InvalidResolution(format!(
            "need n_radial >= 1 and n_angular >= 3, got ({n_radial}, {n_angular})"
        )));
    }
    let center = domain.center();
    let angles: Vec<f64> = (0..n_angular).map(|j| TAU * j as f64 / n_angular as f64).collect();
    let rays: Vec<Vec2> = angles
        .iter()
        .map(|&t| domain.radius(t) * Vec2::new(t.cos(), t.sin()))
        .collect();

    let mut vertices = Vec::with_capacity(1 + n_radial * n_angular);
    vertices.push(center);
    for i in 1..=n_radial {
        let s = ring_fraction(i, n_radial);
        vertices.extend(rays.iter().map(|r| center + s * r));
    }
    let v = |i: usize, j: usize| 1 + (i - 1) * n_angular + (j % n_angular);

    let mut triangles = Vec::with_capacity(n_angular * (2 * n_radial - 1));
    for j in 0..n_angular {
        triangles.push([0, v(1, j), v(1, j + 1)]);
    }
    for i in 1..n_radial {
        for j in 0..n_angular {
            triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    let boundary_loop = (0..n_angular)
        .map(|j| BoundaryNode {
            vertex: v(n_radial, j),
            param: angles[j],
        })
        .collect();
    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary_loop,
        layout: MeshLayout::Polar {
            center,
            n_radial,
            n_angular,
        },
    })
}

/// Structured mesh of `[0, width] × [0, height]` with every cell split along
/// its rising diagonal. The boundary parameter is arclength scaled to `[0, 2π)`,
/// starting at the origin and running counterclockwise.
pub fn generate_rect_mesh(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
) -> Result<TriangleMesh, MeshError> {
    if nx < 1 || ny < 1 || !(width > 0.0 && height > 0.0) {
        return Err(MeshError::InvalidResolution(format!(
            "need positive sides and nx, ny >= 1, got {width}x{height} with ({nx}, {ny})"
        )));
    }
    let (dx, dy) = (width / nx as f64, height / ny as f64);
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec2::new(i as f64 * dx, j as f64 * dy));
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let perimeter = 2.0 * (width + height);
    let scale = TAU / perimeter;
    let mut boundary_loop = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_loop.push((idx(i, 0), i as f64 * dx));
    }
    for j in 0..ny {
        boundary_loop.push((idx(nx, j), width + j as f64 * dy));
    }
    for i in (1..=nx).rev() {
        boundary_loop.push((idx(i, ny), width + height + (nx - i) as f64 * dx));
    }
    for j in (1..=ny).rev() {
        boundary_loop.push((idx(0, j), 2.0 * width + height + (ny - j) as f64 * dy));
    }
    let boundary_loop = boundary_loop
        .into_iter()
        .map(|(vertex, s)| BoundaryNode {
            vertex,
            param: s * scale,
        })
        .collect();
    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary_loop,
        layout: MeshLayout::Grid {
            origin: Vec2::zeros(),
            width,
            height,
            nx,
            ny,
        },
    })
}

/// Boundary parameter interval `[start, end)` of the side `x = width` of a
/// rectangle meshed by [`generate_rect_mesh`].
pub fn rect_right_side_params(width: f64, height: f64) -> (f64, f64) {
    let scale = TAU / (2.0 * (width + height));
    (width * scale, (width + height) * scale)
}

/// How angular resolution follows the perturbation frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionPolicy {
    pub elements_per_oscillation: usize,
    /// Floor on `n_angular`, independent of the perturbation.
    pub min_angular: usize,
    pub vertex_cap: usize,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        ResolutionPolicy {
            elements_per_oscillation: 10,
            min_angular: 64,
            vertex_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

/// `(n_radial, n_angular)` resolving `h_ε` with the requested number of boundary
/// elements per oscillation. `n_angular` is a multiple of 4; `n_radial` keeps
/// boundary elements near unit aspect under the square-root ring grading.
pub fn resolution_for(
    family: &PerturbationFamily,
    epsilon: f64,
    policy: &ResolutionPolicy,
) -> Result<(usize, usize), MeshError> {
    resolution_for_oscillations(family.oscillations(epsilon), policy)
}

/// [`resolution_for`] given the oscillation count directly.
pub fn resolution_for_oscillations(
    oscillations: usize,
    policy: &ResolutionPolicy,
) -> Result<(usize, usize), MeshError> {
    if policy.elements_per_oscillation < 4 {
        return Err(MeshError::InvalidResolution(format!(
            "elements_per_oscillation must be >= 4, got {}",
            policy.elements_per_oscillation
        )));
    }
    let wanted = (policy.elements_per_oscillation * oscillations)
        .max(policy.min_angular)
        .max(4);
    let n_angular = wanted.div_ceil(4) * 4;
    // boundary ring spacing is about 1/(2 n_radial) for the √ grading
    let n_radial = ((n_angular as f64 / (2.0 * TAU)).ceil() as usize).max(1);
    let vertices = 1 + n_radial * n_angular;
    if vertices > policy.vertex_cap {
        return Err(MeshError::ResolutionBudgetExceeded {
            vertices,
            cap: policy.vertex_cap,
        });
    }
    Ok((n_radial, n_angular))
}

fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).perp(&(c - a))
}

fn barycentric(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> [f64; 3] {
    let area = signed_area(a, b, c);
    let l0 = signed_area(p, b, c) / area;
    let l1 = signed_area(a, p, c) / area;
    [l0, l1, 1.0 - l0 - l1]
}

// relative slack for points on element edges
const LOCATE_TOL: f64 = 1e-10;

impl TriangleMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// `(n_radial, n_angular)` for polar meshes, `(nx, ny)` for grids.
    pub fn resolution(&self) -> (usize, usize) {
        match self.layout {
            MeshLayout::Polar {
                n_radial, n_angular, ..
            } => (n_radial, n_angular),
            MeshLayout::Grid { nx, ny, .. } => (nx, ny),
        }
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Diameter of the vertex bounding box.
    pub fn scale(&self) -> f64 {
        let (mut lo, mut hi) = (self.vertices[0], self.vertices[0]);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }

    /// Triangle containing `p`, or `None` outside the meshed polygon.
    pub fn locate(&self, p: Vec2) -> Option<Location> {
        match self.layout {
            MeshLayout::Polar {
                center,
                n_radial,
                n_angular,
            } => self.locate_polar(p, center, n_radial, n_angular),
            MeshLayout::Grid {
                origin,
                width,
                height,
                nx,
                ny,
            } => self.locate_grid(p, origin, width, height, nx, ny),
        }
    }

    fn inside(&self, t: usize, p: Vec2) -> Option<Location> {
        let [a, b, c] = self.triangles[t];
        let bary = barycentric(p, self.vertices[a], self.vertices[b], self.vertices[c]);
        bary.iter().all(|&l| l >= -LOCATE_TOL).then_some(Location {
            triangle: t,
            barycentric: bary,
        })
    }

    fn locate_polar(&self, p: Vec2, center: Vec2, nr: usize, na: usize) -> Option<Location> {
        let rel = p - center;
        if rel.norm_squared() == 0.0 {
            return Some(Location {
                triangle: 0,
                barycentric: [1.0, 0.0, 0.0],
            });
        }
        let phi = rel.y.atan2(rel.x).rem_euclid(TAU);
        let j = ((phi / TAU * na as f64).floor() as usize).min(na - 1);
        let j1 = (j + 1) % na;
        let v = |i: usize, jj: usize| self.vertices[1 + (i - 1) * na + jj];
        let scale2 = (v(nr, j) - center).norm_squared();
        // strictly on the outer side of ring i's edge in this sector
        let beyond = |i: usize| {
            let (a, b) = (v(i, j), v(i, j1));
            (b - a).perp(&(p - a)) < -LOCATE_TOL * scale2
        };
        if beyond(nr) {
            return None;
        }
        let (mut lo, mut hi) = (1usize, nr);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if beyond(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 1 {
            return self.inside(j, p).or(Some(self.clamped(j, p)));
        }
        let base = na + 2 * ((lo - 2) * na + j);
        self.inside(base, p)
            .or_else(|| self.inside(base + 1, p))
            .or_else(|| Some(self.clamped(base + 1, p)))
    }

    fn locate_grid(
        &self,
        p: Vec2,
        origin: Vec2,
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    ) -> Option<Location> {
        let rel = p - origin;
        let tol = LOCATE_TOL * (width + height);
        if rel.x < -tol || rel.y < -tol || rel.x > width + tol || rel.y > height + tol {
            return None;
        }
        let fx = rel.x / width * nx as f64;
        let fy = rel.y / height * ny as f64;
        let i = (fx.floor().max(0.0) as usize).min(nx - 1);
        let j = (fy.floor().max(0.0) as usize).min(ny - 1);
        let base = 2 * (j * nx + i);
        let t = if fx - i as f64 >= fy - j as f64 { base } else { base + 1 };
        Some(self.inside(t, p).unwrap_or_else(|| self.clamped(t, p)))
    }

    // Barycentric coordinates of p in t, clipped to the triangle.
    fn clamped(&self, t: usize, p: Vec2) -> Location {
        let [a, b, c] = self.triangles[t];
        let mut bary = barycentric(p, self.vertices[a], self.vertices[b], self.vertices[c]);
        for l in &mut bary {
            *l = l.max(0.0);
        }
        let s: f64 = bary.iter().sum();
        for l in &mut bary {
            *l /= s;
        }
        Location {
            triangle: t,
            barycentric: bary,
        }
    }

    /// Plain-text dump: a `vertices N` header, `v x y` lines, a `triangles M`
    /// header and `t i j k` lines.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "v {:.17e} {:.17e}", v.x, v.y)?;
        }
        writeln!(out, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}
