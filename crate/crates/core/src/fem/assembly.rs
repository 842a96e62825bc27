use rayon::prelude::*;

use super::{FemError, SparseSymMatrix};
use crate::geometry::Vec2;
use crate::meshing::TriangleMesh;

/// Triangles with area below this multiple of the squared mesh scale are rejected.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-14;

/// P1 stiffness `∫∇φ_i·∇φ_j` on one triangle.
pub fn element_stiffness(p: [Vec2; 3]) -> [[f64; 3]; 3] {
    let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
    // ∇λ_i is the inward-rotated opposite edge over twice the area
    let grads: [Vec2; 3] = std::array::from_fn(|i| {
        let e = p[(i + 2) % 3] - p[(i + 1) % 3];
        Vec2::new(-e.y, e.x) / (2.0 * area)
    });
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * grads[i].dot(&grads[j]);
        }
    }
    k
}

/// P1 consistent mass `∫φ_i φ_j = (A/12)(1 + δ_ij)` on a triangle of area `A`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// Global stiffness and mass matrices. The Neumann condition is natural, so
/// no boundary rows are modified.
pub fn assemble(mesh: &TriangleMesh) -> Result<(SparseSymMatrix, SparseSymMatrix), FemError> {
    let min_area = DEGENERATE_AREA_RATIO * mesh.scale().powi(2);
    let elements: Vec<([[f64; 3]; 3], [[f64; 3]; 3])> = mesh
        .triangles
        .par_iter()
        .enumerate()
        .map(|(t, tri)| {
            let area = mesh.triangle_area(t);
            if area < min_area {
                return Err(FemError::DegenerateTriangle { triangle: t, area });
            }
            let p = tri.map(|v| mesh.vertices[v]);
            Ok((element_stiffness(p), element_mass(area)))
        })
        .collect::<Result<_, _>>()?;

    let n = mesh.n_vertices();
    let mut k_entries = Vec::with_capacity(9 * elements.len());
    let mut m_entries = Vec::with_capacity(9 * elements.len());
    for (tri, (ke, me)) in mesh.triangles.iter().zip(&elements) {
        for a in 0..3 {
            for b in 0..3 {
                k_entries.push((tri[a], tri[b], ke[a][b]));
                m_entries.push((tri[a], tri[b], me[a][b]));
            }
        }
    }
    Ok((
        SparseSymMatrix::from_triplets(n, k_entries),
        SparseSymMatrix::from_triplets(n, m_entries),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StarDomain;
    use crate::meshing::{generate_mesh, generate_rect_mesh};

    #[test]
    fn unit_right_triangle_stiffness() {
        let k = element_stiffness([Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mass_integrates_barycentric_products() {
        // ∫λ_iλ_j over the reference triangle by a degree-2-exact rule
        let pts = [[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
        let area = 0.5;
        let m = element_mass(area);
        for i in 0..3 {
            for j in 0..3 {
                let exact: f64 = pts
                    .iter()
                    .map(|&[x, y]| {
                        let l = [1.0 - x - y, x, y];
                        l[i] * l[j] * area / 3.0
                    })
                    .sum();
                assert!((m[i][j] - exact).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_in_kernel() {
        let d = StarDomain::new(Vec2::zeros(), &[1.0, 0.0, 0.1], &[0.0, 0.05]).unwrap();
        let mesh = generate_mesh(&d, 6, 32).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let ones = vec![1.0; k.dim()];
        assert!(k.bilinear(&ones, &ones).abs() < 1e-12 * k.max_abs());
        assert!((m.bilinear(&ones, &ones) - mesh.area()).abs() < 1e-13);
        assert!(k.max_asymmetry() < 1e-14);
        assert!(m.max_asymmetry() < 1e-14);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let mut mesh = generate_rect_mesh(1.0, 1.0, 2, 2).unwrap();
        mesh.vertices[4] = mesh.vertices[0];
        assert!(matches!(assemble(&mesh), Err(FemError::DegenerateTriangle { .. })));
    }
}
