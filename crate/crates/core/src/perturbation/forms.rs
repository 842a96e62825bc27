use std::f64::consts::TAU;

use nalgebra::DMatrix;

use super::{EigenCluster, PerturbationError};
use crate::fem::{dense_generalized, EigenSolution, GradientSource};
use crate::geometry::{PerturbationField, Vec2};

/// Boundary samples per oscillation of `h` below which a form is rejected.
pub const SAMPLES_PER_OSCILLATION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `∮ h (∇φ_i·∇φ_j − Λ φ_i φ_j) dS`.
    Boundary,
    /// `∮∫₀^h (∇φ_i·∇φ_j − Λ φ_i φ_j) dt dS`, signed in `h`.
    Volume,
    /// `λ⁻² ∮ h ((1 − λ) φ_i φ_j + ∇φ_i·∇φ_j) dS` with `λ = Λ + 1`.
    OperatorBoundary,
}

/// What the eigenvalues `κ` of a prediction approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `Λ'_k − Λ_m`.
    LambdaDifference,
    /// `λ_m⁻¹ − μ_k⁻¹` with `λ = Λ + 1`, `μ = Λ' + 1`.
    InverseOperatorDifference,
}

/// A `J×J` perturbation problem `A v = κ G v` on one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPrediction {
    pub form: Form,
    pub matrix: DMatrix<f64>,
    /// `L²` inner products of the cluster eigenfunctions on the reference domain.
    pub gram: DMatrix<f64>,
    /// Ascending.
    pub kappas: Vec<f64>,
    pub convention: Convention,
    /// `Λ_m`.
    pub cluster_value: f64,
}

impl PerturbationPrediction {
    /// Predicted eigenvalue shifts `Λ'_k − Λ_m` to first order, ascending.
    pub fn eigenvalue_shifts(&self) -> Vec<f64> {
        match self.convention {
            Convention::LambdaDifference => self.kappas.clone(),
            Convention::InverseOperatorDifference => {
                let l = self.cluster_value + 1.0;
                self.kappas.iter().map(|k| l * l * k).collect()
            }
        }
    }

    pub fn multiplicity(&self) -> usize {
        self.kappas.len()
    }
}

fn required_samples(h: &PerturbationField) -> usize {
    SAMPLES_PER_OSCILLATION * h.oscillations().max(1)
}

/// Midpoint-offset trapezoid nodes on the boundary parameter circle.
fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|q| TAU * (q as f64 + 0.5) / n as f64).collect()
}

fn gram(cluster: &EigenCluster, sol: &EigenSolution) -> DMatrix<f64> {
    let j = cluster.multiplicity;
    DMatrix::from_fn(j, j, |a, b| sol.inner_product(cluster.members[a], cluster.members[b]))
}

fn solve(
    form: Form,
    matrix: DMatrix<f64>,
    gram: DMatrix<f64>,
    convention: Convention,
    cluster: &EigenCluster,
) -> Result<PerturbationPrediction, PerturbationError> {
    let matrix = (&matrix + matrix.transpose()) * 0.5;
    let (kappas, _) = dense_generalized(&matrix, &gram)?;
    Ok(PerturbationPrediction {
        form,
        matrix,
        gram,
        kappas,
        convention,
        cluster_value: cluster.value,
    })
}

/// `Σ_q w_q h_q (d_i d_j + c φ_i φ_j)`, times `scale`, with tangential traces.
fn boundary_matrix(
    cluster: &EigenCluster,
    sol: &EigenSolution,
    h: &PerturbationField,
    n_quad: usize,
    c: f64,
    scale: f64,
) -> Result<DMatrix<f64>, PerturbationError> {
    let required = required_samples(h);
    if n_quad < required {
        return Err(PerturbationError::QuadratureUnderResolved { n_quad, required });
    }
    let j = cluster.multiplicity;
    let thetas = nodes(n_quad);
    let traces: Vec<_> = cluster.members.iter().map(|&k| sol.boundary_trace(k, &thetas)).collect();
    let dtheta = TAU / n_quad as f64;
    let mut a = DMatrix::zeros(j, j);
    for (q, &t) in thetas.iter().enumerate() {
        let hq = h.value(t);
        if hq == 0.0 {
            continue;
        }
        let w = hq * sol.boundary_sample(t).speed * dtheta;
        for r in 0..j {
            for s in r..j {
                let (tr, ts) = (&traces[r], &traces[s]);
                let f = tr.tangential[q] * ts.tangential[q] + c * tr.values[q] * ts.values[q];
                a[(r, s)] += scale * w * f;
            }
        }
    }
    for r in 0..j {
        for s in 0..r {
            a[(r, s)] = a[(s, r)];
        }
    }
    Ok(a)
}

/// Boundary form of the cluster splitting problem, by the trapezoidal rule on
/// `n_quad` boundary parameter samples.
pub fn kappa_boundary(
    cluster: &EigenCluster,
    sol: &EigenSolution,
    h: &PerturbationField,
    n_quad: usize,
) -> Result<PerturbationPrediction, PerturbationError> {
    let a = boundary_matrix(cluster, sol, h, n_quad, -cluster.value, 1.0)?;
    solve(Form::Boundary, a, gram(cluster, sol), Convention::LambdaDifference, cluster)
}

/// Boundary form in the inverse-operator convention; its matrix is the
/// boundary-form matrix divided by `λ_m²`.
pub fn kappa_operator_boundary(
    cluster: &EigenCluster,
    sol: &EigenSolution,
    h: &PerturbationField,
    n_quad: usize,
) -> Result<PerturbationPrediction, PerturbationError> {
    let lambda = cluster.value + 1.0;
    let a = boundary_matrix(cluster, sol, h, n_quad, 1.0 - lambda, 1.0 / (lambda * lambda))?;
    solve(
        Form::OperatorBoundary,
        a,
        gram(cluster, sol),
        Convention::InverseOperatorDifference,
        cluster,
    )
}

/// Volume form over the shell between the reference boundary and its offset by
/// `h`, integrated with `n_t` midpoint samples along each normal segment and
/// `n_theta` boundary parameter samples. The integral is signed: shell parts
/// with `h < 0` count negatively. Inside the reference domain the
/// eigenfunctions are evaluated with recovered gradients; outside they are
/// continued constantly along the normal.
pub fn tau_volume(
    cluster: &EigenCluster,
    sol: &EigenSolution,
    h: &PerturbationField,
    n_t: usize,
    n_theta: usize,
) -> Result<PerturbationPrediction, PerturbationError> {
    let required = required_samples(h);
    if n_theta < required || n_t == 0 {
        return Err(PerturbationError::ShellNotResolved { n_theta, required });
    }
    let j = cluster.multiplicity;
    let lambda = cluster.value;
    let thetas = nodes(n_theta);
    let traces: Vec<_> = cluster.members.iter().map(|&k| sol.boundary_trace(k, &thetas)).collect();
    let tangents: Vec<Vec<Vec2>> = cluster
        .members
        .iter()
        .map(|&k| sol.boundary_gradients(k, &thetas, GradientSource::Tangential))
        .collect();
    let recovered: Vec<Vec<Vec2>> = if (0..n_theta).any(|q| h.value(thetas[q]) < 0.0) {
        cluster.members.iter().map(|&k| sol.recovered_gradients(k)).collect()
    } else {
        Vec::new()
    };
    let dtheta = TAU / n_theta as f64;
    let mut a = DMatrix::zeros(j, j);
    let mut values = vec![0.0; j];
    let mut grads = vec![Vec2::zeros(); j];
    for (q, &t) in thetas.iter().enumerate() {
        let hq = h.value(t);
        if hq == 0.0 {
            continue;
        }
        let sample = sol.boundary_sample(t);
        let w = sample.speed * dtheta * hq / n_t as f64;
        for step in 0..n_t {
            let depth = hq * (step as f64 + 0.5) / n_t as f64;
            for r in 0..j {
                if depth < 0.0 {
                    let p = sample.point + depth * sample.normal;
                    let (v, g) = sol.interpolate_recovered(cluster.members[r], p, &recovered[r])?;
                    values[r] = v;
                    grads[r] = g;
                } else {
                    values[r] = traces[r].values[q];
                    grads[r] = tangents[r][q];
                }
            }
            for r in 0..j {
                for s in r..j {
                    a[(r, s)] += w * (grads[r].dot(&grads[s]) - lambda * values[r] * values[s]);
                }
            }
        }
    }
    for r in 0..j {
        for s in 0..r {
            a[(r, s)] = a[(s, r)];
        }
    }
    solve(Form::Volume, a, gram(cluster, sol), Convention::LambdaDifference, cluster)
}

/// Pairs predictions with measured shifts by rank, both ascending.
pub fn pair_predictions(predicted: &[f64], measured: &[f64]) -> Result<Vec<(f64, f64)>, PerturbationError> {
    if predicted.len() != measured.len() {
        return Err(PerturbationError::LengthMismatch {
            left: predicted.len(),
            right: measured.len(),
        });
    }
    let mut p = predicted.to_vec();
    let mut m = measured.to_vec();
    p.sort_by(f64::total_cmp);
    m.sort_by(f64::total_cmp);
    Ok(p.into_iter().zip(m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::fem::{solve_mesh, EigenSolverOptions};
    use crate::geometry::{Profile, ProfileShape, StarDomain};
    use crate::meshing::generate_mesh;
    use crate::perturbation::find_cluster;

    fn disk_solution(n_r: usize, n_a: usize, count: usize) -> EigenSolution {
        let mesh = generate_mesh(&StarDomain::disk(1.0).unwrap(), n_r, n_a).unwrap();
        solve_mesh(Arc::new(mesh), count, &EigenSolverOptions::default()).unwrap()
    }

    fn cos2(eps: f64) -> PerturbationField {
        PerturbationField::harmonic(eps, Profile::new(ProfileShape::Cos), 2)
    }

    #[test]
    fn zero_field_gives_exact_zeros() {
        let sol = disk_solution(10, 64, 8);
        let c = find_cluster(&sol, 3.39, 0.05).unwrap();
        let h = PerturbationField::zero();
        for p in [
            kappa_boundary(&c, &sol, &h, 64).unwrap(),
            kappa_operator_boundary(&c, &sol, &h, 64).unwrap(),
            tau_volume(&c, &sol, &h, 4, 64).unwrap(),
        ] {
            assert!(p.matrix.iter().all(|&x| x == 0.0));
            assert!(p.kappas.iter().all(|&k| k == 0.0));
        }
    }

    #[test]
    fn dilation_law_on_both_lowest_clusters() {
        let sol = disk_solution(24, 192, 8);
        let eps = 0.01;
        for target in [3.39, 9.33] {
            let c = find_cluster(&sol, target, 0.05).unwrap();
            assert_eq!(c.multiplicity, 2);
            let p = kappa_boundary(&c, &sol, &PerturbationField::constant(eps), 1024).unwrap();
            for k in &p.kappas {
                assert!((k / (-2.0 * c.value * eps) - 1.0).abs() < 0.01, "{k}");
            }
            // the dilation does not split the cluster
            assert!((p.kappas[1] - p.kappas[0]).abs() < 1e-3 * p.kappas[0].abs());
            let op = kappa_operator_boundary(&c, &sol, &PerturbationField::constant(eps), 1024).unwrap();
            let l = c.value + 1.0;
            for k in &op.kappas {
                assert!((k / (-2.0 * c.value * eps / (l * l)) - 1.0).abs() < 0.01);
            }
        }
    }

    #[test]
    fn cos2_splits_first_cluster() {
        let sol = disk_solution(24, 192, 6);
        let eps = 0.01;
        let c = find_cluster(&sol, 3.39, 0.05).unwrap();
        let p = kappa_boundary(&c, &sol, &cos2(eps), 1024).unwrap();
        let l: f64 = 1.841_183_781_340_659_3f64.powi(2);
        let expected = eps * l * (l + 1.0) / (l - 1.0);
        assert!((p.kappas[0] / -expected - 1.0).abs() < 0.02, "{:?}", p.kappas);
        assert!((p.kappas[1] / expected - 1.0).abs() < 0.02, "{:?}", p.kappas);
    }

    #[test]
    fn volume_form_shrink_and_cross_check() {
        let sol = disk_solution(24, 192, 6);
        let c = find_cluster(&sol, 3.39, 0.05).unwrap();
        let eps = 1e-3;
        let p = tau_volume(&c, &sol, &PerturbationField::constant(-eps), 4, 1024).unwrap();
        for k in &p.kappas {
            assert!((k / (2.0 * c.value * eps) - 1.0).abs() < 0.01, "{k}");
        }
        let eps = 0.01;
        let b = kappa_boundary(&c, &sol, &cos2(eps), 1024).unwrap();
        let v = tau_volume(&c, &sol, &cos2(eps), 4, 1024).unwrap();
        for (kb, kv) in b.kappas.iter().zip(&v.kappas) {
            assert!((kb - kv).abs() < 0.05 * kb.abs(), "{kb} vs {kv}");
        }
    }

    #[test]
    fn operator_form_is_scaled_boundary_form() {
        let sol = disk_solution(12, 96, 6);
        let c = find_cluster(&sol, 3.39, 0.05).unwrap();
        let h = PerturbationField::harmonic(0.02, Profile::with_offset(ProfileShape::Cos, 0.3).unwrap(), 3);
        let b = kappa_boundary(&c, &sol, &h, 256).unwrap();
        let o = kappa_operator_boundary(&c, &sol, &h, 256).unwrap();
        let l2 = (c.value + 1.0).powi(2);
        assert!((&o.matrix * l2 - &b.matrix).amax() <= 1e-12 * b.matrix.amax());
        for (kb, ko) in b.kappas.iter().zip(o.eigenvalue_shifts()) {
            assert!((kb - ko).abs() <= 1e-12 * kb.abs());
        }
    }

    #[test]
    fn basis_invariance_trace_identity_and_linearity() {
        let sol = disk_solution(12, 96, 6);
        let c = find_cluster(&sol, 3.39, 0.05).unwrap();
        let h = PerturbationField::harmonic(0.02, Profile::with_offset(ProfileShape::Sin, 0.2).unwrap(), 2);
        let base = kappa_boundary(&c, &sol, &h, 256).unwrap();

        // rotate the cluster basis by an arbitrary angle
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: f64 = rng.random_range(0.0..TAU);
        let mut vectors = DMatrix::zeros(sol.mesh().n_vertices(), sol.len());
        for k in 0..sol.len() {
            vectors.set_column(k, &sol.eigenvector(k));
        }
        let (i, j) = (c.members[0], c.members[1]);
        let (vi, vj) = (sol.eigenvector(i), sol.eigenvector(j));
        vectors.set_column(i, &(&vi * a.cos() + &vj * a.sin()));
        vectors.set_column(j, &(&vj * a.cos() - &vi * a.sin()));
        let rotated = kappa_boundary(&c, &sol.with_vectors(vectors), &h, 256).unwrap();
        for (x, y) in base.kappas.iter().zip(&rotated.kappas) {
            assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()));
        }

        // trace(G⁻¹A) = Σκ = ∮ h Σ(|∇φ|² − Λφ²) for an orthonormal basis
        let g_inv_a = base.gram.clone().try_inverse().unwrap() * &base.matrix;
        let sum: f64 = base.kappas.iter().sum();
        let thetas = nodes(256);
        let mut direct = 0.0;
        for &k in &c.members {
            let tr = sol.boundary_trace(k, &thetas);
            for (q, &t) in thetas.iter().enumerate() {
                let w = h.value(t) * sol.boundary_sample(t).speed * TAU / 256.0;
                direct += w * (tr.tangential[q].powi(2) - c.value * tr.values[q].powi(2));
            }
        }
        assert!((g_inv_a.trace() - sum).abs() <= 1e-10 * sum.abs());
        assert!((direct - sum).abs() <= 1e-8 * sum.abs(), "{direct} vs {sum}");

        for scale in [-2.0, 0.5, 3.0] {
            let p = kappa_boundary(&c, &sol, &h.scaled(scale), 256).unwrap();
            let mut want: Vec<f64> = base.kappas.iter().map(|k| k * scale).collect();
            want.sort_by(f64::total_cmp);
            for (x, y) in p.kappas.iter().zip(&want) {
                assert!((x - y).abs() <= 1e-12 * y.abs());
            }
        }
    }

    #[test]
    fn under_resolution_is_rejected() {
        let sol = disk_solution(6, 32, 4);
        let c = find_cluster(&sol, 3.39, 0.05).unwrap();
        let h = PerturbationField::harmonic(0.01, Profile::new(ProfileShape::Cos), 10);
        assert!(matches!(
            kappa_boundary(&c, &sol, &h, 79),
            Err(PerturbationError::QuadratureUnderResolved { n_quad: 79, required: 80 })
        ));
        assert!(matches!(
            tau_volume(&c, &sol, &h, 4, 40),
            Err(PerturbationError::ShellNotResolved { .. })
        ));
    }

    #[test]
    fn rank_pairing() {
        assert_eq!(
            pair_predictions(&[-1.0, 2.0], &[2.1, -0.9]).unwrap(),
            vec![(-1.0, -0.9), (2.0, 2.1)]
        );
        assert_eq!(pair_predictions(&[0.5], &[0.4]).unwrap(), vec![(0.5, 0.4)]);
        assert!(matches!(
            pair_predictions(&[1.0], &[1.0, 2.0]),
            Err(PerturbationError::LengthMismatch { left: 1, right: 2 })
        ));
    }
}
