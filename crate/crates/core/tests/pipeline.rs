use std::sync::Arc;

use proptest::prelude::*;

use hadamard_core::oracles::disk_neumann_eigs;
use hadamard_core::perturbation::{find_cluster, kappa_boundary, tau_volume, EigenCluster};
use hadamard_core::{
    generate_mesh, solve_mesh, EigenSolution, EigenSolverOptions, PerturbationField, Profile, ProfileShape,
    StarDomain,
};

fn disk_solution() -> (EigenSolution, EigenCluster) {
    let mesh = generate_mesh(&StarDomain::disk(1.0).unwrap(), 16, 128).unwrap();
    let sol = solve_mesh(Arc::new(mesh), 6, &EigenSolverOptions::default()).unwrap();
    let cluster = find_cluster(&sol, 3.39, 0.05).unwrap();
    (sol, cluster)
}

#[test]
fn disk_cluster_is_double_near_the_bessel_root() {
    let (sol, cluster) = disk_solution();
    assert_eq!(cluster.multiplicity, 2);
    let exact = disk_neumann_eigs(2)[1];
    assert!((cluster.value - exact).abs() < 0.01 * exact);
    assert!(sol.eigenvalues()[0].abs() < 1e-8);
}

#[test]
fn uniform_dilation_shifts_both_members_equally() {
    let (sol, cluster) = disk_solution();
    let eps = 0.01;
    let p = kappa_boundary(&cluster, &sol, &PerturbationField::constant(eps), 512).unwrap();
    for k in &p.kappas {
        assert!((k / (-2.0 * cluster.value * eps) - 1.0).abs() < 0.01, "{k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn boundary_form_is_linear_in_amplitude(amp in 1e-4f64..0.05, scale in 0.1f64..4.0, freq in 0u32..5) {
        let (sol, cluster) = disk_solution();
        let h = PerturbationField::harmonic(amp, Profile::new(ProfileShape::Cos), freq);
        let base = kappa_boundary(&cluster, &sol, &h, 512).unwrap();
        let scaled = kappa_boundary(&cluster, &sol, &h.scaled(scale), 512).unwrap();
        for (a, b) in base.kappas.iter().zip(&scaled.kappas) {
            prop_assert!((scale * a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn volume_form_trace_matches_boundary_form_for_outward_fields(amp in 1e-4f64..0.02, freq in 1u32..4) {
        let (sol, cluster) = disk_solution();
        let h = PerturbationField::harmonic(amp, Profile::with_offset(ProfileShape::Cos, 1.0).unwrap(), freq);
        let b = kappa_boundary(&cluster, &sol, &h, 512).unwrap();
        let v = tau_volume(&cluster, &sol, &h, 4, 512).unwrap();
        let tb: f64 = b.kappas.iter().sum();
        let tv: f64 = v.kappas.iter().sum();
        prop_assert!((tb - tv).abs() <= 1e-9 * tb.abs().max(1e-12), "{} vs {}", tb, tv);
    }
}
