use super::PerturbationError;
use crate::fem::EigenSolution;

/// A group of computed eigenvalues that approximate one (possibly multiple)
/// eigenvalue of the reference domain.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    /// Position of the cluster among all clusters, the constant mode being 0.
    pub index: usize,
    /// Mean of the member eigenvalues.
    pub value: f64,
    pub multiplicity: usize,
    /// Indices into the solution's ascending spectrum; consecutive.
    pub members: Vec<usize>,
    /// Absolute clustering tolerance.
    pub tolerance: f64,
}

/// The cluster around the eigenvalue nearest `target`, using an error estimate
/// of a third of the clustering tolerance.
pub fn find_cluster(sol: &EigenSolution, target: f64, rel_tol: f64) -> Result<EigenCluster, PerturbationError> {
    let tol = rel_tol * target.abs().max(1.0);
    find_cluster_with_error(sol.eigenvalues(), target, rel_tol, tol / 3.0)
}

/// Maximal run of consecutive eigenvalues within `rel_tol·target` of each
/// other containing the one nearest `target`. The gaps to both neighbours must
/// exceed the tolerance and three times `error_estimate`; a cluster touching
/// the top of the computed spectrum cannot be confirmed complete.
pub fn find_cluster_with_error(
    values: &[f64],
    target: f64,
    rel_tol: f64,
    error_estimate: f64,
) -> Result<EigenCluster, PerturbationError> {
    let (first, last) = match (values.first(), values.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(PerturbationError::EmptySpectrum),
    };
    let tol = rel_tol * target.abs().max(1.0);
    if target < first - tol || target > last + tol {
        return Err(PerturbationError::TargetOutOfRange { target, min: first, max: last });
    }
    let nearest = (0..values.len())
        .min_by(|&i, &j| (values[i] - target).abs().total_cmp(&(values[j] - target).abs()))
        .expect("non-empty");
    let (mut lo, mut hi) = (nearest, nearest);
    loop {
        let down = lo > 0 && values[hi] - values[lo - 1] < tol;
        let up = hi + 1 < values.len() && values[hi + 1] - values[lo] < tol;
        // grow toward the closer neighbour first
        match (down, up) {
            (true, true) => {
                if values[lo] - values[lo - 1] <= values[hi + 1] - values[hi] {
                    lo -= 1
                } else {
                    hi += 1
                }
            }
            (true, false) => lo -= 1,
            (false, true) => hi += 1,
            (false, false) => break,
        }
    }
    let required = tol.max(3.0 * error_estimate);
    let below = if lo > 0 { values[lo] - values[lo - 1] } else { f64::INFINITY };
    let above = if hi + 1 < values.len() { values[hi + 1] - values[hi] } else { 0.0 };
    let gap = below.min(above);
    if gap <= required {
        return Err(PerturbationError::AmbiguousCluster { target, gap, required });
    }
    let index = (1..=lo).filter(|&i| values[i] - values[i - 1] >= tol).count();
    let members: Vec<usize> = (lo..=hi).collect();
    let value = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
    Ok(EigenCluster {
        index,
        value,
        multiplicity: members.len(),
        members,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_double_and_simple_eigenvalues() {
        let pi2 = PI * PI;
        let spectrum = [0.0, pi2, pi2 * (1.0 + 1e-6), 2.0 * pi2, 4.0 * pi2, 4.0 * pi2];
        let c = find_cluster_with_error(&spectrum, pi2, 1e-3, 0.0).unwrap();
        assert_eq!(c.multiplicity, 2);
        assert_eq!(c.members, vec![1, 2]);
        assert_eq!(c.index, 1);
        let c = find_cluster_with_error(&spectrum, 2.0 * pi2, 1e-3, 0.0).unwrap();
        assert_eq!((c.multiplicity, c.index, c.members.clone()), (1, 2, vec![3]));
        let c = find_cluster_with_error(&spectrum, 0.0, 1e-3, 0.0).unwrap();
        assert_eq!((c.multiplicity, c.index), (1, 0));
    }

    #[test]
    fn errors() {
        let spectrum = [0.0, 3.39, 3.3901, 9.33, 9.3301];
        assert!(matches!(
            find_cluster_with_error(&spectrum, 20.0, 1e-3, 0.0),
            Err(PerturbationError::TargetOutOfRange { .. })
        ));
        // the top cluster may have members beyond the computed range
        assert!(matches!(
            find_cluster_with_error(&spectrum, 9.33, 1e-3, 0.0),
            Err(PerturbationError::AmbiguousCluster { .. })
        ));
        // a large discretization error makes the gap unreliable
        assert!(matches!(
            find_cluster_with_error(&spectrum, 3.39, 1e-3, 2.0),
            Err(PerturbationError::AmbiguousCluster { .. })
        ));
        assert!(matches!(
            find_cluster_with_error(&[], 1.0, 1e-3, 0.0),
            Err(PerturbationError::EmptySpectrum)
        ));
    }

    #[test]
    fn value_is_member_mean() {
        let spectrum = [0.0, 1.0, 1.0005, 2.0];
        let c = find_cluster_with_error(&spectrum, 1.0004, 1e-2, 0.0).unwrap();
        assert!((c.value - 1.00025).abs() < 1e-15);
        assert_eq!(c.tolerance, 1e-2 * 1.0004);
    }
}
