use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{StarDomain, Vec2};

/// Two-sided Hausdorff distance between two star domains sharing a center,
/// computed between their boundaries: each of `n_samples` boundary points of one
/// domain is measured against the closed polygon through the other's samples.
pub fn hausdorff_distance(a: &StarDomain, b: &StarDomain, n_samples: usize) -> f64 {
    let n = n_samples.max(3);
    let sample = |d: &StarDomain| -> Vec<Vec2> {
        (0..n).map(|k| d.boundary_point(TAU * k as f64 / n as f64)).collect()
    };
    let (pa, pb) = (sample(a), sample(b));
    directed(&pa, &pb).max(directed(&pb, &pa))
}

fn directed(from: &[Vec2], to: &[Vec2]) -> f64 {
    from.par_iter()
        .map(|p| {
            (0..to.len())
                .map(|k| segment_distance(*p, to[k], to[(k + 1) % to.len()]))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + t * ab)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concentric_disks() {
        let a = StarDomain::disk(1.0).unwrap();
        let b = StarDomain::disk(1.03).unwrap();
        assert!((hausdorff_distance(&a, &b, 512) - 0.03).abs() < 1e-4);
    }

    #[test]
    fn identical_domains() {
        let a = StarDomain::new(Vec2::zeros(), &[1.0, 0.1], &[0.05]).unwrap();
        assert!(hausdorff_distance(&a, &a, 256) < 1e-15);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = StarDomain::new(Vec2::zeros(), &[1.0, 0.0, 0.05], &[]).unwrap();
        let b = StarDomain::new(Vec2::zeros(), &[0.98, 0.0, 0.0, 0.04], &[0.02]).unwrap();
        let (ab, ba) = (hausdorff_distance(&a, &b, 1024), hausdorff_distance(&b, &a, 1024));
        assert!((ab - ba).abs() < 1e-14);
    }
}
