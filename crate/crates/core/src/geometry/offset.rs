use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::{GeometryError, PerturbationField, StarDomain, Vec2};

/// Largest admissible sup-norm fit residual, relative to `sup|h|`.
pub const FIT_RESIDUAL_TOLERANCE: f64 = 1e-3;

/// Result of displacing a boundary along its normal and re-fitting a radius series.
#[derive(Debug, Clone)]
pub struct NormalOffset {
    pub domain: StarDomain,
    /// Sup-norm distance between the re-fitted radius and the exact offset curve,
    /// measured at angles interleaved with the fitting nodes.
    pub fit_residual: f64,
}

/// Moves every boundary point `x(θ)` to `x(θ) + h(θ)·n(θ)` and represents the
/// resulting curve as a star domain with a radius series of order `fit_order`.
pub fn apply_normal_offset(
    domain: &StarDomain,
    h: &PerturbationField,
    fit_order: usize,
) -> Result<NormalOffset, GeometryError> {
    if h.is_zero() {
        return Ok(NormalOffset {
            domain: domain.clone(),
            fit_residual: 0.0,
        });
    }
    let center = domain.center();
    let offset_point = |theta: f64| {
        let f = domain.boundary_frame(theta);
        f.point + h.value(theta) * f.normal
    };

    let samples = (8 * (fit_order + 1)).max(2048);
    let thetas: Vec<f64> = (0..=samples).map(|k| TAU * k as f64 / samples as f64).collect();
    let points: Vec<Vec2> = thetas.par_iter().map(|&t| offset_point(t)).collect();

    // unwrapped polar angle of the offset curve; must increase strictly through one turn
    let mut angles = Vec::with_capacity(points.len());
    let first = points[0] - center;
    if first.norm() == 0.0 {
        return Err(GeometryError::OffsetNotStarShaped { theta: 0.0 });
    }
    angles.push(first.y.atan2(first.x));
    for k in 1..points.len() {
        let (a, b) = (points[k - 1] - center, points[k] - center);
        let step = a.perp(&b).atan2(a.dot(&b));
        if step <= 0.0 || b.norm() == 0.0 {
            return Err(GeometryError::OffsetNotStarShaped { theta: thetas[k] });
        }
        angles.push(angles[k - 1] + step);
    }
    let turn = angles[samples] - angles[0];
    if (turn - TAU).abs() > 1e-9 {
        return Err(GeometryError::OffsetNotStarShaped { theta: TAU });
    }

    // radius of the offset curve in the direction psi
    let radius_at = |psi: f64| -> f64 {
        let mut target = psi;
        while target < angles[0] {
            target += TAU;
        }
        while target >= angles[0] + TAU {
            target -= TAU;
        }
        let k = angles.partition_point(|&a| a <= target).clamp(1, samples) - 1;
        let (mut lo, mut hi) = (thetas[k], thetas[k + 1]);
        let base = angles[k];
        let angle_of = |t: f64| {
            let (a, b) = (points[k] - center, offset_point(t) - center);
            base + a.perp(&b).atan2(a.dot(&b))
        };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if angle_of(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        (offset_point(0.5 * (lo + hi)) - center).norm()
    };

    let nodes = samples;
    let radii: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|j| radius_at(TAU * j as f64 / nodes as f64))
        .collect();
    let (cos, sin) = fit_trig_series(&radii, fit_order);
    let fitted = StarDomain::new(center, &cos, &sin[1..])?;

    let fit_residual = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let psi = TAU * (j as f64 + 0.5) / nodes as f64;
            (fitted.radius(psi) - radius_at(psi)).abs()
        })
        .reduce(|| 0.0, f64::max);
    let limit = FIT_RESIDUAL_TOLERANCE * h.sup_abs();
    if fit_residual > limit {
        return Err(GeometryError::FitResidualTooLarge {
            residual: fit_residual,
            limit,
        });
    }
    Ok(NormalOffset {
        domain: fitted,
        fit_residual,
    })
}

/// Discrete Fourier coefficients `(a₀..a_N, b₀..b_N)` of uniformly sampled values.
fn fit_trig_series(values: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = values.len();
    let mut a = vec![0.0; order + 1];
    let mut b = vec![0.0; order + 1];
    a[0] = values.iter().sum::<f64>() / m as f64;
    let coeffs: Vec<(f64, f64)> = (1..=order)
        .into_par_iter()
        .map(|n| {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                // reduce n·j mod m so the angle stays exact
                let phase = 2.0 * PI * ((n * j) % m) as f64 / m as f64;
                let (s, c) = phase.sin_cos();
                sa += v * c;
                sb += v * s;
            }
            (2.0 * sa / m as f64, 2.0 * sb / m as f64)
        })
        .collect();
    for (n, (ca, cb)) in coeffs.into_iter().enumerate() {
        a[n + 1] = ca;
        b[n + 1] = cb;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Profile, ProfileShape};

    #[test]
    fn uniform_offset_of_disk_is_larger_disk() {
        let disk = StarDomain::disk(1.0).unwrap();
        let off = apply_normal_offset(&disk, &PerturbationField::constant(0.05), 4).unwrap();
        assert!((off.domain.cos_coeffs()[0] - 1.05).abs() < 1e-12);
        for k in 0..32 {
            assert!((off.domain.radius(0.2 * k as f64) - 1.05).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_offset_is_identity() {
        let d = StarDomain::new(Vec2::new(0.1, 0.0), &[1.0, 0.0, 0.1], &[0.05]).unwrap();
        let off = apply_normal_offset(&d, &PerturbationField::zero(), 8).unwrap();
        assert_eq!(off.domain, d);
        assert_eq!(off.fit_residual, 0.0);
    }

    #[test]
    fn cosine_offset_of_disk_is_radial() {
        let disk = StarDomain::disk(1.0).unwrap();
        let eps = 0.01;
        let h = PerturbationField::harmonic(eps, Profile::new(ProfileShape::Cos), 2);
        let off = apply_normal_offset(&disk, &h, 4).unwrap();
        for k in 0..64 {
            let t = 0.1 * k as f64;
            assert!((off.domain.radius(t) - (1.0 + eps * (2.0 * t).cos())).abs() < 1e-13);
        }
        assert!(off.fit_residual < 1e-3 * eps);
    }

    #[test]
    fn underfit_is_reported() {
        let disk = StarDomain::disk(1.0).unwrap();
        let h = PerturbationField::harmonic(0.01, Profile::new(ProfileShape::Cos), 6);
        let err = apply_normal_offset(&disk, &h, 3).unwrap_err();
        assert!(matches!(err, GeometryError::FitResidualTooLarge { .. }));
    }

    #[test]
    fn folding_offset_is_rejected() {
        // the dents have a radius of curvature near 0.1, so pushing them out by
        // 0.3 makes the offset curve cross itself
        let d = StarDomain::new(Vec2::zeros(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2], &[]).unwrap();
        let err = apply_normal_offset(&d, &PerturbationField::constant(0.3), 12).unwrap_err();
        assert!(matches!(err, GeometryError::OffsetNotStarShaped { .. }));
    }

    #[test]
    fn offset_and_back_recovers_domain() {
        let d = StarDomain::new(Vec2::zeros(), &[1.0, 0.0, 0.08], &[0.0, 0.0, 0.03]).unwrap();
        let h = PerturbationField::harmonic(0.01, Profile::new(ProfileShape::Cos), 3);
        let there = apply_normal_offset(&d, &h, 48).unwrap();
        // the reverse displacement is along the normals of the original curve,
        // so compare to first order: the round trip error is O(h·h')
        let back = apply_normal_offset(&there.domain, &h.scaled(-1.0), 48).unwrap();
        for k in 0..64 {
            let t = 0.1 * k as f64;
            assert!((back.domain.radius(t) - d.radius(t)).abs() < 5e-4);
        }
    }
}
