//! Closed-form Neumann spectra of rectangles and the unit disk.

use std::f64::consts::{PI, TAU};

/// The `count` smallest Neumann eigenvalues `π²(m²/a² + n²/b²)`, `m, n ≥ 0`, of
/// the rectangle `[0, a] × [0, b]`, ascending with multiplicity.
///
/// # Panics
/// If a side length is not positive.
pub fn rect_neumann_eigs(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0, "side lengths must be positive, got {a} x {b}");
    // every one of the `count` smallest has m, n below count
    let mut all: Vec<f64> = (0..count)
        .flat_map(|m| (0..count).map(move |n| (m, n)))
        .map(|(m, n)| PI * PI * ((m * m) as f64 / (a * a) + (n * n) as f64 / (b * b)))
        .collect();
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

fn trapezoid_points(x: f64, n: usize) -> usize {
    // the integrand is entire; the error decays once the rule out-resolves
    // the frequencies n and x with a margin
    64 + 2 * (x.abs().ceil() as usize + n)
}

/// Bessel function `J_n(x) = (2π)⁻¹ ∮ cos(nτ − x sin τ) dτ` by the trapezoidal
/// rule, which converges geometrically for this periodic entire integrand.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = trapezoid_points(x, n as usize);
    (0..m)
        .map(|i| {
            let t = TAU * i as f64 / m as f64;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// `J_n'(x) = (2π)⁻¹ ∮ sin τ · sin(nτ − x sin τ) dτ`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    let m = trapezoid_points(x, n as usize);
    (0..m)
        .map(|i| {
            let t = TAU * i as f64 / m as f64;
            t.sin() * (n as f64 * t - x * t.sin()).sin()
        })
        .sum::<f64>()
        / m as f64
}

/// Positive zeros of `J_n'` below `limit`, ascending, located by a sign scan
/// and refined by bisection to `10⁻¹³`.
pub fn bessel_prime_zeros(n: u32, limit: f64) -> Vec<f64> {
    const STEP: f64 = 0.05;
    let mut zeros = Vec::new();
    // j'_{n,1} > n, and below n the derivative is too small to sign reliably
    let mut a = (n as f64).max(0.01);
    let mut fa = bessel_j_prime(n, a);
    while a < limit {
        let b = (a + STEP).min(limit);
        let fb = bessel_j_prime(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                let fm = bessel_j_prime(n, mid);
                if fm * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// One Neumann mode family of the unit disk: `J_n(j r) cos(nθ)` and, for
/// `n ≥ 1`, its sine partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMode {
    pub order: u32,
    /// `j'_{n,s}`; the eigenvalue is its square.
    pub root: f64,
}

impl DiskMode {
    pub fn eigenvalue(&self) -> f64 {
        self.root * self.root
    }

    pub fn multiplicity(&self) -> usize {
        if self.order == 0 { 1 } else { 2 }
    }
}

/// Neumann modes of the unit disk with eigenvalue below `limit²`, ascending.
pub fn disk_modes(limit: f64) -> Vec<DiskMode> {
    let mut modes = Vec::new();
    for n in 0..limit.ceil() as u32 {
        for root in bessel_prime_zeros(n, limit) {
            modes.push(DiskMode { order: n, root });
        }
    }
    modes.sort_by(|a, b| a.root.total_cmp(&b.root));
    modes
}

/// The `count` smallest Neumann eigenvalues of the unit disk, with angular
/// orders `n ≥ 1` counted twice.
pub fn disk_neumann_eigs(count: usize) -> Vec<f64> {
    let mut limit = 4.0;
    loop {
        let mut values = vec![0.0];
        for mode in disk_modes(limit) {
            values.extend(std::iter::repeat_n(mode.eigenvalue(), mode.multiplicity()));
        }
        // complete once the wanted values lie below the scanned range
        if values.len() >= count + 1 {
            values.truncate(count);
            return values;
        }
        limit *= 2.0;
    }
}
