use std::f64::consts::TAU;

use super::{GeometryError, Vec2};

/// Number of angles at which positivity of the radius is checked on construction.
pub const POSITIVITY_SAMPLES: usize = 4096;

/// Planar domain `{ c + r (cos θ, sin θ) : 0 ≤ r < ρ(θ) }` whose radius is a
/// finite trigonometric series `ρ(θ) = a₀ + Σ aₙ cos nθ + bₙ sin nθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarDomain {
    center: Vec2,
    // cos[0] = a₀; sin[0] is kept at zero so both vectors share indexing.
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Point, outward unit normal and `|dx/dθ|` at one boundary angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub point: Vec2,
    pub normal: Vec2,
    pub arclength_factor: f64,
}

impl StarDomain {
    /// Builds a domain from cosine coefficients `a₀..a_N` and sine coefficients
    /// `b₁..b_N` (the sine list may be shorter than the cosine list or empty).
    pub fn new(center: Vec2, cos: &[f64], sin: &[f64]) -> Result<Self, GeometryError> {
        if cos.is_empty() {
            return Err(GeometryError::EmptyCoefficients);
        }
        if cos.iter().chain(sin).any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFiniteCoefficient);
        }
        let order = cos.len().saturating_sub(1).max(sin.len());
        let mut a = vec![0.0; order + 1];
        let mut b = vec![0.0; order + 1];
        a[..cos.len()].copy_from_slice(cos);
        b[1..=sin.len()].copy_from_slice(sin);
        // trailing zero harmonics carry no information
        while a.len() > 1 && a[a.len() - 1] == 0.0 && b[b.len() - 1] == 0.0 {
            a.pop();
            b.pop();
        }
        let domain = StarDomain {
            center,
            cos: a,
            sin: b,
        };
        let min = (0..POSITIVITY_SAMPLES)
            .map(|k| domain.radius(TAU * k as f64 / POSITIVITY_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(GeometryError::NonPositiveRadius { min });
        }
        Ok(domain)
    }

    /// Disk of the given radius centered at the origin.
    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::new(Vec2::zeros(), &[radius], &[])
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    /// Cosine coefficients `a₀..a_N`.
    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    /// Sine coefficients `b₁..b_N`.
    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin[1..]
    }

    /// Highest harmonic present in the radius series.
    pub fn order(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.radius_and_derivative(theta).0
    }

    /// `(ρ(θ), ρ'(θ))`, summed with the angle-addition recurrence.
    pub fn radius_and_derivative(&self, theta: f64) -> (f64, f64) {
        let (s1, c1) = theta.sin_cos();
        let (mut sn, mut cn) = (0.0_f64, 1.0_f64);
        let mut rho = self.cos[0];
        let mut drho = 0.0;
        for n in 1..self.cos.len() {
            let next_c = cn * c1 - sn * s1;
            let next_s = sn * c1 + cn * s1;
            cn = next_c;
            sn = next_s;
            let (a, b) = (self.cos[n], self.sin[n]);
            rho += a * cn + b * sn;
            drho += n as f64 * (b * cn - a * sn);
        }
        (rho, drho)
    }

    pub fn boundary_point(&self, theta: f64) -> Vec2 {
        let r = self.radius(theta);
        self.center + r * Vec2::new(theta.cos(), theta.sin())
    }

    /// Boundary point, outward normal and arclength factor `√(ρ² + ρ'²)` at `θ`.
    pub fn boundary_frame(&self, theta: f64) -> BoundaryFrame {
        let (rho, drho) = self.radius_and_derivative(theta);
        let (s, c) = theta.sin_cos();
        let radial = Vec2::new(c, s);
        let tangent = drho * radial + rho * Vec2::new(-s, c);
        let speed = tangent.norm();
        BoundaryFrame {
            point: self.center + rho * radial,
            normal: Vec2::new(tangent.y, -tangent.x) / speed,
            arclength_factor: speed,
        }
    }

    /// Exact enclosed area `½∮ρ² dθ`.
    pub fn area(&self) -> f64 {
        let harmonics: f64 = self.cos[1..]
            .iter()
            .zip(&self.sin[1..])
            .map(|(a, b)| a * a + b * b)
            .sum();
        std::f64::consts::PI * (self.cos[0] * self.cos[0] + 0.5 * harmonics)
    }

    /// Largest radius over a dense sample, used for mesh scale estimates.
    pub fn max_radius(&self) -> f64 {
        (0..POSITIVITY_SAMPLES)
            .map(|k| self.radius(TAU * k as f64 / POSITIVITY_SAMPLES as f64))
            .fold(0.0, f64::max)
    }
}
