use std::f64::consts::TAU;

use super::GeometryError;

const PROFILE_SAMPLES: usize = 4096;

// odd harmonics of the band-limited triangle wave
const SAWTOOTH_HARMONICS: [u32; 3] = [1, 3, 5];

/// Periodic base shape `g` of a perturbation profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    Constant,
    Cos,
    Sin,
    /// Triangle wave truncated to its first three odd harmonics, normalized to `g(0) = 1`.
    Sawtooth,
}

impl ProfileShape {
    fn sawtooth_norm() -> f64 {
        SAWTOOTH_HARMONICS.iter().map(|&k| 1.0 / (k * k) as f64).sum()
    }

    pub fn value(self, x: f64) -> f64 {
        match self {
            ProfileShape::Constant => 1.0,
            ProfileShape::Cos => x.cos(),
            ProfileShape::Sin => x.sin(),
            ProfileShape::Sawtooth => {
                let sum: f64 = SAWTOOTH_HARMONICS
                    .iter()
                    .map(|&k| (k as f64 * x).cos() / (k * k) as f64)
                    .sum();
                sum / Self::sawtooth_norm()
            }
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ProfileShape::Constant => 0.0,
            ProfileShape::Cos => -x.sin(),
            ProfileShape::Sin => x.cos(),
            ProfileShape::Sawtooth => {
                let sum: f64 = SAWTOOTH_HARMONICS
                    .iter()
                    .map(|&k| -(k as f64 * x).sin() / k as f64)
                    .sum();
                sum / Self::sawtooth_norm()
            }
        }
    }

    /// Highest harmonic of `g`.
    pub fn max_harmonic(self) -> u32 {
        match self {
            ProfileShape::Constant => 0,
            ProfileShape::Cos | ProfileShape::Sin => 1,
            ProfileShape::Sawtooth => SAWTOOTH_HARMONICS[SAWTOOTH_HARMONICS.len() - 1],
        }
    }
}

/// Profile `g(x) = offset + (1 − |offset|)·shape(x)`; `|g| ≤ 1` whenever `|offset| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub shape: ProfileShape,
    pub offset: f64,
}

impl Profile {
    pub fn new(shape: ProfileShape) -> Self {
        Profile { shape, offset: 0.0 }
    }

    pub fn with_offset(shape: ProfileShape, offset: f64) -> Result<Self, GeometryError> {
        if !(-1.0..=1.0).contains(&offset) {
            return Err(GeometryError::InvalidProfileOffset(offset));
        }
        Ok(Profile { shape, offset })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.offset + (1.0 - self.offset.abs()) * self.shape.value(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (1.0 - self.offset.abs()) * self.shape.derivative(x)
    }

    /// `(sup|g|, sup|g'|)` over one period by dense sampling.
    fn sup_norms(&self) -> (f64, f64) {
        (0..PROFILE_SAMPLES)
            .map(|k| TAU * k as f64 / PROFILE_SAMPLES as f64)
            .fold((0.0_f64, 0.0_f64), |(v, d), x| {
                (v.max(self.value(x).abs()), d.max(self.derivative(x).abs()))
            })
    }
}

/// Spatial profile of a boundary displacement.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldShape {
    /// `h(θ) = ε·g(Nθ)`.
    Harmonic { profile: Profile, frequency: u32 },
    /// `h(θ) = ε` for boundary parameters in `[start, end)`, zero elsewhere.
    Window { start: f64, end: f64 },
}

/// Normal displacement `h` of a reference boundary, indexed by the boundary
/// parameter `θ`. Positive values displace outward.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationField {
    amplitude: f64,
    shape: FieldShape,
    sup_abs: f64,
    sup_grad: f64,
}

impl PerturbationField {
    pub fn harmonic(amplitude: f64, profile: Profile, frequency: u32) -> Self {
        let (g_sup, dg_sup) = profile.sup_norms();
        let frequency = if profile.shape == ProfileShape::Constant { 0 } else { frequency };
        PerturbationField {
            amplitude,
            shape: FieldShape::Harmonic { profile, frequency },
            sup_abs: amplitude.abs() * g_sup,
            sup_grad: amplitude.abs() * frequency as f64 * dg_sup,
        }
    }

    /// Uniform normal offset `h ≡ amplitude`.
    pub fn constant(amplitude: f64) -> Self {
        Self::harmonic(amplitude, Profile::new(ProfileShape::Constant), 0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Indicator displacement of one boundary arc; the jump makes `sup_grad` infinite.
    pub fn window(amplitude: f64, start: f64, end: f64) -> Self {
        PerturbationField {
            amplitude,
            shape: FieldShape::Window { start, end },
            sup_abs: amplitude.abs(),
            sup_grad: if amplitude == 0.0 { 0.0 } else { f64::INFINITY },
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn shape(&self) -> &FieldShape {
        &self.shape
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    /// `sup|dh/dθ|`; equals the arclength derivative on the unit circle.
    pub fn sup_grad(&self) -> f64 {
        self.sup_grad
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn value(&self, theta: f64) -> f64 {
        match &self.shape {
            FieldShape::Harmonic { profile, frequency } => {
                self.amplitude * profile.value(*frequency as f64 * theta)
            }
            FieldShape::Window { start, end } => {
                let t = theta.rem_euclid(TAU);
                if t >= *start && t < *end {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// `dh/dθ` (zero away from the jumps of a window field).
    pub fn derivative(&self, theta: f64) -> f64 {
        match &self.shape {
            FieldShape::Harmonic { profile, frequency } => {
                let n = *frequency as f64;
                self.amplitude * n * profile.derivative(n * theta)
            }
            FieldShape::Window { .. } => 0.0,
        }
    }

    /// Number of oscillations of `h` per turn (highest harmonic present).
    pub fn oscillations(&self) -> usize {
        match &self.shape {
            FieldShape::Harmonic { profile, frequency } => {
                *frequency as usize * profile.shape.max_harmonic() as usize
            }
            FieldShape::Window { .. } => 1,
        }
    }

    /// Same profile with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        PerturbationField {
            amplitude: self.amplitude * factor,
            shape: self.shape.clone(),
            sup_abs: self.sup_abs * factor.abs(),
            sup_grad: self.sup_grad * factor.abs(),
        }
    }
}

/// Regularity class of a perturbation family, encoded by how the oscillation
/// frequency grows as the amplitude shrinks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothnessClass {
    /// Fixed frequency: `sup|h'| = O(ε)`.
    Smooth { frequency: u32 },
    /// `N = ⌈ε^{−(1−α)}⌉`: `sup|h'| = Θ(ε^α)`.
    HolderC1a { alpha: f64 },
    /// `N = ⌈ε^{−1/2}⌉`: `sup|h'| = Θ(ε^{1/2}) = o(1)`.
    C1,
    /// `N = ⌈c/ε⌉`: `sup|h'| = Θ(1)`.
    Lipschitz { slope: f64 },
}

impl SmoothnessClass {
    /// Exponent `p` with `sup|h'_ε| = Θ(ε^p)`.
    pub fn gradient_exponent(&self) -> f64 {
        match self {
            SmoothnessClass::Smooth { .. } => 1.0,
            SmoothnessClass::HolderC1a { alpha } => *alpha,
            SmoothnessClass::C1 => 0.5,
            SmoothnessClass::Lipschitz { .. } => 0.0,
        }
    }

    pub fn frequency(&self, epsilon: f64) -> u32 {
        match self {
            SmoothnessClass::Smooth { frequency } => *frequency,
            SmoothnessClass::HolderC1a { alpha } => ceil_int(epsilon.powf(-(1.0 - alpha))),
            SmoothnessClass::C1 => ceil_int(epsilon.powf(-0.5)),
            SmoothnessClass::Lipschitz { slope } => ceil_int(slope / epsilon),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SmoothnessClass::Smooth { frequency } => format!("smooth(N={frequency})"),
            SmoothnessClass::HolderC1a { alpha } => format!("holder(alpha={alpha})"),
            SmoothnessClass::C1 => "c1".to_string(),
            SmoothnessClass::Lipschitz { slope } => format!("lipschitz(c={slope})"),
        }
    }
}

// Ceiling that ignores round-off just above an integer (1e-4^-0.5 = 100.00000000000001).
fn ceil_int(x: f64) -> u32 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u32
    } else {
        x.ceil() as u32
    }
}

/// Amplitude-indexed family `h_ε(θ) = ε·g(N(ε)θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationFamily {
    pub class: SmoothnessClass,
    pub profile: Profile,
}

impl PerturbationFamily {
    pub fn new(class: SmoothnessClass, profile: Profile) -> Result<Self, GeometryError> {
        match class {
            SmoothnessClass::HolderC1a { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                return Err(GeometryError::InvalidFamily(format!("alpha {alpha} not in (0, 1)")))
            }
            SmoothnessClass::Lipschitz { slope } if !(slope > 0.0 && slope.is_finite()) => {
                return Err(GeometryError::InvalidFamily(format!("slope {slope} must be positive")))
            }
            _ => {}
        }
        Ok(PerturbationFamily { class, profile })
    }

    pub fn frequency(&self, epsilon: f64) -> u32 {
        self.class.frequency(epsilon)
    }

    /// Oscillations per turn of `h_ε`, counting the profile's harmonics.
    pub fn oscillations(&self, epsilon: f64) -> usize {
        self.frequency(epsilon) as usize * self.profile.shape.max_harmonic() as usize
    }

    /// The member `h_ε`.
    ///
    /// # Panics
    /// If `epsilon` is not positive and finite.
    pub fn field(&self, epsilon: f64) -> PerturbationField {
        assert!(epsilon > 0.0 && epsilon.is_finite(), "amplitude must be positive, got {epsilon}");
        PerturbationField::harmonic(epsilon, self.profile, self.frequency(epsilon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_family(class: SmoothnessClass) -> PerturbationFamily {
        PerturbationFamily::new(class, Profile::new(ProfileShape::Cos)).unwrap()
    }

    #[test]
    fn c1_frequency_and_gradient() {
        let h = cos_family(SmoothnessClass::C1).field(1e-4);
        assert!(matches!(h.shape(), FieldShape::Harmonic { frequency: 100, .. }));
        assert!((h.sup_grad() - 1e-2).abs() < 1e-15);
        assert!(h.sup_abs() <= 1e-4 * (1.0 + 1e-12));
    }

    #[test]
    fn smooth_member_is_fixed_frequency() {
        let h = cos_family(SmoothnessClass::Smooth { frequency: 2 }).field(1e-2);
        assert!((h.value(0.3) - 1e-2 * (0.6f64).cos()).abs() < 1e-16);
        assert!((h.sup_grad() - 2e-2).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_gradient_is_order_one() {
        let h = cos_family(SmoothnessClass::Lipschitz { slope: 1.0 }).field(1e-2);
        assert!(matches!(h.shape(), FieldShape::Harmonic { frequency: 100, .. }));
        assert!((h.sup_grad() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holder_frequency_law() {
        let fam = cos_family(SmoothnessClass::HolderC1a { alpha: 0.25 });
        // 0.01^{-0.75} = 31.62...
        assert_eq!(fam.frequency(0.01), 32);
        assert!(PerturbationFamily::new(
            SmoothnessClass::HolderC1a { alpha: 1.0 },
            Profile::new(ProfileShape::Cos)
        )
        .is_err());
    }

    #[test]
    fn gradient_exponent_matches_class() {
        let classes = [
            SmoothnessClass::Smooth { frequency: 3 },
            SmoothnessClass::HolderC1a { alpha: 0.3 },
            SmoothnessClass::C1,
            SmoothnessClass::Lipschitz { slope: 0.5 },
        ];
        for class in classes {
            let fam = cos_family(class);
            let pts: Vec<(f64, f64)> = (4..14)
                .map(|k| {
                    let eps = 2f64.powi(-k);
                    (eps.ln(), fam.field(eps).sup_grad().ln())
                })
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            assert!(
                (slope - class.gradient_exponent()).abs() < 0.05,
                "{class:?}: slope {slope}"
            );
        }
    }

    #[test]
    fn sawtooth_profile_is_normalized() {
        let p = Profile::new(ProfileShape::Sawtooth);
        assert!((p.value(0.0) - 1.0).abs() < 1e-15);
        assert!((p.value(std::f64::consts::PI) + 1.0).abs() < 1e-15);
        let h = 1e-6;
        let fd = (p.value(0.7 + h) - p.value(0.7 - h)) / (2.0 * h);
        assert!((fd - p.derivative(0.7)).abs() < 1e-8);
    }

    #[test]
    fn offset_profile_stays_bounded() {
        let p = Profile::with_offset(ProfileShape::Cos, 0.25).unwrap();
        assert!((p.value(0.0) - 1.0).abs() < 1e-15);
        assert!((p.value(std::f64::consts::PI) + 0.5).abs() < 1e-15);
        assert!(Profile::with_offset(ProfileShape::Cos, 1.5).is_err());
    }

    #[test]
    fn window_field() {
        let h = PerturbationField::window(0.1, 1.0, 2.0);
        assert_eq!(h.value(1.5), 0.1);
        assert_eq!(h.value(2.5), 0.0);
        assert_eq!(h.value(1.5 + TAU), 0.1);
    }
}
