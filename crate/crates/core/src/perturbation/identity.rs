//! The conversion `λ⁻²(μ − λ − (μ−λ)²/μ) = λ⁻¹ − μ⁻¹` between inverse-operator
//! eigenvalue differences and eigenvalue differences, evaluated in double-double
//! arithmetic so that it holds to working precision even when `μ ≈ λ`.

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(q2)).neg());
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2).add(Dd::from(q3))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `λ⁻²(μ − λ − (μ−λ)²/μ)`, which equals `λ⁻¹ − μ⁻¹` exactly.
///
/// # Panics
/// If `λ` or `μ` is not positive and finite, or if the two sides disagree by
/// more than `10⁻¹⁴` relative.
pub fn operator_identity(lambda: f64, mu: f64) -> f64 {
    assert!(
        lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite(),
        "operator identity needs positive finite arguments, got ({lambda}, {mu})"
    );
    let (l, m) = (Dd::from(lambda), Dd::from(mu));
    let diff = two_sum(mu, -lambda);
    let lhs = diff.add(diff.mul(diff).div(m).neg()).div(l.mul(l));
    let rhs = diff.div(l.mul(m));
    let (a, b) = (lhs.to_f64(), rhs.to_f64());
    assert!(
        (a - b).abs() <= 1e-14 * b.abs(),
        "conversion identity violated: {a} vs {b}"
    );
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_arguments_give_zero() {
        assert_eq!(operator_identity(3.7, 3.7), 0.0);
    }

    #[test]
    fn two_and_three() {
        assert!((operator_identity(2.0, 3.0) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn thousand_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let l: f64 = rng.random_range(0.1..100.0);
            let m: f64 = rng.random_range(0.1..100.0);
            let exact = 1.0 / l - 1.0 / m;
            // plain arithmetic is accurate unless the difference cancels
            let reference = (m - l) / (l * m);
            let got = operator_identity(l, m);
            worst = worst.max((got - reference).abs() / reference.abs().max(exact.abs()));
        }
        assert!(worst < 1e-13, "{worst}");
    }

    #[test]
    fn double_double_division() {
        let q = Dd::from(1.0).div(Dd::from(3.0));
        let back = q.mul(Dd::from(3.0)).add(Dd::from(-1.0));
        assert!(back.to_f64().abs() < 1e-31);
    }

    proptest! {
        #[test]
        fn antisymmetric(l in 0.1f64..100.0, m in 0.1f64..100.0) {
            let a = operator_identity(l, m);
            let b = operator_identity(m, l);
            prop_assert!((a + b).abs() <= 1e-14 * a.abs().max(1e-300));
        }

        #[test]
        fn near_coincident_pairs(l in 0.1f64..100.0, rel in -1e-9f64..1e-9) {
            let m = l * (1.0 + rel);
            let got = operator_identity(l, m);
            let reference = (m - l) / (l * m);
            prop_assert!((got - reference).abs() <= 1e-13 * reference.abs().max(1e-300));
        }
    }
}
