//! The exactly computable surface model: unimodular 2x2 integer matrices
//! acting on torus curves (integer pairs), on directions in RP^1 (linear
//! foliations), and on the hyperbolic upper half-plane (the Teichmueller
//! space of unit-area flat tori).
//!
//! Conventions, fixed once and used everywhere:
//! - a matrix acts on curve classes and direction vectors as a column vector,
//!   and on the upper half-plane by the Moebius map z -> (az+b)/(cz+d);
//! - the direction with vector (x, y) corresponds to the boundary point x/y
//!   of the half-plane (y = 0 gives infinity), which makes both actions
//!   agree: boundary limits of walks land on expanding eigendirections;
//! - the Teichmueller metric is half the hyperbolic metric.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use qfield::ln_bigint_abs;
use thiserror::Error;
use walk_engine::{Canonical, Group};

pub mod direction;
pub mod halfplane;
pub mod limits;

pub use direction::ProjDir;
pub use halfplane::{Boundary, Geodesic, LogPoint, TeichPoint};

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("matrix determinant must be 1, got {0}")]
    Determinant(BigInt),
    #[error("degenerate foliation pair: directions coincide")]
    DegenerateFoliations,
    #[error("boundary limit not converged: angular gap {gap} exceeds tolerance {tol}")]
    NotConverged { gap: f64, tol: f64 },
    #[error("point not in the upper half-plane")]
    NotInUpperHalfPlane,
}

/// An element of the torus mapping class group: an integer matrix with
/// determinant 1, stored in a canonical projective form (the first nonzero
/// entry of (a, b, c, d) is positive).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sl2 {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl Sl2 {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self, TorusError> {
        let det = &a * &d - &b * &c;
        if det != BigInt::from(1) {
            return Err(TorusError::Determinant(det));
        }
        Ok(Sl2 { a, b, c, d }.canonicalized())
    }

    pub fn from_i64(m: [i64; 4]) -> Result<Self, TorusError> {
        Self::new(
            BigInt::from(m[0]),
            BigInt::from(m[1]),
            BigInt::from(m[2]),
            BigInt::from(m[3]),
        )
    }

    fn canonicalized(mut self) -> Self {
        let flip = if !self.a.is_zero() {
            self.a.is_negative()
        } else if !self.b.is_zero() {
            self.b.is_negative()
        } else if !self.c.is_zero() {
            self.c.is_negative()
        } else {
            self.d.is_negative()
        };
        if flip {
            self.a = -self.a.clone();
            self.b = -self.b.clone();
            self.c = -self.c.clone();
            self.d = -self.d.clone();
        }
        self
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > BigInt::from(2)
    }

    /// Matrix entries as f64; only valid for small matrices (e.g. walk
    /// increments). Asserts against silent overflow.
    pub fn to_f64_matrix(&self) -> [f64; 4] {
        let max_bits = self.entries().iter().map(|e| e.bits()).max().unwrap_or(0);
        assert!(max_bits < 500, "matrix too large for direct f64 conversion");
        [
            self.a.to_f64().unwrap(),
            self.b.to_f64().unwrap(),
            self.c.to_f64().unwrap(),
            self.d.to_f64().unwrap(),
        ]
    }

    /// Mantissa matrix and shared power-of-two exponent: entries = m * 2^exp.
    pub fn to_scaled_matrix(&self) -> ([f64; 4], i64) {
        let max_bits = self.entries().iter().map(|e| e.bits()).max().unwrap_or(0);
        let shift = max_bits.saturating_sub(300);
        let conv = |e: &BigInt| (e >> shift).to_f64().unwrap();
        (
            [conv(&self.a), conv(&self.b), conv(&self.c), conv(&self.d)],
            shift as i64,
        )
    }

    /// Frobenius norm squared, exact.
    pub fn frobenius_sq(&self) -> BigInt {
        &self.a * &self.a + &self.b * &self.b + &self.c * &self.c + &self.d * &self.d
    }

    /// ln of the Frobenius norm squared (accurate for huge entries).
    pub fn ln_frobenius_sq(&self) -> f64 {
        ln_bigint_abs(&self.frobenius_sq())
    }

    /// Translation length on the Teichmueller space of the torus
    /// (half the hyperbolic translation length): log of the top eigenvalue
    /// magnitude. Zero for non-hyperbolic elements.
    pub fn translation_length(&self) -> f64 {
        let t = self.trace().abs().to_f64().unwrap_or(f64::INFINITY);
        if t <= 2.0 {
            0.0
        } else {
            (t / 2.0).acosh()
        }
    }
}

impl Group for Sl2 {
    fn identity() -> Self {
        Sl2::from_i64([1, 0, 0, 1]).unwrap()
    }

    fn compose(&self, other: &Self) -> Self {
        Sl2 {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
        .canonicalized()
    }

    fn invert(&self) -> Self {
        Sl2 {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
        .canonicalized()
    }
}

impl Canonical for Sl2 {
    fn canonical_string(&self) -> String {
        format!("{} {} {} {}", self.a, self.b, self.c, self.d)
    }
}

/// A weighted multicurve on the torus: an integer pair, primitive pairs
/// being simple closed curves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Curve {
    pub p: BigInt,
    pub q: BigInt,
}

impl Curve {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        Curve {
            p: p.into(),
            q: q.into(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn gcd(&self) -> BigInt {
        num_integer::Integer::gcd(&self.p, &self.q)
    }

    /// ln of the Euclidean norm (length proxy), accurate for huge entries.
    pub fn ln_norm(&self) -> f64 {
        let n2 = &self.p * &self.p + &self.q * &self.q;
        0.5 * ln_bigint_abs(&n2)
    }
}

/// Matrix-vector action of a mapping class on a curve.
pub fn act_on_curve(g: &Sl2, c: &Curve) -> Curve {
    Curve {
        p: &g.a * &c.p + &g.b * &c.q,
        q: &g.c * &c.p + &g.d * &c.q,
    }
}

/// Geometric intersection number of two torus multicurves: |p1 q2 - p2 q1|.
pub fn intersection_number(c1: &Curve, c2: &Curve) -> BigInt {
    (&c1.p * &c2.q - &c2.p * &c1.q).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g21() -> Sl2 {
        Sl2::from_i64([2, 1, 1, 1]).unwrap()
    }

    /// Random unimodular matrix as a word in the elementary generators.
    pub(crate) fn random_sl2(rng: &mut impl Rng) -> Sl2 {
        let l = Sl2::from_i64([1, 0, 1, 1]).unwrap();
        let r = Sl2::from_i64([1, 1, 0, 1]).unwrap();
        let mut m = Sl2::identity();
        for _ in 0..rng.gen_range(1..12) {
            let pick = match rng.gen_range(0..4) {
                0 => l.clone(),
                1 => l.invert(),
                2 => r.clone(),
                _ => r.invert(),
            };
            m = m.compose(&pick);
        }
        m
    }

    #[test]
    fn determinant_validation() {
        assert!(Sl2::from_i64([1, 0, 0, 2]).is_err());
        assert!(Sl2::from_i64([2, 1, 1, 1]).is_ok());
    }

    #[test]
    fn group_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let g = random_sl2(&mut rng);
            let h = random_sl2(&mut rng);
            let k = random_sl2(&mut rng);
            assert_eq!(Sl2::identity().compose(&g), g);
            assert_eq!(g.compose(&g.invert()), Sl2::identity());
            assert_eq!(g.compose(&h).compose(&k), g.compose(&h.compose(&k)));
        }
    }

    #[test]
    fn canonical_form_sign() {
        // -I and I canonicalize to the same element
        let m = Sl2 {
            a: BigInt::from(-1),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::from(-1),
        }
        .canonicalized();
        assert_eq!(m, Sl2::identity());
    }

    #[test]
    fn act_on_curve_examples() {
        let c = Curve::new(1, 0);
        assert_eq!(act_on_curve(&Sl2::identity(), &c), c);
        assert_eq!(act_on_curve(&g21(), &c), Curve::new(2, 1));
    }

    #[test]
    fn action_preserves_gcd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let g = random_sl2(&mut rng);
            let c = Curve::new(rng.gen_range(-30i64..30), rng.gen_range(-30i64..30));
            if c.is_zero() {
                continue;
            }
            let gc = act_on_curve(&g, &c);
            assert_eq!(c.gcd(), gc.gcd());
        }
    }

    #[test]
    fn intersection_number_examples() {
        assert_eq!(
            intersection_number(&Curve::new(1, 0), &Curve::new(0, 1)),
            BigInt::from(1)
        );
        assert_eq!(
            intersection_number(&Curve::new(1, 0), &Curve::new(1, 0)),
            BigInt::zero()
        );
    }

    #[test]
    fn intersection_number_is_action_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let g = random_sl2(&mut rng);
            let c1 = Curve::new(rng.gen_range(-20i64..20), rng.gen_range(-20i64..20));
            let c2 = Curve::new(rng.gen_range(-20i64..20), rng.gen_range(-20i64..20));
            let lhs = intersection_number(&act_on_curve(&g, &c1), &act_on_curve(&g, &c2));
            assert_eq!(lhs, intersection_number(&c1, &c2));
        }
    }

    #[test]
    fn deterministic_growth_rate_is_log_perron() {
        // (1/n) log ||omega_n^{-1} alpha|| -> log((3+sqrt(5))/2) for any
        // primitive alpha under the deterministic hyperbolic walk.
        let g = g21();
        let target = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        for alpha in [
            Curve::new(1, 0),
            Curve::new(0, 1),
            Curve::new(1, 1),
            Curve::new(2, -3),
            Curve::new(5, 7),
        ] {
            let mut v = alpha.clone();
            let ginv = g.invert();
            let n = 120;
            for _ in 0..n {
                v = act_on_curve(&ginv, &v);
            }
            let rate = v.ln_norm() / n as f64;
            assert!(
                (rate - target).abs() < 2e-2,
                "alpha {alpha:?}: rate {rate} vs {target}"
            );
        }
    }

    #[test]
    fn translation_length_of_preset() {
        let t = g21().translation_length();
        let expected = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert!((t - expected).abs() < 1e-12);
    }
}
