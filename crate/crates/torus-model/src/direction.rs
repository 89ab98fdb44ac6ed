//! Projective directions in RP^1: linear foliations of the torus.
//!
//! A direction with vector (x, y) corresponds to the boundary point x/y of
//! the upper half-plane. Directions arising as eigendirections of a single
//! matrix are kept exact in Q(sqrt(D)); directions estimated from walk
//! limits are unit f64 vectors with a tracked angular error bound.

use crate::halfplane::{Boundary, Geodesic};
use crate::{Sl2, TorusError};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use qfield::{GeomScalar, QuadVal, Sign};

#[derive(Debug, Clone)]
pub enum ProjDir {
    /// Exact direction vector with coordinates in a real quadratic field.
    Exact { x: QuadVal, y: QuadVal },
    /// Unit-normalized approximate direction with an angular error bound.
    Approx { x: f64, y: f64, err: f64 },
}

impl ProjDir {
    pub fn exact(x: QuadVal, y: QuadVal) -> Self {
        ProjDir::Exact { x, y }
    }

    pub fn approx(x: f64, y: f64, err: f64) -> Self {
        let n = (x * x + y * y).sqrt();
        ProjDir::Approx {
            x: x / n,
            y: y / n,
            err,
        }
    }

    pub fn to_f64_vector(&self) -> (f64, f64) {
        match self {
            ProjDir::Exact { x, y } => {
                let (a, b) = (x.to_f64(), y.to_f64());
                let n = (a * a + b * b).sqrt();
                (a / n, b / n)
            }
            ProjDir::Approx { x, y, .. } => (*x, *y),
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            ProjDir::Exact { .. } => 0.0,
            ProjDir::Approx { err, .. } => *err,
        }
    }

    /// Angle in RP^1, in [0, pi).
    pub fn angle(&self) -> f64 {
        let (x, y) = self.to_f64_vector();
        let a = y.atan2(x);
        let a = if a < 0.0 {
            a + std::f64::consts::PI
        } else {
            a
        };
        if a >= std::f64::consts::PI {
            a - std::f64::consts::PI
        } else {
            a
        }
    }

    /// Projective angular gap, in [0, pi/2].
    pub fn angular_gap(&self, other: &ProjDir) -> f64 {
        let d = (self.angle() - other.angle()).abs();
        d.min(std::f64::consts::PI - d)
    }

    /// The boundary point of the half-plane determined by this direction.
    pub fn boundary(&self) -> Boundary {
        match self {
            ProjDir::Exact { x, y } => {
                if matches!(y.sign().unwrap(), Sign::Zero) {
                    Boundary::Infinity
                } else {
                    Boundary::Real(x.div(y).to_f64())
                }
            }
            ProjDir::Approx { x, y, .. } => {
                if y.abs() < 1e-300 {
                    Boundary::Infinity
                } else {
                    Boundary::Real(x / y)
                }
            }
        }
    }

    /// Matrix action (column-vector convention).
    ///
    /// For approximate directions this is only meaningful for small relative
    /// matrices; the error bound is inflated by the squared matrix norm.
    pub fn act(&self, g: &Sl2) -> ProjDir {
        match self {
            ProjDir::Exact { x, y } => {
                let [a, b, c, d] = g.entries().map(big_to_quad);
                ProjDir::Exact {
                    x: a.mul(x).add(&b.mul(y)),
                    y: c.mul(x).add(&d.mul(y)),
                }
            }
            ProjDir::Approx { x, y, err } => {
                let m = g.to_f64_matrix();
                let nx = m[0] * x + m[1] * y;
                let ny = m[2] * x + m[3] * y;
                let norm_sq = m.iter().map(|v| v * v).sum::<f64>();
                ProjDir::approx(nx, ny, err * norm_sq)
            }
        }
    }

    /// Whether two directions are projectively equal (exactly, when both are
    /// exact; otherwise within combined error bounds plus `tol`).
    pub fn same_projective(&self, other: &ProjDir, tol: f64) -> bool {
        match (self, other) {
            (ProjDir::Exact { x: x1, y: y1 }, ProjDir::Exact { x: x2, y: y2 }) => {
                let cross = x1.mul(y2).sub(&x2.mul(y1));
                matches!(cross.sign().unwrap(), Sign::Zero)
            }
            _ => self.angular_gap(other) <= tol + self.err() + other.err(),
        }
    }

    /// Serialization: exact slope as "quad D p q r" meaning (p+q*sqrt(D))/r,
    /// "inf" for the horizontal direction, or "dec value err".
    pub fn serialize(&self) -> String {
        match self {
            ProjDir::Exact { x, y } => {
                if matches!(y.sign().unwrap(), Sign::Zero) {
                    "inf".to_string()
                } else {
                    let s = x.div(y);
                    format!("quad {} {} {} {}", s.d, s.p, s.q, s.r)
                }
            }
            ProjDir::Approx { x, y, err } => {
                if y.abs() < 1e-300 {
                    "inf".to_string()
                } else {
                    format!("dec {} {}", x / y, err)
                }
            }
        }
    }
}

fn big_to_quad(v: &BigInt) -> QuadVal {
    QuadVal::rational(v.clone(), BigInt::from(1))
}

/// Exact expanding and contracting eigendirections of a hyperbolic matrix.
/// Returns None for non-hyperbolic input.
pub fn eigen_directions(g: &Sl2) -> Option<(ProjDir, ProjDir)> {
    let [a, b, c, d] = g.entries();
    let t = a + d;
    let disc = &t * &t - BigInt::from(4);
    if disc <= BigInt::zero() {
        return None;
    }
    let disc_u = disc.to_u64()?;
    let sqrt_disc = QuadVal::sqrt_d(disc_u);
    let t_q = big_to_quad(&t);
    let two = QuadVal::from_int(2);
    // eigenvalues (t +- sqrt(disc)) / 2; the expanding one has |lambda| > 1
    let lam_plus = t_q.add(&sqrt_disc).div(&two);
    let lam_minus = t_q.sub(&sqrt_disc).div(&two);
    let (lam_exp, lam_con) = if t.is_negative() {
        (lam_minus, lam_plus)
    } else {
        (lam_plus, lam_minus)
    };
    let eigvec = |lam: &QuadVal| -> (QuadVal, QuadVal) {
        if !b.is_zero() {
            (big_to_quad(b), lam.sub(&big_to_quad(a)))
        } else if !c.is_zero() {
            (lam.sub(&big_to_quad(d)), big_to_quad(c))
        } else {
            // diagonal matrix: eigenvectors are the axes
            if lam.sub(&big_to_quad(a)).sign().unwrap() == Sign::Zero {
                (QuadVal::one(), QuadVal::zero())
            } else {
                (QuadVal::zero(), QuadVal::one())
            }
        }
    };
    let (ex, ey) = eigvec(&lam_exp);
    let (cx, cy) = eigvec(&lam_con);
    Some((ProjDir::Exact { x: ex, y: ey }, ProjDir::Exact { x: cx, y: cy }))
}

/// The Teichmueller geodesic determined by a transverse pair of directions:
/// endpoints are the boundary points of the two directions.
pub fn geodesic_of(f_plus: &ProjDir, f_minus: &ProjDir) -> Result<Geodesic, TorusError> {
    if f_plus.same_projective(f_minus, 0.0) {
        return Err(TorusError::DegenerateFoliations);
    }
    Geodesic::new(f_plus.boundary(), f_minus.boundary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfplane::{mobius_act, TeichPoint};

    fn g21() -> Sl2 {
        Sl2::from_i64([2, 1, 1, 1]).unwrap()
    }

    #[test]
    fn horizontal_vertical_give_imaginary_axis() {
        let h = ProjDir::exact(QuadVal::one(), QuadVal::zero());
        let v = ProjDir::exact(QuadVal::zero(), QuadVal::one());
        let gamma = geodesic_of(&h, &v).unwrap();
        assert!(gamma.same_set(
            &Geodesic::new(Boundary::Infinity, Boundary::Real(0.0)).unwrap(),
            0.0
        ));
        // swapped arguments give the same geodesic set
        let gamma2 = geodesic_of(&v, &h).unwrap();
        assert!(gamma.same_set(&gamma2, 0.0));
    }

    #[test]
    fn coincident_directions_rejected() {
        let h = ProjDir::exact(QuadVal::one(), QuadVal::zero());
        let h2 = ProjDir::exact(QuadVal::from_int(-3), QuadVal::zero());
        assert!(matches!(
            geodesic_of(&h, &h2),
            Err(TorusError::DegenerateFoliations)
        ));
    }

    #[test]
    fn eigen_directions_are_fixed_by_action() {
        let g = g21();
        let (e, c) = eigen_directions(&g).unwrap();
        assert!(e.act(&g).same_projective(&e, 0.0));
        assert!(c.act(&g).same_projective(&c, 0.0));
        // expanding slope is the golden ratio
        match e.boundary() {
            Boundary::Real(v) => assert!((v - (1.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-12),
            _ => panic!("expected finite slope"),
        }
    }

    #[test]
    fn eigen_geodesic_passes_through_fixed_point_of_action() {
        // fixed-point oracle: solve c z^2 + (d-a) z - b = 0 over the reals
        // and check the axis contains the projection-invariant point set.
        let g = g21();
        let (e, c) = eigen_directions(&g).unwrap();
        let gamma = geodesic_of(&e, &c).unwrap();
        // Moebius fixed boundary points of g: roots of z^2 - z - 1
        let r1 = (1.0 + 5.0f64.sqrt()) / 2.0;
        let r2 = (1.0 - 5.0f64.sqrt()) / 2.0;
        let oracle = Geodesic::new(Boundary::Real(r1), Boundary::Real(r2)).unwrap();
        assert!(gamma.same_set(&oracle, 1e-12));
        // points of the axis are permuted by g: check the foot of the base
        let z = gamma.project(TeichPoint::base());
        let gz = mobius_act(&g, z);
        assert!(gamma.contains(gz, 1e-9));
    }

    #[test]
    fn exact_serialization_shape() {
        let (e, _) = eigen_directions(&g21()).unwrap();
        let s = e.serialize();
        assert!(s.starts_with("quad 5 "), "{s}");
    }

    #[test]
    fn non_hyperbolic_has_no_eigendirections() {
        assert!(eigen_directions(&Sl2::from_i64([1, 1, 0, 1]).unwrap()).is_none());
        assert!(eigen_directions(&Sl2::from_i64([0, -1, 1, 0]).unwrap()).is_none());
    }
}
