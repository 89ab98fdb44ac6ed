//! Per-fiber flat data: foliation directions and the transverse-measure
//! scale pinned by a point of the Teichmueller geodesic.

use crate::PartitionError;
use num_bigint::BigInt;
use qfield::{GeomScalar, QuadVal, Sign};
use torus_model::direction::eigen_directions;
use torus_model::halfplane::TeichPoint;
use torus_model::{ProjDir, Sl2};

/// Foliation frame at one fiber.
///
/// `u_plus`, `u_minus` are direction vectors with det[u_plus, u_minus] > 0;
/// any scaling is allowed because every derived quantity is expressed in
/// the matching parameter units. `m_plus_sq` is the square of the scale of
/// the expanding foliation's transverse measure against the stored vector:
/// mu_plus(w) = m_+ |det[u_plus, w]| with m_+^2 = y / ((p+qx)^2 + (qy)^2)
/// at the anchor x+iy for u_plus = (p, q). Unit area forces
/// m_- = 1/(m_+ det).
#[derive(Debug, Clone)]
pub struct FiberFrame<S: GeomScalar> {
    pub u_plus: [S; 2],
    pub u_minus: [S; 2],
    pub m_plus_sq: S,
}

impl<S: GeomScalar> FiberFrame<S> {
    pub fn det(&self) -> S {
        self.u_plus[0]
            .mul(&self.u_minus[1])
            .sub(&self.u_minus[0].mul(&self.u_plus[1]))
    }

    /// m_-^2 from unit area: m_- = 1 / (m_+ det).
    pub fn m_minus_sq(&self) -> S {
        let d = self.det();
        S::one().div(&self.m_plus_sq.mul(&d).mul(&d))
    }

    /// tau' parameter half-range squared: mu_minus(xi u_plus) = xi / m_+,
    /// so measure 1 is reached at xi = m_+.
    pub fn tau_reach_sq(&self) -> S {
        self.m_plus_sq.clone()
    }

    /// Lattice vector (m1, m2) in oblique coordinates: solve
    /// xi u_plus + upsilon u_minus = m.
    pub fn lattice_coords(&self, m1: i64, m2: i64) -> (S, S) {
        let det = self.det();
        let m1 = S::from_i64(m1);
        let m2 = S::from_i64(m2);
        let xi = m1.mul(&self.u_minus[1]).sub(&m2.mul(&self.u_minus[0])).div(&det);
        let up = m2.mul(&self.u_plus[0]).sub(&m1.mul(&self.u_plus[1])).div(&det);
        (xi, up)
    }

    /// Oblique coordinates of a point given in standard torus coordinates.
    pub fn to_oblique(&self, x: S, y: S) -> (S, S) {
        let det = self.det();
        let xi = x.mul(&self.u_minus[1]).sub(&y.mul(&self.u_minus[0])).div(&det);
        let up = y.mul(&self.u_plus[0]).sub(&x.mul(&self.u_plus[1])).div(&det);
        (xi, up)
    }

    /// Horizontal (mu_minus) length of a xi-extent, as f64 for reports.
    pub fn h_length(&self, xi_extent: &S) -> f64 {
        xi_extent.to_f64().abs() / self.m_plus_sq.to_f64().sqrt()
    }

    /// Vertical (mu_plus) length of an upsilon-extent, as f64 for reports.
    pub fn v_length(&self, up_extent: &S) -> f64 {
        up_extent.to_f64().abs() * self.m_plus_sq.to_f64().sqrt() * self.det().to_f64()
    }
}

/// Exact frame from the eigendirections of a hyperbolic matrix and a point
/// (x, y) on its axis with coordinates in the same quadratic field.
///
/// m_+^2 = y / ((p + q x)^2 + q^2 y^2) for the unnormalized direction
/// (p, q); the direction is stored unnormalized and the scale is expressed
/// against it, so everything stays in the field.
pub fn exact_frame_from_matrix(
    g: &Sl2,
    axis_point: (QuadVal, QuadVal),
) -> Result<FiberFrame<QuadVal>, PartitionError> {
    let (expanding, contracting) = eigen_directions(g).ok_or_else(|| {
        PartitionError::DegenerateDirections("matrix is not hyperbolic".into())
    })?;
    let (px, py) = match expanding {
        ProjDir::Exact { x, y } => (x, y),
        _ => unreachable!(),
    };
    let (mx, my) = match contracting {
        ProjDir::Exact { x, y } => (x, y),
        _ => unreachable!(),
    };
    exact_frame(&[px, py], &[mx, my], axis_point)
}

/// Exact frame from direction vectors and a half-plane point in the field.
pub fn exact_frame(
    u_plus: &[QuadVal; 2],
    u_minus: &[QuadVal; 2],
    z: (QuadVal, QuadVal),
) -> Result<FiberFrame<QuadVal>, PartitionError> {
    let (zx, zy) = z;
    if !matches!(zy.sign()?, Sign::Pos) {
        return Err(PartitionError::DegenerateDirections(
            "anchor not in the upper half-plane".into(),
        ));
    }
    // orient: det[u_plus, u_minus] > 0
    let mut um = u_minus.clone();
    let det = u_plus[0].mul(&um[1]).sub(&um[0].mul(&u_plus[1]));
    match det.sign()? {
        Sign::Zero => {
            return Err(PartitionError::DegenerateDirections(
                "directions coincide".into(),
            ))
        }
        Sign::Neg => {
            um[0] = um[0].neg();
            um[1] = um[1].neg();
        }
        Sign::Pos => {}
    }
    // m_+^2 = y / ((p + q x)^2 + (q y)^2) with (p, q) = u_plus
    let (p, q) = (u_plus[0].clone(), u_plus[1].clone());
    let t = p.add(&q.mul(&zx));
    let qy = q.mul(&zy);
    let denom = t.mul(&t).add(&qy.mul(&qy));
    let m_plus_sq = zy.div(&denom);
    Ok(FiberFrame {
        u_plus: u_plus.clone(),
        u_minus: um,
        m_plus_sq,
    })
}

/// Rational point on the axis of a hyperbolic matrix close to the foot of
/// the base point i, with coordinates in the eigenvalue field: the axis
/// endpoints are conjugate, so with c the center and r^2 the squared
/// radius, points (c + r(1-t^2)/(1+t^2), 2rt/(1+t^2)) for rational t lie in
/// the field because r = (beta - beta')/2 is q*sqrt(D)/s.
pub fn axis_point_near_foot(g: &Sl2) -> Result<(QuadVal, QuadVal), PartitionError> {
    let (expanding, contracting) = eigen_directions(g).ok_or_else(|| {
        PartitionError::DegenerateDirections("matrix is not hyperbolic".into())
    })?;
    let slope = |d: &ProjDir| -> Result<QuadVal, PartitionError> {
        match d {
            ProjDir::Exact { x, y } => {
                if matches!(y.sign()?, Sign::Zero) {
                    Err(PartitionError::DegenerateDirections(
                        "axis endpoint at infinity unsupported in exact mode".into(),
                    ))
                } else {
                    Ok(x.div(y))
                }
            }
            _ => unreachable!(),
        }
    };
    let b1 = slope(&expanding)?;
    let b2 = slope(&contracting)?;
    let two = QuadVal::from_int(2);
    let center = b1.add(&b2).div(&two);
    let radius = b1.sub(&b2).div(&two).abs(); // in the field: conjugate pair
    // foot of i on the semicircle, in floats, then a nearby rational t
    let c_f = center.to_f64();
    let r_f = radius.to_f64();
    let u = -c_f;
    let rho_sq = u * u + 1.0;
    let cos_phi = 2.0 * r_f * u / (rho_sq + r_f * r_f);
    let sin_phi = (1.0 - cos_phi * cos_phi).max(1e-18).sqrt();
    // parameter t with cos = (1-t^2)/(1+t^2), sin = 2t/(1+t^2)
    let t_f = sin_phi / (1.0 + cos_phi);
    let t = rational_approx(t_f, 1_000_000);
    let t_q = QuadVal::rational(BigInt::from(t.0), BigInt::from(t.1));
    let one = QuadVal::one();
    let denom = one.add(&t_q.mul(&t_q));
    let x = center.add(&radius.mul(&one.sub(&t_q.mul(&t_q))).div(&denom));
    let y = radius.mul(&two).mul(&t_q).div(&denom);
    Ok((x, y))
}

fn rational_approx(x: f64, max_den: i64) -> (i64, i64) {
    // continued fractions
    let mut a = x;
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, a.floor() as i64, 1i64);
    a -= a.floor();
    for _ in 0..40 {
        if a.abs() < 1e-15 || q1 > max_den {
            break;
        }
        a = 1.0 / a;
        let fl = a.floor();
        a -= fl;
        let (p2, q2) = (fl as i64 * p1 + p0, fl as i64 * q1 + q0);
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    (p1, q1.max(1))
}

/// Float frame from estimated directions and a half-plane anchor.
pub fn approx_frame(
    dir_plus: &ProjDir,
    dir_minus: &ProjDir,
    anchor: TeichPoint,
    tol: f64,
) -> Result<FiberFrame<qfield::Fuzzy>, PartitionError> {
    use qfield::Fuzzy;
    let (px, py) = dir_plus.to_f64_vector();
    let (mx0, my0) = dir_minus.to_f64_vector();
    let det = px * my0 - mx0 * py;
    if det.abs() < 1e-6 {
        return Err(PartitionError::DegenerateDirections(format!(
            "near-parallel directions (det {det})"
        )));
    }
    let (mx, my) = if det > 0.0 { (mx0, my0) } else { (-mx0, -my0) };
    let t = px + py * anchor.x;
    let qy = py * anchor.y;
    let m_plus_sq = anchor.y / (t * t + qy * qy);
    let f = |v: f64| Fuzzy::with_tol(v, tol);
    Ok(FiberFrame {
        u_plus: [f(px), f(py)],
        u_minus: [f(mx), f(my)],
        m_plus_sq: f(m_plus_sq),
    })
}

/// Rationality guard for float directions: reject directions within `tol`
/// of a rational p/q with small denominator (the arc construction would
/// close up and the complement would not be a birectangle family).
pub fn check_irrational(dir: &ProjDir, max_den: i64, tol: f64) -> Result<(), PartitionError> {
    let (x, y) = dir.to_f64_vector();
    if y.abs() < tol {
        return Err(PartitionError::DegenerateDirections(
            "horizontal rational direction".into(),
        ));
    }
    let slope = x / y;
    let (p, q) = rational_approx(slope, max_den);
    if (slope - p as f64 / q as f64).abs() < tol {
        return Err(PartitionError::DegenerateDirections(format!(
            "direction within {tol} of rational {p}/{q}"
        )));
    }
    Ok(())
}
