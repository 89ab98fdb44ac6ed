//! Upper half-plane geometry: the Teichmueller space of unit-area flat tori.
//!
//! Distances returned by `teich_distance` use the convention d_T = d_hyp / 2.

use crate::{Sl2, TorusError};

/// Marked flat torus, as a point x + iy of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeichPoint {
    pub x: f64,
    pub y: f64,
}

impl TeichPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, TorusError> {
        if !(y > 0.0) || !x.is_finite() {
            return Err(TorusError::NotInUpperHalfPlane);
        }
        Ok(TeichPoint { x, y })
    }

    /// The square torus, the default base point.
    pub fn base() -> Self {
        TeichPoint { x: 0.0, y: 1.0 }
    }
}

/// Boundary point of the half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Real(f64),
    Infinity,
}

impl Boundary {
    pub fn approx_eq(&self, other: &Boundary, tol: f64) -> bool {
        match (self, other) {
            (Boundary::Infinity, Boundary::Infinity) => true,
            (Boundary::Real(a), Boundary::Real(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }
}

/// Hyperbolic distance, stable for nearby points.
pub fn hyp_distance(z1: TeichPoint, z2: TeichPoint) -> f64 {
    let dx = z1.x - z2.x;
    let dy = z1.y - z2.y;
    let u = (dx * dx + dy * dy) / (2.0 * z1.y * z2.y);
    // arccosh(1+u) without cancellation
    (1.0 + u + (u * (u + 2.0)).sqrt()).ln()
}

/// Teichmueller distance between flat tori: half the hyperbolic distance.
pub fn teich_distance(z1: TeichPoint, z2: TeichPoint) -> f64 {
    0.5 * hyp_distance(z1, z2)
}

/// Moebius action z -> (az+b)/(cz+d). Exact determinant 1 keeps the image in
/// the upper half-plane; the matrix may be huge (entries are rescaled).
pub fn mobius_act(g: &Sl2, z: TeichPoint) -> TeichPoint {
    let (m, _) = g.to_scaled_matrix();
    mobius_act_f64(&m, z)
}

/// Moebius action by an arbitrary positively-oriented real matrix.
pub fn mobius_act_f64(m: &[f64; 4], z: TeichPoint) -> TeichPoint {
    let [a, b, c, d] = *m;
    let e = c * z.x + d;
    let f = c * z.y;
    let den = e * e + f * f;
    let x = ((a * z.x + b) * e + a * z.y * f) / den;
    let y = (a * d - b * c) * z.y / den;
    TeichPoint { x, y }
}

/// Distance from a base point to its image under a (possibly huge) matrix,
/// via the conjugated Frobenius norm: cosh d_hyp(z, Mz) = ||T^-1 M T||_F^2 / 2
/// where T maps i to z. Returns the Teichmueller distance (half of d_hyp).
pub fn teich_dist_to_image(g: &Sl2, z: TeichPoint) -> f64 {
    let (m, exp) = g.to_scaled_matrix();
    let [a, b, c, d] = m;
    let (x, y) = (z.x, z.y);
    // N = T^{-1} M T, det-preserving conjugation
    let n11 = a - x * c;
    let n12 = (a * x + b - x * (c * x + d)) / y;
    let n21 = c * y;
    let n22 = c * x + d;
    let norm_sq = n11 * n11 + n12 * n12 + n21 * n21 + n22 * n22;
    // true value: norm_sq * 2^(2*exp); cosh d = that / 2 (det of N is 1)
    let ln_norm_sq = norm_sq.ln() + 2.0 * exp as f64 * std::f64::consts::LN_2;
    0.5 * acosh_from_ln(ln_norm_sq - std::f64::consts::LN_2)
}

/// arccosh(exp(ln_x)) given ln_x >= 0, stable across magnitudes.
fn acosh_from_ln(ln_x: f64) -> f64 {
    if ln_x > 40.0 {
        // x huge: arccosh(x) = ln(2x) - O(1/x^2)
        ln_x + std::f64::consts::LN_2
    } else {
        let x = ln_x.exp();
        if x < 1.0 {
            0.0 // guard tiny negative rounding below cosh(0)
        } else {
            x.acosh()
        }
    }
}

/// A complete geodesic of the upper half-plane, by its boundary endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub e1: Boundary,
    pub e2: Boundary,
}

impl Geodesic {
    pub fn new(e1: Boundary, e2: Boundary) -> Result<Self, TorusError> {
        if e1.approx_eq(&e2, 0.0) {
            return Err(TorusError::DegenerateFoliations);
        }
        Ok(Geodesic { e1, e2 })
    }

    /// Same geodesic regardless of endpoint order.
    pub fn same_set(&self, other: &Geodesic, tol: f64) -> bool {
        (self.e1.approx_eq(&other.e1, tol) && self.e2.approx_eq(&other.e2, tol))
            || (self.e1.approx_eq(&other.e2, tol) && self.e2.approx_eq(&other.e1, tol))
    }

    pub fn contains(&self, z: TeichPoint, tol: f64) -> bool {
        match (self.e1, self.e2) {
            (Boundary::Infinity, Boundary::Real(a)) | (Boundary::Real(a), Boundary::Infinity) => {
                (z.x - a).abs() <= tol
            }
            (Boundary::Real(a), Boundary::Real(b)) => {
                let c = 0.5 * (a + b);
                let r = 0.5 * (a - b).abs();
                ((z.x - c).powi(2) + z.y * z.y - r * r).abs() <= tol * r.max(1.0)
            }
            _ => false,
        }
    }

    /// Hyperbolic foot-point of z on the geodesic.
    pub fn project(&self, z: TeichPoint) -> TeichPoint {
        match (self.e1, self.e2) {
            (Boundary::Infinity, Boundary::Real(a)) | (Boundary::Real(a), Boundary::Infinity) => {
                // vertical line x = a
                let r = ((z.x - a).powi(2) + z.y * z.y).sqrt();
                TeichPoint { x: a, y: r }
            }
            (Boundary::Real(a), Boundary::Real(b)) => {
                let c = 0.5 * (a + b);
                let r = 0.5 * (a - b).abs();
                let u = z.x - c;
                let rho_sq = u * u + z.y * z.y;
                let cos_phi = 2.0 * r * u / (rho_sq + r * r);
                let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
                TeichPoint {
                    x: c + r * cos_phi,
                    y: (r * sin_phi).max(f64::MIN_POSITIVE),
                }
            }
            _ => unreachable!("degenerate geodesic"),
        }
    }
}

/// Low-position point tracked in log scale: x + i*exp(ln_y). Used for orbit
/// points that collapse toward the boundary exponentially fast.
#[derive(Debug, Clone, Copy)]
pub struct LogPoint {
    pub x: f64,
    pub ln_y: f64,
}

impl LogPoint {
    pub fn from_point(z: TeichPoint) -> Self {
        LogPoint {
            x: z.x,
            ln_y: z.y.ln(),
        }
    }

    /// Moebius action by a small matrix, staying in log scale.
    pub fn mobius_f64(&self, m: &[f64; 4]) -> LogPoint {
        let [a, b, c, d] = *m;
        let det = a * d - b * c;
        if self.ln_y > -30.0 {
            let z = TeichPoint {
                x: self.x,
                y: self.ln_y.exp(),
            };
            let w = mobius_act_f64(m, z);
            LogPoint {
                x: w.x,
                ln_y: w.y.ln(),
            }
        } else {
            let e = c * self.x + d;
            let e = if e.abs() < 1e-12 {
                1e-12f64.copysign(if e == 0.0 { 1.0 } else { e })
            } else {
                e
            };
            LogPoint {
                x: (a * self.x + b) / e,
                ln_y: self.ln_y + det.ln() - 2.0 * e.abs().ln(),
            }
        }
    }

    /// Teichmueller distance to a moderate point, stable when ln_y is very
    /// negative.
    pub fn teich_distance_to(&self, z: TeichPoint) -> f64 {
        if self.ln_y > -30.0 {
            let w = TeichPoint {
                x: self.x,
                y: self.ln_y.exp(),
            };
            teich_distance(w, z)
        } else {
            // u = |z1-z2|^2/(2 y1 y2) is astronomically large;
            // d_hyp = ln(2u) + O(1/u)
            let dx = self.x - z.x;
            let num = dx * dx + z.y * z.y; // (y1 - y2)^2 ~ y2^2
            let ln_u = num.ln() - std::f64::consts::LN_2 - self.ln_y - z.y.ln();
            0.5 * (ln_u + std::f64::consts::LN_2)
        }
    }
}
