use crate::{GeomScalar, Sign, Undecided};

/// f64 with an absolute tolerance band used by sign predicates.
///
/// Arithmetic carries the larger operand tolerance forward (plus a small
/// growth term for products), which is crude but adequate for the O(1)-sized
/// per-fiber geometry it is used on. A sign query inside the band returns
/// `Undecided` so geometric code can fail loudly instead of mislabeling a
/// near-degenerate configuration.
#[derive(Debug, Clone, Copy)]
pub struct Fuzzy {
    pub v: f64,
    pub tol: f64,
}

pub const DEFAULT_TOL: f64 = 1e-9;

impl Fuzzy {
    pub fn new(v: f64) -> Self {
        Fuzzy {
            v,
            tol: DEFAULT_TOL,
        }
    }
    pub fn with_tol(v: f64, tol: f64) -> Self {
        Fuzzy { v, tol }
    }
}

impl GeomScalar for Fuzzy {
    fn zero() -> Self {
        Fuzzy::new(0.0)
    }
    fn one() -> Self {
        Fuzzy::new(1.0)
    }
    fn from_i64(v: i64) -> Self {
        Fuzzy::new(v as f64)
    }
    fn add(&self, o: &Self) -> Self {
        Fuzzy {
            v: self.v + o.v,
            tol: self.tol.max(o.tol),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Fuzzy {
            v: self.v - o.v,
            tol: self.tol.max(o.tol),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Fuzzy {
            v: self.v * o.v,
            tol: (self.tol.max(o.tol)) * (1.0 + self.v.abs().max(o.v.abs())),
        }
    }
    fn div(&self, o: &Self) -> Self {
        Fuzzy {
            v: self.v / o.v,
            tol: self.tol.max(o.tol) * (1.0 + (self.v / o.v).abs()) / o.v.abs().max(1e-30),
        }
    }
    fn neg(&self) -> Self {
        Fuzzy {
            v: -self.v,
            tol: self.tol,
        }
    }
    fn sign(&self) -> Result<Sign, Undecided> {
        if self.v.abs() <= self.tol {
            if self.v == 0.0 {
                // exact zeros arise from structurally equal inputs
                Ok(Sign::Zero)
            } else {
                Err(Undecided)
            }
        } else if self.v > 0.0 {
            Ok(Sign::Pos)
        } else {
            Ok(Sign::Neg)
        }
    }
    fn to_f64(&self) -> f64 {
        self.v
    }
    fn floor_lb(&self) -> i64 {
        (self.v - self.tol).floor() as i64
    }
    fn ceil_ub(&self) -> i64 {
        (self.v + self.tol).ceil() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undecided_inside_band() {
        let x = Fuzzy::with_tol(1e-12, 1e-9);
        assert!(x.sign().is_err());
        let y = Fuzzy::with_tol(1e-6, 1e-9);
        assert_eq!(y.sign().unwrap(), Sign::Pos);
    }

    #[test]
    fn structural_zero_is_zero() {
        let x = Fuzzy::new(0.5);
        assert_eq!(x.sub(&x).sign().unwrap(), Sign::Zero);
    }
}
