//! Exact arithmetic in real quadratic fields Q(sqrt(d)) together with a
//! small scalar abstraction that lets geometric code run either on exact
//! field elements or on tolerance-tracked floats.
//!
//! The exact side represents numbers as (p + q*sqrt(d)) / r with big-integer
//! coefficients, normalized so that r > 0 and gcd(p, q, r) = 1. Signs and
//! comparisons are decided exactly, which is what the partition geometry
//! needs: every predicate bottoms out in `GeomScalar::sign`.

use num_bigint::{BigInt, BigUint, Sign as BSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

mod fuzzy;
pub use fuzzy::Fuzzy;

/// Sign of an exact or tolerance-decided quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

/// A predicate could not be decided at the working tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Undecided;

impl fmt::Display for Undecided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sign undecidable at working tolerance")
    }
}

impl std::error::Error for Undecided {}

/// Field-like scalar with a (possibly fallible) sign predicate.
///
/// Exact implementations never fail; the float implementation reports
/// `Undecided` when a value lies inside its tolerance band, so callers can
/// surface "undecidable at tolerance" instead of guessing.
pub trait GeomScalar: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn sign(&self) -> Result<Sign, Undecided>;
    fn to_f64(&self) -> f64;
    /// A lower bound on floor(self). Used to seed lattice enumerations,
    /// which then filter candidates with exact sign tests.
    fn floor_lb(&self) -> i64;
    /// An upper bound on ceil(self).
    fn ceil_ub(&self) -> i64;

    fn is_zero_sig(&self) -> Result<bool, Undecided> {
        Ok(matches!(self.sign()?, Sign::Zero))
    }
    fn lt(&self, o: &Self) -> Result<bool, Undecided> {
        Ok(matches!(self.sub(o).sign()?, Sign::Neg))
    }
    fn le(&self, o: &Self) -> Result<bool, Undecided> {
        Ok(!matches!(self.sub(o).sign()?, Sign::Pos))
    }
    fn abs(&self) -> Self {
        match self.sign() {
            Ok(Sign::Neg) => self.neg(),
            _ => self.clone(),
        }
    }
    fn min_of(&self, o: &Self) -> Result<Self, Undecided> {
        Ok(if self.le(o)? { self.clone() } else { o.clone() })
    }
    fn max_of(&self, o: &Self) -> Result<Self, Undecided> {
        Ok(if self.le(o)? { o.clone() } else { self.clone() })
    }
}

/// Element of Q(sqrt(d)): (p + q*sqrt(d)) / r, with r > 0 and gcd(p,q,r) = 1.
///
/// `d` is a square-free nonnegative integer. Purely rational values carry
/// d = 0 and combine with any field; mixing two distinct nonzero radicands
/// is a programming error and panics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadVal {
    pub d: u64,
    pub p: BigInt,
    pub q: BigInt,
    pub r: BigInt,
}

#[allow(dead_code)]
fn isqrt_u64(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

/// Splits n = s^2 * f with f square-free (trial division; inputs are small
/// discriminants of 2x2 integer matrices).
pub fn squarefree_split(n: u64) -> (u64, u64) {
    let mut f = n;
    let mut s = 1u64;
    let mut p = 2u64;
    while p * p <= f {
        while f % (p * p) == 0 {
            f /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, f)
}

impl QuadVal {
    pub fn rational(p: BigInt, r: BigInt) -> Self {
        QuadVal {
            d: 0,
            p,
            q: BigInt::zero(),
            r,
        }
        .normalized()
    }

    pub fn from_int(v: i64) -> Self {
        Self::rational(BigInt::from(v), BigInt::one())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigInt::from(num), BigInt::from(den))
    }

    pub fn from_big_rational(x: &BigRational) -> Self {
        Self::rational(x.numer().clone(), x.denom().clone())
    }

    /// (p + q*sqrt(d)) / r. The radicand is reduced to its square-free part.
    pub fn new(d: u64, p: BigInt, q: BigInt, r: BigInt) -> Self {
        let (s, f) = squarefree_split(d);
        let (q, d) = if f <= 1 {
            // perfect square (or 0/1): fold into the rational part
            return QuadVal {
                d: 0,
                p: p + q * BigInt::from(s) * BigInt::from(f),
                q: BigInt::zero(),
                r,
            }
            .normalized();
        } else {
            (q * BigInt::from(s), f)
        };
        QuadVal { d, p, q, r }.normalized()
    }

    /// sqrt(d) itself.
    pub fn sqrt_d(d: u64) -> Self {
        Self::new(d, BigInt::zero(), BigInt::one(), BigInt::one())
    }

    fn normalized(mut self) -> Self {
        if self.r.is_negative() {
            self.p = -self.p;
            self.q = -self.q;
            self.r = -self.r.clone();
        }
        assert!(!self.r.is_zero(), "zero denominator");
        if self.q.is_zero() {
            self.d = 0;
        }
        let g = self.p.gcd(&self.q).gcd(&self.r);
        if !g.is_one() {
            self.p /= &g;
            self.q /= &g;
            self.r /= &g;
        }
        self
    }

    fn unify(&self, o: &Self) -> u64 {
        match (self.d, o.d) {
            (0, d) | (d, 0) => d,
            (a, b) if a == b => a,
            (a, b) => panic!("mixed radicands {a} and {b}"),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// Conjugate p - q*sqrt(d) over the rationals.
    pub fn conj(&self) -> Self {
        QuadVal {
            d: self.d,
            p: self.p.clone(),
            q: -self.q.clone(),
            r: self.r.clone(),
        }
    }

    fn sign_exact(&self) -> Sign {
        let sp = self.p.sign();
        let sq = self.q.sign();
        let s = match (sp, sq) {
            (BSign::NoSign, BSign::NoSign) => return Sign::Zero,
            (BSign::NoSign, s) | (s, BSign::NoSign) => s,
            (BSign::Plus, BSign::Plus) => BSign::Plus,
            (BSign::Minus, BSign::Minus) => BSign::Minus,
            // opposite signs: compare p^2 with q^2 d
            _ => {
                let lhs = &self.p * &self.p;
                let rhs = &self.q * &self.q * BigInt::from(self.d);
                match lhs.cmp(&rhs) {
                    std::cmp::Ordering::Greater => sp,
                    std::cmp::Ordering::Less => sq,
                    std::cmp::Ordering::Equal => return Sign::Zero,
                }
            }
        };
        match s {
            BSign::Plus => Sign::Pos,
            BSign::Minus => Sign::Neg,
            BSign::NoSign => Sign::Zero,
        }
    }
}

impl fmt::Display for QuadVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.r.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.r)
            }
        } else {
            write!(f, "({}+{}*sqrt({}))/{}", self.p, self.q, self.d, self.r)
        }
    }
}

impl GeomScalar for QuadVal {
    fn zero() -> Self {
        Self::from_int(0)
    }
    fn one() -> Self {
        Self::from_int(1)
    }
    fn from_i64(v: i64) -> Self {
        Self::from_int(v)
    }
    fn add(&self, o: &Self) -> Self {
        let d = self.unify(o);
        QuadVal {
            d,
            p: &self.p * &o.r + &o.p * &self.r,
            q: &self.q * &o.r + &o.q * &self.r,
            r: &self.r * &o.r,
        }
        .normalized()
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        let d = self.unify(o);
        QuadVal {
            d,
            p: &self.p * &o.p + &self.q * &o.q * BigInt::from(d),
            q: &self.p * &o.q + &self.q * &o.p,
            r: &self.r * &o.r,
        }
        .normalized()
    }
    fn div(&self, o: &Self) -> Self {
        // 1/((p+q*sqrt(d))/r) = r*(p - q*sqrt(d)) / (p^2 - q^2 d)
        let d = self.unify(o);
        let denom = &o.p * &o.p - &o.q * &o.q * BigInt::from(d);
        assert!(!denom.is_zero(), "division by zero");
        let inv = QuadVal {
            d,
            p: &o.r * &o.p,
            q: -(&o.r * &o.q),
            r: denom,
        }
        .normalized();
        self.mul(&inv)
    }
    fn neg(&self) -> Self {
        QuadVal {
            d: self.d,
            p: -self.p.clone(),
            q: -self.q.clone(),
            r: self.r.clone(),
        }
    }
    fn sign(&self) -> Result<Sign, Undecided> {
        Ok(self.sign_exact())
    }
    fn to_f64(&self) -> f64 {
        let sq = (self.d as f64).sqrt();
        // handle large coefficients via a shared scale
        let bits = self
            .p
            .bits()
            .max(self.q.bits())
            .max(self.r.bits())
            .saturating_sub(512);
        if bits == 0 {
            let p = self.p.to_f64().unwrap_or(f64::NAN);
            let q = self.q.to_f64().unwrap_or(f64::NAN);
            let r = self.r.to_f64().unwrap_or(f64::NAN);
            (p + q * sq) / r
        } else {
            let shift = bits as u64;
            let p = (&self.p >> shift).to_f64().unwrap_or(f64::NAN);
            let q = (&self.q >> shift).to_f64().unwrap_or(f64::NAN);
            let r = (&self.r >> shift).to_f64().unwrap_or(f64::NAN);
            (p + q * sq) / r
        }
    }
    fn floor_lb(&self) -> i64 {
        let est = self.to_f64();
        if !est.is_finite() {
            return i64::MIN / 4;
        }
        let mut n = est.floor() as i64 - 2;
        // push up while n+1 <= self
        while {
            let next = Self::from_int(n + 1);
            matches!(self.sub(&next).sign_exact(), Sign::Pos | Sign::Zero)
        } {
            n += 1;
        }
        n
    }
    fn ceil_ub(&self) -> i64 {
        -((self.neg()).floor_lb())
    }
}

/// Natural log of a positive big integer, accurate to f64 precision.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 53 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of the absolute value of a big integer.
pub fn ln_bigint_abs(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// Natural log of a positive big rational.
pub fn ln_big_rational(x: &BigRational) -> f64 {
    ln_bigint_abs(x.numer()) - ln_bigint_abs(x.denom())
}
