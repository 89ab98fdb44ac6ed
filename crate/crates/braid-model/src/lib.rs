//! Braid groups acting piecewise-linearly on integral coordinates of
//! multicurves in the punctured disk.
//!
//! A multicurve on the n-punctured disk is encoded by 2n-4 integers
//! (a_1, b_1, ..., a_{n-2}, b_{n-2}); the pair (a_j, b_j) records signed
//! halved intersection differences around puncture j+1 (rays up/down from
//! the puncture for a_j, vertical lines in the neighboring gaps for b_j).
//! The generator action is an exact max-plus update, calibrated against a
//! geometric curve-tracing oracle (see `oracle`) and locked in by the braid
//! relations, the inverse law, triviality of the full twist, and the
//! dilatation of sigma_1 sigma_2^{-1}.
//!
//! Convention: sigma_i is the counterclockwise half twist swapping punctures
//! i and i+1; words act on curves on the left, so the letters of a word are
//! applied right to left.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use qfield::ln_biguint;
use std::cmp::max;
use thiserror::Error;
use walk_engine::{Canonical, Group, SamplePath};

pub mod oracle;

#[derive(Debug, Error)]
pub enum BraidError {
    #[error("puncture count {0} too small (need >= 3)")]
    PunctureCount(usize),
    #[error("generator index {0} out of range 1..{1}")]
    GeneratorRange(usize, usize),
    #[error("puncture count mismatch: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error("zero multicurve has no growth rate")]
    ZeroCurve,
}

/// A braid group element as a freely reduced word of signed generator
/// indices (+i for sigma_i, -i for its inverse).
///
/// Equality and hashing use the freely reduced word. This is a sound
/// normalization (freely equal words are equal braids), not a solution to
/// the braid word problem; the walk machinery only compares elements
/// against the finitely many measure-support words, where it is adequate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BraidWord {
    n: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(n: usize, letters: Vec<i32>) -> Result<Self, BraidError> {
        if n < 3 {
            return Err(BraidError::PunctureCount(n));
        }
        for &l in &letters {
            let i = l.unsigned_abs() as usize;
            if l == 0 || i > n - 1 {
                return Err(BraidError::GeneratorRange(i, n - 1));
            }
        }
        Ok(BraidWord { n, letters }.reduced())
    }

    pub fn identity_on(n: usize) -> Self {
        BraidWord {
            n,
            letters: Vec::new(),
        }
    }

    /// Free reduction: cancel adjacent sigma_i sigma_i^{-1} pairs.
    fn reduced(mut self) -> Self {
        let mut out: Vec<i32> = Vec::with_capacity(self.letters.len());
        for l in self.letters.drain(..) {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        self.letters = out;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }
}

impl Group for BraidWord {
    fn identity() -> Self {
        // paths fix the puncture count on first composition; 3 is the
        // smallest disk and merges with any operand via compose
        BraidWord {
            n: 0,
            letters: Vec::new(),
        }
    }

    fn compose(&self, other: &Self) -> Self {
        let n = match (self.n, other.n) {
            (0, m) | (m, 0) => m,
            (a, b) => {
                assert_eq!(a, b, "puncture count mismatch");
                a
            }
        };
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        BraidWord { n, letters }.reduced()
    }

    fn invert(&self) -> Self {
        BraidWord {
            n: self.n,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }
}

impl Canonical for BraidWord {
    fn canonical_string(&self) -> String {
        let body = self
            .letters
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        format!("{} [{}]", self.n, body)
    }
}

/// Integral multicurve coordinates on the n-punctured disk.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multicurve {
    n: usize,
    a: Vec<BigInt>,
    b: Vec<BigInt>,
}

fn pos(x: &BigInt) -> BigInt {
    max(x.clone(), BigInt::zero())
}

fn neg(x: &BigInt) -> BigInt {
    std::cmp::min(x.clone(), BigInt::zero())
}

impl Multicurve {
    pub fn new(n: usize, a: Vec<BigInt>, b: Vec<BigInt>) -> Result<Self, BraidError> {
        if n < 3 {
            return Err(BraidError::PunctureCount(n));
        }
        if a.len() != n - 2 || b.len() != n - 2 {
            return Err(BraidError::Mismatch(a.len(), n - 2));
        }
        Ok(Multicurve { n, a, b })
    }

    pub fn from_i64(n: usize, a: Vec<i64>, b: Vec<i64>) -> Result<Self, BraidError> {
        Self::new(
            n,
            a.into_iter().map(BigInt::from).collect(),
            b.into_iter().map(BigInt::from).collect(),
        )
    }

    pub fn zero(n: usize) -> Self {
        Multicurve {
            n,
            a: vec![BigInt::zero(); n - 2],
            b: vec![BigInt::zero(); n - 2],
        }
    }

    /// Reference curve: the round curve enclosing punctures 1 and 2.
    /// Coordinates b_1 = 1, everything else 0 (frozen from the tracing
    /// oracle; see tests).
    pub fn reference(n: usize) -> Result<Self, BraidError> {
        let mut b = vec![0i64; n - 2];
        b[0] = 1;
        Multicurve::from_i64(n, vec![0; n - 2], b)
    }

    /// Second reference: the round curve enclosing punctures 2 and 3.
    pub fn reference_alt(n: usize) -> Result<Self, BraidError> {
        if n == 3 {
            return Multicurve::from_i64(3, vec![0], vec![-1]);
        }
        let mut b = vec![0i64; n - 2];
        b[0] = -1;
        b[1] = 1;
        Multicurve::from_i64(n, vec![0; n - 2], b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> (&[BigInt], &[BigInt]) {
        (&self.a, &self.b)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(Zero::is_zero) && self.b.iter().all(Zero::is_zero)
    }

    /// Curve norm: sum of absolute coordinate values. Zero iff empty.
    pub fn norm(&self) -> BigUint {
        let mut s = BigUint::zero();
        for x in self.a.iter().chain(self.b.iter()) {
            s += x.magnitude();
        }
        s
    }

    pub fn ln_norm(&self) -> f64 {
        ln_biguint(&self.norm())
    }

    /// Serialization "n a_1 b_1 ... a_{n-2} b_{n-2}".
    pub fn serialize(&self) -> String {
        let mut parts = vec![self.n.to_string()];
        for j in 0..self.n - 2 {
            parts.push(self.a[j].to_string());
            parts.push(self.b[j].to_string());
        }
        parts.join(" ")
    }
}

/// The action of sigma_i^{sign} on multicurve coordinates: the exact
/// max-plus update. Invertible; `apply_generator(c, i, s)` then
/// `apply_generator(.., i, -s)` is the identity.
pub fn apply_generator(c: &Multicurve, i: usize, positive: bool) -> Multicurve {
    assert!(i >= 1 && i <= c.n - 1, "generator index out of range");
    let m = c.n - 2;
    let mut a = c.a.clone();
    let mut b = c.b.clone();
    // sigma_i^{-1} is the vertical-mirror conjugate of sigma_i; the mirror
    // negates all a-coordinates.
    if !positive {
        for x in a.iter_mut() {
            *x = -x.clone();
        }
    }
    if i == 1 {
        let (a1, b1) = (a[0].clone(), b[0].clone());
        let bp = pos(&b1) - &a1;
        a[0] = &a1 + neg(&b1) + neg(&bp);
        b[0] = bp;
    } else if i == c.n - 1 {
        let (a1, b1) = (a[m - 1].clone(), b[m - 1].clone());
        let bp = neg(&b1) - &a1;
        a[m - 1] = &a1 + pos(&b1) + pos(&bp);
        b[m - 1] = bp;
    } else {
        // interior: affects pairs i-1 and i (1-based), i.e. indices i-2, i-1.
        // The positive twist is the mirror conjugate of the raw update below.
        let (j, k) = (i - 2, i - 1);
        let x1 = -a[j].clone();
        let y1 = b[j].clone();
        let x2 = -a[k].clone();
        let y2 = b[k].clone();
        let c0 = &x1 - &x2 - pos(&y2) + neg(&y1);
        let x1p = &x1 - pos(&y1) - pos(&(pos(&y2) + &c0));
        let y1p = &y2 + neg(&c0);
        let x2p = &x2 - neg(&y2) - neg(&(neg(&y1) - &c0));
        let y2p = &y1 - neg(&c0);
        a[j] = -x1p;
        b[j] = y1p;
        a[k] = -x2p;
        b[k] = y2p;
    }
    if !positive {
        for x in a.iter_mut() {
            *x = -x.clone();
        }
    }
    Multicurve { n: c.n, a, b }
}

/// Left action of a braid word on a multicurve: letters applied right to
/// left, so that (w1 w2) . c = w1 . (w2 . c).
pub fn apply_word(c: &Multicurve, w: &BraidWord) -> Multicurve {
    assert!(w.n == 0 || w.n == c.n, "puncture count mismatch");
    let mut cur = c.clone();
    for &l in w.letters.iter().rev() {
        cur = apply_generator(&cur, l.unsigned_abs() as usize, l > 0);
    }
    cur
}

/// Per-horizon growth estimates (1/n) log ||omega_n^{-1} . curve|| for a
/// walk on the braid group, evaluated incrementally along the path.
/// Returns (horizon, estimate) at each requested horizon.
pub fn lyapunov_growth(
    path: &SamplePath<BraidWord>,
    curve: &Multicurve,
    horizons: &[i64],
) -> Result<Vec<(i64, f64)>, BraidError> {
    if curve.is_zero() {
        return Err(BraidError::ZeroCurve);
    }
    let n_max = horizons.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    let mut state = curve.clone();
    for k in 1..=n_max {
        // omega_k^{-1} c = (g_k^{-1}) . (omega_{k-1}^{-1} c)
        let inc = path.step_forward(k - 1).invert();
        state = apply_word(&state, &inc);
        if horizons.contains(&k) {
            out.push((k, state.ln_norm() / k as f64));
        }
    }
    Ok(out)
}
