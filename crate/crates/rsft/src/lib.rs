//! Random (nonautonomous) subshifts of finite type over a finite window of
//! fibers: per-fiber alphabet sizes k(n) and rectangular 0/1 transition
//! matrices A(n) of shape k(n) x k(n+1).
//!
//! Counting is exact: cylinder counts are big-integer contractions of
//! matrix products, so entropy comparisons stay exact until the final
//! logarithm.

use num_bigint::BigUint;
use qfield::ln_biguint;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SftError {
    #[error("fiber range [{0}, {1}] outside window [{2}, {3}]")]
    Range(i64, i64, i64, i64),
    #[error("cylinder count {count} exceeds enumeration limit {limit}")]
    LimitExceeded { count: BigUint, limit: u64 },
    #[error("letter {letter} out of range 1..={k} at fiber {fiber}")]
    LetterRange { letter: usize, k: usize, fiber: i64 },
    #[error("inadmissible transition at fiber {0}")]
    Inadmissible(i64),
    #[error("matrix shape mismatch at fiber {0}")]
    Shape(i64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Dense 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat01 {
    pub rows: usize,
    pub cols: usize,
    data: Vec<bool>,
}

impl Mat01 {
    pub fn new(rows: usize, cols: usize) -> Self {
        Mat01 {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<u8>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Mat01::new(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v != 0);
            }
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Mat01 {
            rows,
            cols,
            data: vec![true; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat01::new(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_has_one(&self, i: usize) -> bool {
        (0..self.cols).any(|j| self.get(i, j))
    }

    pub fn col_has_one(&self, j: usize) -> bool {
        (0..self.rows).any(|i| self.get(i, j))
    }
}

/// Validator findings; reported, never silently repaired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SftViolation {
    ShapeMismatch { fiber: i64 },
    DeadRow { fiber: i64, row: usize },
    DeadColumn { fiber: i64, col: usize },
}

/// Random subshift of finite type on the window [n_min, n_max].
///
/// `k[i]` is the alphabet size of fiber n_min + i; `mats[i]` is the
/// transition matrix from fiber n_min + i to n_min + i + 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSft {
    n_min: i64,
    k: Vec<usize>,
    mats: Vec<Mat01>,
}

impl RandomSft {
    pub fn new(n_min: i64, k: Vec<usize>, mats: Vec<Mat01>) -> Result<Self, SftError> {
        assert!(!k.is_empty());
        assert_eq!(mats.len() + 1, k.len(), "need one matrix per fiber gap");
        let sft = RandomSft { n_min, k, mats };
        for (i, m) in sft.mats.iter().enumerate() {
            if m.rows != sft.k[i] || m.cols != sft.k[i + 1] {
                return Err(SftError::Shape(sft.n_min + i as i64));
            }
        }
        Ok(sft)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_min, self.n_min + self.k.len() as i64 - 1)
    }

    pub fn alphabet_size(&self, n: i64) -> Result<usize, SftError> {
        let (lo, hi) = self.window();
        if n < lo || n > hi {
            return Err(SftError::Range(n, n, lo, hi));
        }
        Ok(self.k[(n - lo) as usize])
    }

    pub fn matrix(&self, n: i64) -> Result<&Mat01, SftError> {
        let (lo, hi) = self.window();
        if n < lo || n >= hi {
            return Err(SftError::Range(n, n + 1, lo, hi));
        }
        Ok(&self.mats[(n - lo) as usize])
    }

    /// Report dead rows/columns and shape mismatches.
    pub fn validate(&self) -> Vec<SftViolation> {
        let mut out = Vec::new();
        for (i, m) in self.mats.iter().enumerate() {
            let fiber = self.n_min + i as i64;
            if m.rows != self.k[i] || m.cols != self.k[i + 1] {
                out.push(SftViolation::ShapeMismatch { fiber });
                continue;
            }
            for r in 0..m.rows {
                if !m.row_has_one(r) {
                    out.push(SftViolation::DeadRow { fiber, row: r });
                }
            }
            for c in 0..m.cols {
                if !m.col_has_one(c) {
                    out.push(SftViolation::DeadColumn { fiber, col: c });
                }
            }
        }
        out
    }

    /// Number of nonempty (s,t)_n-cylinders: the all-ones contraction of
    /// A(n+s) A(n+s+1) ... A(n+t-1); k(n+s) when t = s.
    pub fn count_cylinders(&self, n: i64, s: i64, t: i64) -> Result<BigUint, SftError> {
        assert!(s <= t);
        let (lo, hi) = self.window();
        if n + s < lo || n + t > hi {
            return Err(SftError::Range(n + s, n + t, lo, hi));
        }
        let k0 = self.alphabet_size(n + s)?;
        let mut v: Vec<BigUint> = vec![BigUint::from(1u32); k0];
        for i in s..t {
            let m = self.matrix(n + i)?;
            let mut next = vec![BigUint::from(0u32); m.cols];
            for r in 0..m.rows {
                if v[r] == BigUint::from(0u32) {
                    continue;
                }
                for c in 0..m.cols {
                    if m.get(r, c) {
                        next[c] += &v[r];
                    }
                }
            }
            v = next;
        }
        Ok(v.into_iter().sum())
    }

    /// All admissible letter strings on the span, lexicographic, guarded by
    /// `limit`.
    pub fn enumerate_cylinders(
        &self,
        n: i64,
        s: i64,
        t: i64,
        limit: u64,
    ) -> Result<Vec<CylinderSpec>, SftError> {
        let count = self.count_cylinders(n, s, t)?;
        if count > BigUint::from(limit) {
            return Err(SftError::LimitExceeded { count, limit });
        }
        let mut out = Vec::new();
        let mut letters = Vec::new();
        self.enumerate_rec(n, s, t, &mut letters, &mut out);
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        n: i64,
        s: i64,
        t: i64,
        letters: &mut Vec<usize>,
        out: &mut Vec<CylinderSpec>,
    ) {
        let i = s + letters.len() as i64;
        if i > t {
            out.push(CylinderSpec {
                base: n,
                s,
                letters: letters.clone(),
            });
            return;
        }
        let k = self.alphabet_size(n + i).unwrap();
        for letter in 1..=k {
            if let Some(&prev) = letters.last() {
                let m = self.matrix(n + i - 1).unwrap();
                if !m.get(prev - 1, letter - 1) {
                    continue;
                }
            }
            letters.push(letter);
            self.enumerate_rec(n, s, t, letters, out);
            letters.pop();
        }
    }

    /// Admissibility of a cylinder spec against this subshift.
    pub fn check_spec(&self, spec: &CylinderSpec) -> Result<(), SftError> {
        for (off, &letter) in spec.letters.iter().enumerate() {
            let fiber = spec.base + spec.s + off as i64;
            let k = self.alphabet_size(fiber)?;
            if letter == 0 || letter > k {
                return Err(SftError::LetterRange { letter, k, fiber });
            }
            if off + 1 < spec.letters.len() {
                let m = self.matrix(fiber)?;
                if !m.get(letter - 1, spec.letters[off + 1] - 1) {
                    return Err(SftError::Inadmissible(fiber));
                }
            }
        }
        Ok(())
    }

    /// The shift map on cylinders: sigma(C_n(s,t)) = C_{n+1}(s-1, t-1).
    /// Same letters, re-based fiber.
    pub fn shift(&self, spec: &CylinderSpec) -> Result<CylinderSpec, SftError> {
        let shifted = CylinderSpec {
            base: spec.base + 1,
            s: spec.s - 1,
            letters: spec.letters.clone(),
        };
        self.check_spec(&shifted)?;
        Ok(shifted)
    }

    /// Inverse of `shift`.
    pub fn unshift(&self, spec: &CylinderSpec) -> Result<CylinderSpec, SftError> {
        let shifted = CylinderSpec {
            base: spec.base - 1,
            s: spec.s + 1,
            letters: spec.letters.clone(),
        };
        self.check_spec(&shifted)?;
        Ok(shifted)
    }

    /// Finite-m entropy estimates: (m, (1/m) log count(n, K, K+m)) for
    /// m = 1..m_max. Consumers apply limsup/trend diagnostics.
    pub fn entropy_rate(
        &self,
        n: i64,
        k_base: i64,
        m_max: i64,
    ) -> Result<Vec<(i64, f64)>, SftError> {
        let mut out = Vec::new();
        for m in 1..=m_max {
            let c = self.count_cylinders(n, k_base, k_base + m)?;
            out.push((m, ln_biguint(&c) / m as f64));
        }
        Ok(out)
    }

    /// Serialize in the "RSFT v1" plain-text format, bit-exact.
    pub fn to_format(&self) -> String {
        let mut s = String::new();
        writeln!(s, "RSFT v1").unwrap();
        let (lo, _) = self.window();
        for (i, k) in self.k.iter().enumerate() {
            writeln!(s, "{} {}", lo + i as i64, k).unwrap();
        }
        for (i, m) in self.mats.iter().enumerate() {
            writeln!(s, "{} {} {}", lo + i as i64, m.rows, m.cols).unwrap();
            for r in 0..m.rows {
                let row: String = (0..m.cols)
                    .map(|c| if m.get(r, c) { '1' } else { '0' })
                    .collect();
                writeln!(s, "{row}").unwrap();
            }
        }
        s
    }

    pub fn from_format(text: &str) -> Result<Self, SftError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| SftError::Parse("empty".into()))?;
        if header != "RSFT v1" {
            return Err(SftError::Parse(format!("bad header {header:?}")));
        }
        let mut fibers: Vec<(i64, usize)> = Vec::new();
        let mut rest: Vec<&str> = Vec::new();
        let mut in_fibers = true;
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if in_fibers && parts.len() == 2 {
                let n = i64::from_str(parts[0]).map_err(|e| SftError::Parse(e.to_string()))?;
                let k = usize::from_str(parts[1]).map_err(|e| SftError::Parse(e.to_string()))?;
                fibers.push((n, k));
            } else {
                in_fibers = false;
                rest.push(line);
            }
        }
        if fibers.is_empty() {
            return Err(SftError::Parse("no fibers".into()));
        }
        let n_min = fibers[0].0;
        for (i, (n, _)) in fibers.iter().enumerate() {
            if *n != n_min + i as i64 {
                return Err(SftError::Parse(format!("non-contiguous fiber {n}")));
            }
        }
        let k: Vec<usize> = fibers.iter().map(|f| f.1).collect();
        let mut mats = Vec::new();
        let mut it = rest.into_iter();
        while let Some(head) = it.next() {
            if head.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = head.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(SftError::Parse(format!("bad block header {head:?}")));
            }
            let rows = usize::from_str(parts[1]).map_err(|e| SftError::Parse(e.to_string()))?;
            let cols = usize::from_str(parts[2]).map_err(|e| SftError::Parse(e.to_string()))?;
            let mut m = Mat01::new(rows, cols);
            for r in 0..rows {
                let row = it
                    .next()
                    .ok_or_else(|| SftError::Parse("truncated matrix".into()))?;
                let row = row.trim();
                if row.len() != cols {
                    return Err(SftError::Parse(format!("row width {row:?}")));
                }
                for (c, ch) in row.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => m.set(r, c, true),
                        _ => return Err(SftError::Parse(format!("bad bit {ch:?}"))),
                    }
                }
            }
            mats.push(m);
        }
        RandomSft::new(n_min, k, mats)
    }
}

/// A finite cylinder: base fiber, span start s, letters y_s..y_t (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CylinderSpec {
    pub base: i64,
    pub s: i64,
    pub letters: Vec<usize>,
}

impl CylinderSpec {
    pub fn t(&self) -> i64 {
        self.s + self.letters.len() as i64 - 1
    }
}
