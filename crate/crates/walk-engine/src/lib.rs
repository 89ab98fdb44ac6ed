//! Two-sided random walks on groups.
//!
//! A walk is driven by a finitely supported measure `mu` with exact rational
//! weights. The positive side of a path multiplies mu-increments on the
//! right; the negative side is driven by the reflected measure. Increments
//! are drawn from per-index substreams of a counter-based generator, so a
//! path is a pure function of (seed, measure) and extension order never
//! matters.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Debug;
use std::hash::Hash;
use std::io::Write;
use std::sync::Arc;
use thiserror::Error;

/// Group interface required of walk elements.
pub trait Group: Clone + Eq + Hash + Debug + Send + Sync + 'static {
    fn identity() -> Self;
    fn compose(&self, other: &Self) -> Self;
    fn invert(&self) -> Self;
}

/// Canonical one-line serialization of a group element, model specific.
pub trait Canonical {
    fn canonical_string(&self) -> String;
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("measure weights must sum to 1, got {0}")]
    WeightSum(String),
    #[error("measure weight for {0} is not positive")]
    WeightSign(String),
    #[error("common denominator of weights exceeds u64")]
    DenomOverflow,
    #[error("position {0} outside materialized window [{1}, {2}]")]
    Window(i64, i64, i64),
}

/// A generator reference: index into a `GeneratorSet`, possibly inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Label {
    pub index: usize,
    pub inverse: bool,
}

impl Label {
    pub fn gen(index: usize) -> Self {
        Label {
            index,
            inverse: false,
        }
    }
    pub fn inv(index: usize) -> Self {
        Label {
            index,
            inverse: true,
        }
    }
    pub fn flipped(self) -> Self {
        Label {
            index: self.index,
            inverse: !self.inverse,
        }
    }
}

/// Named generators with precomputed inverses.
#[derive(Debug, Clone)]
pub struct GeneratorSet<G: Group> {
    names: Vec<String>,
    elements: Vec<G>,
    inverses: Vec<G>,
}

impl<G: Group> GeneratorSet<G> {
    pub fn new(gens: Vec<(String, G)>) -> Self {
        let (names, elements): (Vec<_>, Vec<_>) = gens.into_iter().unzip();
        let inverses = elements.iter().map(|g: &G| g.invert()).collect();
        GeneratorSet {
            names,
            elements,
            inverses,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, l: Label) -> &G {
        if l.inverse {
            &self.inverses[l.index]
        } else {
            &self.elements[l.index]
        }
    }

    pub fn name(&self, l: Label) -> String {
        if l.inverse {
            format!("{}^-1", self.names[l.index])
        } else {
            self.names[l.index].clone()
        }
    }
}

/// Finitely supported probability measure over generator labels.
///
/// Weights are exact rationals, must be positive and sum to exactly 1.
#[derive(Debug, Clone)]
pub struct ProbabilityMeasure {
    entries: Vec<(Label, BigRational)>,
}

impl ProbabilityMeasure {
    pub fn new(entries: Vec<(Label, BigRational)>) -> Result<Self, WalkError> {
        let mut sum = BigRational::zero();
        for (l, w) in &entries {
            if !w.is_positive() {
                return Err(WalkError::WeightSign(format!("{l:?}")));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(WalkError::WeightSum(sum.to_string()));
        }
        Ok(ProbabilityMeasure { entries })
    }

    /// Uniform measure on the given labels.
    pub fn uniform(labels: Vec<Label>) -> Self {
        let n = labels.len();
        let w = BigRational::new(1.into(), (n as i64).into());
        ProbabilityMeasure {
            entries: labels.into_iter().map(|l| (l, w.clone())).collect(),
        }
    }

    /// The reflected measure: same weights on inverted labels.
    pub fn reflected(&self) -> Self {
        ProbabilityMeasure {
            entries: self
                .entries
                .iter()
                .map(|(l, w)| (l.flipped(), w.clone()))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(Label, BigRational)] {
        &self.entries
    }

    /// Probability of drawing a specific group element (sums duplicates).
    pub fn element_probability<G: Group>(&self, gens: &GeneratorSet<G>, e: &G) -> BigRational {
        let mut p = BigRational::zero();
        for (l, w) in &self.entries {
            if gens.element(*l) == e {
                p += w;
            }
        }
        p
    }

    /// Integerized weights over a common denominator, for exact sampling.
    fn integerized(&self) -> Result<(Vec<u64>, u64), WalkError> {
        let mut denom = BigUint::one();
        for (_, w) in &self.entries {
            let d = w.denom().magnitude();
            denom = num_integer::lcm(denom, d.clone());
        }
        let denom_u64 = denom.to_u64().ok_or(WalkError::DenomOverflow)?;
        let weights = self
            .entries
            .iter()
            .map(|(_, w)| {
                let scale = &denom / w.denom().magnitude();
                (w.numer().magnitude() * scale).to_u64().unwrap()
            })
            .collect();
        Ok((weights, denom_u64))
    }
}

/// Probability of the cylinder set [x_1, ..., x_n]: the product of the
/// mu-weights of consecutive quotients, zero if any quotient leaves the
/// support. The empty word has probability 1.
pub fn cylinder_probability<G: Group>(
    measure: &ProbabilityMeasure,
    gens: &GeneratorSet<G>,
    word: &[G],
) -> BigRational {
    let mut prob = BigRational::one();
    let mut prev = G::identity();
    for x in word {
        let inc = prev.invert().compose(x);
        let p = measure.element_probability(gens, &inc);
        if p.is_zero() {
            return BigRational::zero();
        }
        prob *= p;
        prev = x.clone();
    }
    prob
}

/// Deterministic draw at a path index.
///
/// Index n >= 1 is the step from n-1 to n (mu); index n <= -1 is the step
/// from n+1 to n (reflected measure). Each index gets its own ChaCha stream,
/// so materialization order is irrelevant.
fn draw_index(seed: u64, index: i64, weights: &[u64], denom: u64) -> usize {
    let stream = if index >= 0 {
        2 * index as u64
    } else {
        2 * ((-index) as u64) + 1
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut t = rng.gen_range(0..denom);
    for (i, w) in weights.iter().enumerate() {
        if t < *w {
            return i;
        }
        t -= *w;
    }
    unreachable!("weights sum to denominator")
}

/// A lazily extended two-sided sample path with omega_0 = identity.
#[derive(Debug, Clone)]
pub struct SamplePath<G: Group> {
    seed: u64,
    gens: Arc<GeneratorSet<G>>,
    mu: ProbabilityMeasure,
    mu_reflected: ProbabilityMeasure,
    mu_int: (Vec<u64>, u64),
    mu_ref_int: (Vec<u64>, u64),
    /// Explicit increment labels override seeded draws (crafted test paths).
    scripted_pos: Option<Vec<Label>>,
    scripted_neg: Option<Vec<Label>>,
    pos: Vec<G>,
    neg: Vec<G>,
    pos_labels: Vec<Label>,
    neg_labels: Vec<Label>,
}

impl<G: Group> SamplePath<G> {
    pub fn new(
        seed: u64,
        gens: Arc<GeneratorSet<G>>,
        mu: ProbabilityMeasure,
    ) -> Result<Self, WalkError> {
        let mu_reflected = mu.reflected();
        let mu_int = mu.integerized()?;
        let mu_ref_int = mu_reflected.integerized()?;
        Ok(SamplePath {
            seed,
            gens,
            mu,
            mu_reflected,
            mu_int,
            mu_ref_int,
            scripted_pos: None,
            scripted_neg: None,
            pos: Vec::new(),
            neg: Vec::new(),
            pos_labels: Vec::new(),
            neg_labels: Vec::new(),
        })
    }

    /// A path whose increments are given explicitly instead of sampled.
    /// Positive labels feed indices 1, 2, ...; negative labels feed
    /// -1, -2, .... Walking past the script ends falls back to seeded draws.
    pub fn scripted(
        seed: u64,
        gens: Arc<GeneratorSet<G>>,
        mu: ProbabilityMeasure,
        pos_script: Vec<Label>,
        neg_script: Vec<Label>,
    ) -> Result<Self, WalkError> {
        let mut p = Self::new(seed, gens, mu)?;
        p.scripted_pos = Some(pos_script);
        p.scripted_neg = Some(neg_script);
        Ok(p)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generators(&self) -> &GeneratorSet<G> {
        &self.gens
    }

    pub fn measure(&self) -> &ProbabilityMeasure {
        &self.mu
    }

    pub fn reflected_measure(&self) -> &ProbabilityMeasure {
        &self.mu_reflected
    }

    pub fn window(&self) -> (i64, i64) {
        (-(self.neg.len() as i64), self.pos.len() as i64)
    }

    fn draw_label(&self, index: i64) -> Label {
        debug_assert!(index != 0);
        if index >= 1 {
            if let Some(script) = &self.scripted_pos {
                if let Some(l) = script.get((index - 1) as usize) {
                    return *l;
                }
            }
            let (w, d) = &self.mu_int;
            let i = draw_index(self.seed, index, w, *d);
            self.mu.entries[i].0
        } else {
            if let Some(script) = &self.scripted_neg {
                if let Some(l) = script.get((-index - 1) as usize) {
                    return *l;
                }
            }
            let (w, d) = &self.mu_ref_int;
            let i = draw_index(self.seed, index, w, *d);
            self.mu_reflected.entries[i].0
        }
    }

    /// Grow the materialized window to cover [n_min, n_max].
    pub fn extend(&mut self, n_min: i64, n_max: i64) {
        assert!(n_min <= 0 && n_max >= 0, "window must contain 0");
        while (self.pos.len() as i64) < n_max {
            let n = self.pos.len() as i64 + 1;
            let label = self.draw_label(n);
            let prev = if n == 1 {
                G::identity()
            } else {
                self.pos[n as usize - 2].clone()
            };
            self.pos.push(prev.compose(self.gens.element(label)));
            self.pos_labels.push(label);
        }
        while (self.neg.len() as i64) < -n_min {
            let n = -(self.neg.len() as i64) - 1;
            let label = self.draw_label(n);
            let prev = if n == -1 {
                G::identity()
            } else {
                self.neg[(-n) as usize - 2].clone()
            };
            self.neg.push(prev.compose(self.gens.element(label)));
            self.neg_labels.push(label);
        }
    }

    /// omega_n. Panics outside the materialized window; see `try_position`.
    pub fn position(&self, n: i64) -> G {
        self.try_position(n).unwrap()
    }

    pub fn try_position(&self, n: i64) -> Result<G, WalkError> {
        let (lo, hi) = self.window();
        if n == 0 {
            return Ok(G::identity());
        }
        if n > hi || n < lo {
            return Err(WalkError::Window(n, lo, hi));
        }
        Ok(if n > 0 {
            self.pos[n as usize - 1].clone()
        } else {
            self.neg[(-n) as usize - 1].clone()
        })
    }

    /// Step element from omega_n to omega_{n+1}, i.e. omega_n^{-1} omega_{n+1}.
    /// Requires the window to cover the step.
    pub fn step_forward(&self, n: i64) -> G {
        if n >= 0 {
            self.gens.element(self.materialized_label(n + 1)).clone()
        } else {
            // index n <= -1 stores omega_{n+1}^{-1} omega_n
            self.gens.element(self.materialized_label(n)).invert()
        }
    }

    fn materialized_label(&self, index: i64) -> Label {
        debug_assert!(index != 0);
        if index >= 1 {
            self.pos_labels[index as usize - 1]
        } else {
            self.neg_labels[(-index) as usize - 1]
        }
    }

    /// Bernoulli shift view with base k: positions (theta^k omega)_n.
    pub fn shift(&self, k: i64) -> ShiftView<'_, G> {
        ShiftView { path: self, k }
    }

    /// Dump the materialized window as JSON lines.
    pub fn dump_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()>
    where
        G: Canonical,
    {
        let (lo, hi) = self.window();
        for n in lo..=hi {
            let rec = PathRecord {
                n,
                element: self.position(n).canonical_string(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct PathRecord {
    n: i64,
    element: String,
}

/// View of a path re-based at index k: (theta^k omega)_n = omega_k^{-1} omega_{n+k}.
pub struct ShiftView<'a, G: Group> {
    path: &'a SamplePath<G>,
    k: i64,
}

impl<'a, G: Group> ShiftView<'a, G> {
    pub fn position(&self, n: i64) -> G {
        let base = self.path.position(self.k);
        base.invert().compose(&self.path.position(n + self.k))
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    /// Shift of a shift composes the offsets.
    pub fn then(&self, l: i64) -> ShiftView<'a, G> {
        ShiftView {
            path: self.path,
            k: self.k + l,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    /// Reduced words over two letters (test group).
    #[derive(Debug, Clone, PartialEq, Eq, Hash)]
    struct Word(Vec<i8>);

    impl Group for Word {
        fn identity() -> Self {
            Word(vec![])
        }
        fn compose(&self, other: &Self) -> Self {
            let mut v = self.0.clone();
            for &c in &other.0 {
                if v.last() == Some(&-c) {
                    v.pop();
                } else {
                    v.push(c);
                }
            }
            Word(v)
        }
        fn invert(&self) -> Self {
            Word(self.0.iter().rev().map(|c| -c).collect())
        }
    }

    fn two_gen() -> (Arc<GeneratorSet<Word>>, ProbabilityMeasure) {
        let gens = Arc::new(GeneratorSet::new(vec![
            ("a".into(), Word(vec![1])),
            ("b".into(), Word(vec![2])),
        ]));
        let labels = vec![
            Label::gen(0),
            Label::inv(0),
            Label::gen(1),
            Label::inv(1),
        ];
        (gens, ProbabilityMeasure::uniform(labels))
    }

    #[test]
    fn position_zero_is_identity() {
        let (gens, mu) = two_gen();
        let mut p = SamplePath::new(7, gens, mu).unwrap();
        p.extend(-3, 3);
        assert_eq!(p.position(0), Word::identity());
    }

    #[test]
    fn extension_is_deterministic_and_order_free() {
        let (gens, mu) = two_gen();
        let mut p1 = SamplePath::new(42, gens.clone(), mu.clone()).unwrap();
        p1.extend(0, 5);
        let mut p2 = SamplePath::new(42, gens.clone(), mu.clone()).unwrap();
        p2.extend(0, 5);
        for n in 0..=5 {
            assert_eq!(p1.position(n), p2.position(n));
        }
        // replay oracle: extend in two stages, prefix must not move
        let mut p3 = SamplePath::new(42, gens, mu).unwrap();
        p3.extend(0, 3);
        let prefix: Vec<_> = (0..=3).map(|n| p3.position(n)).collect();
        p3.extend(-2, 5);
        for (n, w) in prefix.iter().enumerate() {
            assert_eq!(&p3.position(n as i64), w);
        }
    }

    #[test]
    fn increments_lie_in_supports() {
        let (gens, mu) = two_gen();
        let mut p = SamplePath::new(13, gens.clone(), mu.clone()).unwrap();
        p.extend(-50, 50);
        for n in 1..=50 {
            let inc = p.position(n - 1).invert().compose(&p.position(n));
            assert!(!mu.element_probability(&gens, &inc).is_zero());
        }
        let refl = mu.reflected();
        for n in -50..=-1i64 {
            let inc = p.position(n + 1).invert().compose(&p.position(n));
            assert!(!refl.element_probability(&gens, &inc).is_zero());
        }
    }

    #[test]
    fn shift_identity_and_origin() {
        let (gens, mu) = two_gen();
        let mut p = SamplePath::new(9, gens, mu).unwrap();
        p.extend(-6, 6);
        let v0 = p.shift(0);
        for n in -3..=3 {
            assert_eq!(v0.position(n), p.position(n));
        }
        for k in -3..=3 {
            assert_eq!(p.shift(k).position(0), Word::identity());
        }
    }

    #[test]
    fn shift_matches_hand_composition() {
        // theta^1 of a concrete 3-step path, checked against an independent
        // composition (direct concatenation with reduction).
        let (gens, mu) = two_gen();
        let mut p = SamplePath::new(3, gens, mu).unwrap();
        p.extend(0, 4);
        let v = p.shift(1);
        for n in 0..=3 {
            let lhs = v.position(n);
            let mut word = p.position(1).0;
            word.reverse();
            let inv = Word(word.iter().map(|c| -c).collect());
            let rhs = inv.compose(&p.position(n + 1));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn cylinder_probability_examples() {
        let (gens, mu) = two_gen();
        assert!(cylinder_probability(&mu, &gens, &[]).is_one());
        let x1 = Word(vec![1]);
        let x2 = Word(vec![1, 2]);
        let x3 = Word(vec![1, 2, 1]);
        let p = cylinder_probability(&mu, &gens, &[x1, x2.clone(), x3]);
        assert_eq!(p, BigRational::new(1.into(), 64.into()));
        // inadmissible quotient: jump by a non-generator
        let bad = Word(vec![1, 1, 2, 2]);
        let p0 = cylinder_probability(&mu, &gens, &[x2, bad]);
        assert!(p0.is_zero());
    }

    #[test]
    fn reflected_measure_flips_labels() {
        let (_, mu) = two_gen();
        let refl = mu.reflected();
        for ((l, w), (lr, wr)) in mu.entries().iter().zip(refl.entries()) {
            assert_eq!(w, wr);
            assert_eq!(l.index, lr.index);
            assert_eq!(l.inverse, !lr.inverse);
        }
    }

    #[test]
    fn scripted_path_follows_script() {
        let (gens, mu) = two_gen();
        let mut p = SamplePath::scripted(
            0,
            gens,
            mu,
            vec![Label::gen(0), Label::gen(0), Label::inv(0)],
            vec![],
        )
        .unwrap();
        p.extend(0, 3);
        assert_eq!(p.position(2), Word(vec![1, 1]));
        assert_eq!(p.position(3), Word(vec![1]));
    }

    proptest! {
        #[test]
        fn shift_algebra(seed in 0u64..1000, k in -4i64..4, l in -4i64..4, n in -4i64..4) {
            let (gens, mu) = two_gen();
            let mut p = SamplePath::new(seed, gens, mu).unwrap();
            p.extend(-20, 20);
            let lhs = p.shift(k).then(l).position(n);
            let rhs = p.shift(k + l).position(n);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn extension_never_changes_positions(seed in 0u64..500) {
            let (gens, mu) = two_gen();
            let mut p = SamplePath::new(seed, gens, mu).unwrap();
            p.extend(-4, 4);
            let before: Vec<_> = (-4..=4).map(|n| p.position(n)).collect();
            p.extend(-9, 9);
            let after: Vec<_> = (-4..=4).map(|n| p.position(n)).collect();
            prop_assert_eq!(before, after);
        }
    }

    /// Monte-Carlo consistency: empirical cylinder frequency vs exact value.
    /// Statistical: asserted at 5 sigma, flagged on stderr at 4 sigma.
    #[test]
    fn cylinder_frequency_matches_probability() {
        let (gens, mu) = two_gen();
        let target: Vec<Word> = {
            let mut p = SamplePath::new(999, gens.clone(), mu.clone()).unwrap();
            p.extend(0, 3);
            (1..=3).map(|n| p.position(n)).collect()
        };
        let p_exact = cylinder_probability(&mu, &gens, &target);
        let p_val = p_exact.numer().to_f64().unwrap() / p_exact.denom().to_f64().unwrap();
        assert!(p_val > 0.0);
        let n_paths = 100_000u64;
        let mut hits = 0u64;
        for s in 0..n_paths {
            let mut p = SamplePath::new(s, gens.clone(), mu.clone()).unwrap();
            p.extend(0, 3);
            if (1..=3).all(|n| p.position(n) == target[(n - 1) as usize]) {
                hits += 1;
            }
        }
        let freq = hits as f64 / n_paths as f64;
        let sigma = (p_val * (1.0 - p_val) / n_paths as f64).sqrt();
        if (freq - p_val).abs() > 4.0 * sigma {
            eprintln!("flag: cylinder frequency {freq} deviates from {p_val} by more than 4 sigma");
        }
        assert!(
            (freq - p_val).abs() <= 5.0 * sigma,
            "freq {freq} vs exact {p_val} (sigma {sigma})"
        );
    }

    /// Negative-side increments follow the reflected measure empirically.
    #[test]
    fn negative_side_law() {
        let (gens, mu) = two_gen();
        let refl = mu.reflected();
        let mut counts: HashMap<Word, u64> = HashMap::new();
        let n_samples = 40_000i64;
        let mut p = SamplePath::new(31337, gens.clone(), mu).unwrap();
        p.extend(-n_samples, 0);
        for n in -n_samples..=-1 {
            let inc = p.position(n + 1).invert().compose(&p.position(n));
            *counts.entry(inc).or_default() += 1;
        }
        for (l, w) in refl.entries() {
            let e = gens.element(*l);
            let expected = w.numer().to_f64().unwrap() / w.denom().to_f64().unwrap();
            let freq = *counts.get(e).unwrap_or(&0) as f64 / n_samples as f64;
            let sigma = (expected * (1.0 - expected) / n_samples as f64).sqrt();
            assert!(
                (freq - expected).abs() <= 5.0 * sigma,
                "label {l:?}: freq {freq} vs {expected}"
            );
        }
    }
}
