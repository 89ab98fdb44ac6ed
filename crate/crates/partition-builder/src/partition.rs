//! Birectangle partitions and the operations between consecutive fibers:
//! pullbacks, the common-refinement cut, boundary-inclusion and
//! single-intersection (semi-Markov) checks, and transition matrices.

use crate::frame::FiberFrame;
use crate::PartitionError;
use qfield::{GeomScalar, Sign};
use rsft::{Mat01, RandomSft};

/// Parameter extents of the two cut arcs through the marked point:
/// tau covers xi in [-tau_minus, tau_plus], eta covers
/// upsilon in [-eta_minus, eta_plus]; all four values positive.
#[derive(Debug, Clone)]
pub struct ArcRanges<S> {
    pub tau_plus: S,
    pub tau_minus: S,
    pub eta_plus: S,
    pub eta_minus: S,
}

impl<S: GeomScalar> ArcRanges<S> {
    /// Scale by a (possibly negative) factor; negative factors flip the
    /// two sides of an arc.
    fn scaled(&self, s_tau: &S, s_eta: &S) -> Result<ArcRanges<S>, PartitionError> {
        let flip = |plus: &S, minus: &S, s: &S| -> Result<(S, S), PartitionError> {
            match s.sign()? {
                Sign::Pos => Ok((plus.mul(s), minus.mul(s))),
                Sign::Neg => {
                    let a = s.abs();
                    Ok((minus.mul(&a), plus.mul(&a)))
                }
                Sign::Zero => Err(PartitionError::Invariant("zero scale factor".into())),
            }
        };
        let (tau_plus, tau_minus) = flip(&self.tau_plus, &self.tau_minus, s_tau)?;
        let (eta_plus, eta_minus) = flip(&self.eta_plus, &self.eta_minus, s_eta)?;
        Ok(ArcRanges {
            tau_plus,
            tau_minus,
            eta_plus,
            eta_minus,
        })
    }

    /// Interval containment [-self.minus, self.plus] within the other.
    fn contained_in(&self, other: &ArcRanges<S>, tau: bool) -> Result<bool, PartitionError> {
        if tau {
            Ok(self.tau_plus.le(&other.tau_plus)? && self.tau_minus.le(&other.tau_minus)?)
        } else {
            Ok(self.eta_plus.le(&other.eta_plus)? && self.eta_minus.le(&other.eta_minus)?)
        }
    }
}

/// A birectangle: the lift [xi0, xi0+xi_len] x [up0, up0+up_len] in oblique
/// coordinates, embedded on the torus.
#[derive(Debug, Clone)]
pub struct Birect<S> {
    pub xi0: S,
    pub up0: S,
    pub xi_len: S,
    pub up_len: S,
}

impl<S: GeomScalar> Birect<S> {
    fn scaled(&self, s_xi: &S, s_up: &S) -> Result<Birect<S>, PartitionError> {
        let map_interval = |lo: &S, len: &S, s: &S| -> Result<(S, S), PartitionError> {
            match s.sign()? {
                Sign::Pos => Ok((lo.mul(s), len.mul(s))),
                Sign::Neg => Ok((lo.add(len).mul(s), len.mul(&s.abs()))),
                Sign::Zero => Err(PartitionError::Invariant("zero scale factor".into())),
            }
        };
        let (xi0, xi_len) = map_interval(&self.xi0, &self.xi_len, s_xi)?;
        let (up0, up_len) = map_interval(&self.up0, &self.up_len, s_up)?;
        Ok(Birect {
            xi0,
            up0,
            xi_len,
            up_len,
        })
    }
}

/// A birectangle partition of one fiber, together with its generating cut
/// arcs (the partition boundary: d_h = tau, d_v = eta).
#[derive(Debug, Clone)]
pub struct Partition<S: GeomScalar> {
    pub frame: FiberFrame<S>,
    pub ranges: ArcRanges<S>,
    pub rects: Vec<Birect<S>>,
}

impl<S: GeomScalar> Partition<S> {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Map the partition into another frame along the diagonal action
    /// fixing the foliations: xi scales by s_plus, upsilon by s_minus.
    pub fn mapped(
        &self,
        frame_new: FiberFrame<S>,
        s_plus: &S,
        s_minus: &S,
    ) -> Result<Partition<S>, PartitionError> {
        let ranges = self.ranges.scaled(s_plus, s_minus)?;
        let rects = self
            .rects
            .iter()
            .map(|r| r.scaled(s_plus, s_minus))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Partition {
            frame: frame_new,
            ranges,
            rects,
        })
    }

    /// Maximum vertical (mu_plus) side length, the V monitor.
    pub fn max_vertical_length(&self) -> f64 {
        self.rects
            .iter()
            .map(|r| self.frame.v_length(&r.up_len))
            .fold(0.0, f64::max)
    }

    pub fn max_horizontal_length(&self) -> f64 {
        self.rects
            .iter()
            .map(|r| self.frame.h_length(&r.xi_len))
            .fold(0.0, f64::max)
    }

    /// Which rectangle contains the torus point with standard coordinates
    /// (x, y), if the point lies in some interior.
    pub fn locate(&self, x: &S, y: &S) -> Result<Option<usize>, PartitionError> {
        let (xi, up) = self.frame.to_oblique(x.clone(), y.clone());
        for (i, r) in self.rects.iter().enumerate() {
            // candidate translates from f64 windows
            let dx = xi.to_f64() - r.xi0.to_f64();
            let du = up.to_f64() - r.up0.to_f64();
            // lattice vector near (dx, du) in oblique coords
            let up_f = [
                self.frame.u_plus[0].to_f64(),
                self.frame.u_plus[1].to_f64(),
            ];
            let um_f = [
                self.frame.u_minus[0].to_f64(),
                self.frame.u_minus[1].to_f64(),
            ];
            let mx = dx * up_f[0] + du * um_f[0];
            let my = dx * up_f[1] + du * um_f[1];
            for m1 in (mx.floor() as i64 - 2)..=(mx.ceil() as i64 + 2) {
                for m2 in (my.floor() as i64 - 2)..=(my.ceil() as i64 + 2) {
                    let (lxi, lup) = self.frame.lattice_coords(m1, m2);
                    let txi = xi.sub(&lxi);
                    let tup = up.sub(&lup);
                    let inside = r.xi0.lt(&txi)?
                        && txi.lt(&r.xi0.add(&r.xi_len))?
                        && r.up0.lt(&tup)?
                        && tup.lt(&r.up0.add(&r.up_len))?;
                    if inside {
                        return Ok(Some(i));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Lattice translates at which two rectangle interiors overlap on the
/// torus (both rectangles in the same frame).
pub fn overlap_translates<S: GeomScalar>(
    frame: &FiberFrame<S>,
    r1: &Birect<S>,
    r2: &Birect<S>,
) -> Result<Vec<(i64, i64)>, PartitionError> {
    // translate t (oblique coords of a lattice vector) must satisfy
    // r2 + t overlapping r1 in both coordinates (open)
    let xi_lo = r1.xi0.to_f64() - (r2.xi0.to_f64() + r2.xi_len.to_f64());
    let xi_hi = r1.xi0.to_f64() + r1.xi_len.to_f64() - r2.xi0.to_f64();
    let up_lo = r1.up0.to_f64() - (r2.up0.to_f64() + r2.up_len.to_f64());
    let up_hi = r1.up0.to_f64() + r1.up_len.to_f64() - r2.up0.to_f64();
    let up_f = [frame.u_plus[0].to_f64(), frame.u_plus[1].to_f64()];
    let um_f = [frame.u_minus[0].to_f64(), frame.u_minus[1].to_f64()];
    let mut m1_lo = f64::INFINITY;
    let mut m1_hi = f64::NEG_INFINITY;
    let mut m2_lo = f64::INFINITY;
    let mut m2_hi = f64::NEG_INFINITY;
    for &xi in &[xi_lo, xi_hi] {
        for &up in &[up_lo, up_hi] {
            let c1 = xi * up_f[0] + up * um_f[0];
            let c2 = xi * up_f[1] + up * um_f[1];
            m1_lo = m1_lo.min(c1);
            m1_hi = m1_hi.max(c1);
            m2_lo = m2_lo.min(c2);
            m2_hi = m2_hi.max(c2);
        }
    }
    let mut out = Vec::new();
    for m1 in (m1_lo.floor() as i64 - 1)..=(m1_hi.ceil() as i64 + 1) {
        for m2 in (m2_lo.floor() as i64 - 1)..=(m2_hi.ceil() as i64 + 1) {
            let (txi, tup) = frame.lattice_coords(m1, m2);
            let a_lo = r2.xi0.add(&txi);
            let a_hi = a_lo.add(&r2.xi_len);
            let b_lo = r2.up0.add(&tup);
            let b_hi = b_lo.add(&r2.up_len);
            let xi_overlap =
                a_lo.lt(&r1.xi0.add(&r1.xi_len))? && r1.xi0.lt(&a_hi)?;
            let up_overlap =
                b_lo.lt(&r1.up0.add(&r1.up_len))? && r1.up0.lt(&b_hi)?;
            if xi_overlap && up_overlap {
                out.push((m1, m2));
            }
        }
    }
    Ok(out)
}

/// Findings of the semi-Markov checks between consecutive fibers.
#[derive(Debug, Clone, Default)]
pub struct SemiMarkovReport {
    /// (fiber index offset, description)
    pub m1_violations: Vec<(usize, String)>,
    pub m2_violations: Vec<(usize, String)>,
    /// full-crossing structure failures (Markov property diagnostics)
    pub crossing_violations: Vec<(usize, String)>,
}

impl SemiMarkovReport {
    pub fn is_clean(&self) -> bool {
        self.m1_violations.is_empty() && self.m2_violations.is_empty()
    }
}

/// Check (M1) boundary inclusions and (M2) single-birectangle intersections
/// along a sequence of partitions, where `maps[k] = (s_plus, s_minus)`
/// carries fiber k+1 into the frame of fiber k.
pub fn check_semi_markov<S: GeomScalar>(
    partitions: &[Partition<S>],
    maps: &[(S, S)],
) -> Result<SemiMarkovReport, PartitionError> {
    assert_eq!(partitions.len(), maps.len() + 1);
    let mut report = SemiMarkovReport::default();
    for k in 0..maps.len() {
        let cur = &partitions[k];
        let (sp, sm) = &maps[k];
        let nxt = partitions[k + 1].mapped(cur.frame.clone(), sp, sm)?;
        // (M1): tau_n inside mapped tau_{n+1}; eta_n contains mapped eta_{n+1}
        if !cur.ranges.contained_in(&nxt.ranges, true)? {
            report
                .m1_violations
                .push((k, "horizontal boundary not nested forward".into()));
        }
        if !nxt.ranges.contained_in(&cur.ranges, false)? {
            report
                .m1_violations
                .push((k, "vertical boundary not nested backward".into()));
        }
        // (M2): each pair of interiors meets in at most one translate, and
        // the intersection crosses fully (xi from the earlier fiber)
        for (i, r) in cur.rects.iter().enumerate() {
            for (j, rp) in nxt.rects.iter().enumerate() {
                let translates = overlap_translates(&cur.frame, r, rp)?;
                if translates.len() > 1 {
                    report.m2_violations.push((
                        k,
                        format!(
                            "rectangles {i} and {j} meet in {} components (translates {:?})",
                            translates.len(),
                            translates
                        ),
                    ));
                } else if translates.len() == 1 {
                    let (m1, m2) = translates[0];
                    let (txi, tup) = cur.frame.lattice_coords(m1, m2);
                    // full crossing: r.xi inside translated rp.xi, and
                    // translated rp.up inside r.up
                    let a_lo = rp.xi0.add(&txi);
                    let a_hi = a_lo.add(&rp.xi_len);
                    let xi_crossed = a_lo.le(&r.xi0)?
                        && r.xi0.add(&r.xi_len).le(&a_hi)?;
                    let b_lo = rp.up0.add(&tup);
                    let b_hi = b_lo.add(&rp.up_len);
                    let up_crossed = r.up0.le(&b_lo)?
                        && b_hi.le(&r.up0.add(&r.up_len))?;
                    if !xi_crossed || !up_crossed {
                        report.crossing_violations.push((
                            k,
                            format!("rectangles {i} and {j} do not cross fully"),
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Transition matrices of the associated random subshift: entry (i, j) of
/// A(k) is 1 when the interiors of rectangle i at fiber k and rectangle j
/// at fiber k+1 (mapped) intersect.
pub fn transition_matrices<S: GeomScalar>(
    partitions: &[Partition<S>],
    maps: &[(S, S)],
    n_min: i64,
) -> Result<RandomSft, PartitionError> {
    assert_eq!(partitions.len(), maps.len() + 1);
    let k_sizes: Vec<usize> = partitions.iter().map(|p| p.len()).collect();
    let mut mats = Vec::new();
    for k in 0..maps.len() {
        let cur = &partitions[k];
        let (sp, sm) = &maps[k];
        let nxt = partitions[k + 1].mapped(cur.frame.clone(), sp, sm)?;
        let mut m = Mat01::new(cur.len(), nxt.len());
        for (i, r) in cur.rects.iter().enumerate() {
            for (j, rp) in nxt.rects.iter().enumerate() {
                if !overlap_translates(&cur.frame, r, rp)?.is_empty() {
                    m.set(i, j, true);
                }
            }
        }
        mats.push(m);
    }
    RandomSft::new(n_min, k_sizes, mats)
        .map_err(|e| PartitionError::Invariant(format!("subshift shape: {e}")))
}

/// The common refinement cut: rectangles of the subdivision of the torus by
/// the horizontal boundary of `finer_h` and the vertical boundary of
/// `finer_v`. Boundary-inclusion preconditions are validated: the chain
/// finer_v, base, finer_h must have nested tau (increasing) and eta
/// (decreasing).
pub fn refine<S: GeomScalar>(
    base: &Partition<S>,
    finer_h: &Partition<S>,
    finer_v: &Partition<S>,
) -> Result<Partition<S>, PartitionError> {
    let ok = finer_v.ranges.contained_in(&base.ranges, true)?
        && base.ranges.contained_in(&finer_h.ranges, true)?
        && finer_h.ranges.contained_in(&base.ranges, false)?
        && base.ranges.contained_in(&finer_v.ranges, false)?;
    if !ok {
        return Err(PartitionError::InclusionViolated(
            "tau must grow and eta must shrink along (finer_v, base, finer_h)".into(),
        ));
    }
    let ranges = ArcRanges {
        tau_plus: finer_h.ranges.tau_plus.clone(),
        tau_minus: finer_h.ranges.tau_minus.clone(),
        eta_plus: finer_v.ranges.eta_plus.clone(),
        eta_minus: finer_v.ranges.eta_minus.clone(),
    };
    let rects = crate::cross::cross_partition(&base.frame, &ranges)?;
    Ok(Partition {
        frame: base.frame.clone(),
        ranges,
        rects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross::build_partition;
    use crate::frame::{axis_point_near_foot, exact_frame_from_matrix};
    use qfield::QuadVal;
    use torus_model::direction::eigen_directions;
    use torus_model::{ProjDir, Sl2};

    fn golden() -> Sl2 {
        Sl2::from_i64([2, 1, 1, 1]).unwrap()
    }

    fn golden_frame() -> FiberFrame<QuadVal> {
        let g = golden();
        let z = axis_point_near_foot(&g).unwrap();
        exact_frame_from_matrix(&g, z).unwrap()
    }

    /// Eigenvalue scalars of the deterministic walk: mapping fiber n+1
    /// into fiber n multiplies xi by lambda and upsilon by 1/lambda... the
    /// relative matrix is g itself acting on the (constant) frame.
    fn golden_scalars(frame: &FiberFrame<QuadVal>) -> (QuadVal, QuadVal) {
        let g = golden();
        let (exp, con) = eigen_directions(&g).unwrap();
        let (ex, ey) = match exp {
            ProjDir::Exact { x, y } => (x, y),
            _ => unreachable!(),
        };
        // s_plus: g u_plus = s_plus u_plus
        let gx = QuadVal::from_int(2).mul(&ex).add(&ey);
        let s_plus = gx.div(&frame.u_plus[0]);
        let _ = con;
        // determinant 1: s_plus * s_minus = 1
        let s_minus = QuadVal::one().div(&s_plus);
        (s_plus, s_minus)
    }

    #[test]
    fn deterministic_chain_is_semi_markov_with_constant_transitions() {
        let frame = golden_frame();
        let base = build_partition(&frame).unwrap();
        let (sp, sm) = golden_scalars(&frame);
        // fibers are identical; the final partitions are the refinement of
        // the neighbor pullbacks
        let next_pulled = base
            .mapped(frame.clone(), &sp, &sm)
            .unwrap();
        let prev_pulled = base
            .mapped(frame.clone(), &QuadVal::one().div(&sp), &QuadVal::one().div(&sm))
            .unwrap();
        let refined = refine(&base, &next_pulled, &prev_pulled).unwrap();
        assert!(refined.len() >= base.len());
        // constant chain of refined partitions
        let chain: Vec<_> = (0..4).map(|_| refined.clone()).collect();
        let maps: Vec<_> = (0..3).map(|_| (sp.clone(), sm.clone())).collect();
        let report = check_semi_markov(&chain, &maps).unwrap();
        assert!(report.is_clean(), "{report:?}");
        assert!(report.crossing_violations.is_empty(), "{report:?}");
        let sft = transition_matrices(&chain, &maps, 0).unwrap();
        assert!(sft.validate().is_empty());
        // Perron root of the constant transition matrix is (3+sqrt(5))/2
        let target = (3.0 + 5.0f64.sqrt()) / 2.0;
        let c1 = sft.count_cylinders(0, 0, 1).unwrap();
        let c3 = sft.count_cylinders(0, 0, 3).unwrap();
        let growth = (qfield::ln_biguint(&c3) - qfield::ln_biguint(&c1)) / 2.0;
        assert!(
            (growth - target.ln()).abs() < 0.25,
            "rough growth {growth} vs {}",
            target.ln()
        );
    }

    #[test]
    fn refine_of_itself_is_identity() {
        let frame = golden_frame();
        let p = build_partition(&frame).unwrap();
        let r = refine(&p, &p, &p).unwrap();
        assert_eq!(r.len(), p.len());
        // same rectangle multiset: compare sorted extents
        let key = |b: &Birect<QuadVal>| (b.xi_len.to_f64(), b.up_len.to_f64());
        let mut k1: Vec<_> = p.rects.iter().map(key).collect();
        let mut k2: Vec<_> = r.rects.iter().map(key).collect();
        k1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in k1.iter().zip(&k2) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_never_decreases_rectangle_count() {
        let frame = golden_frame();
        let base = build_partition(&frame).unwrap();
        let (sp, sm) = golden_scalars(&frame);
        let finer_h = base.mapped(frame.clone(), &sp, &sm).unwrap();
        let finer_v = base
            .mapped(frame.clone(), &QuadVal::one().div(&sp), &QuadVal::one().div(&sm))
            .unwrap();
        let refined = refine(&base, &finer_h, &finer_v).unwrap();
        assert!(refined.len() >= base.len());
    }

    #[test]
    fn inclusion_precondition_is_enforced() {
        let frame = golden_frame();
        let base = build_partition(&frame).unwrap();
        let (sp, sm) = golden_scalars(&frame);
        // wrong order: shrinking tau as "finer_h"
        let shrunk = base
            .mapped(frame.clone(), &QuadVal::one().div(&sp), &QuadVal::one().div(&sm))
            .unwrap();
        let grown = base.mapped(frame.clone(), &sp, &sm).unwrap();
        assert!(matches!(
            refine(&base, &shrunk, &grown),
            Err(PartitionError::InclusionViolated(_))
        ));
    }

    #[test]
    fn identity_step_gives_identity_pattern() {
        let frame = golden_frame();
        let p = build_partition(&frame).unwrap();
        let chain = vec![p.clone(), p.clone()];
        let maps = vec![(QuadVal::one(), QuadVal::one())];
        let sft = transition_matrices(&chain, &maps, 0).unwrap();
        let m = sft.matrix(0).unwrap();
        for i in 0..m.rows {
            for j in 0..m.cols {
                assert_eq!(m.get(i, j), i == j, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn fault_injection_is_detected() {
        let frame = golden_frame();
        let base = build_partition(&frame).unwrap();
        let (sp, sm) = golden_scalars(&frame);
        let next_pulled = base.mapped(frame.clone(), &sp, &sm).unwrap();
        let prev_pulled = base
            .mapped(frame.clone(), &QuadVal::one().div(&sp), &QuadVal::one().div(&sm))
            .unwrap();
        let refined = refine(&base, &next_pulled, &prev_pulled).unwrap();
        let mut perturbed = refined.clone();
        // shift one rectangle by an incommensurate offset
        let delta = QuadVal::from_ratio(1, 97);
        perturbed.rects[0].xi0 = perturbed.rects[0].xi0.add(&delta);
        perturbed.rects[0].xi_len = perturbed.rects[0].xi_len.add(&delta);
        let chain = vec![refined.clone(), perturbed];
        let maps = vec![(sp.clone(), sm.clone())];
        let report = check_semi_markov(&chain, &maps).unwrap();
        assert!(
            !report.m2_violations.is_empty() || !report.crossing_violations.is_empty(),
            "perturbation went unnoticed: {report:?}"
        );
    }
}
