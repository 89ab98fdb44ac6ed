//! Boundary limits of walk orbits: the forward (and backward) limit
//! directions in RP^1, estimated from windows of walk increments.
//!
//! The direction of omega_n^{-1} omega_{n+H} converges projectively as H
//! grows (for non-elementary walks). The estimate reports, as its error
//! bound, the angular gap between the half-horizon and full-horizon
//! products plus the inverse singular-value contrast of the product; the
//! latter rejects walks with no hyperbolicity (identity or elliptic
//! products), where the dominant column is meaningless.

use crate::direction::ProjDir;
use crate::{Sl2, TorusError};
use walk_engine::SamplePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Normalized product of f64 matrices with per-step renormalization and an
/// accumulated log scale.
struct NormProduct {
    m: [f64; 4],
    log_scale: f64,
}

impl NormProduct {
    fn identity() -> Self {
        NormProduct {
            m: [1.0, 0.0, 0.0, 1.0],
            log_scale: 0.0,
        }
    }

    fn push_right(&mut self, g: &[f64; 4]) {
        let a = &self.m;
        let mut r = [
            a[0] * g[0] + a[1] * g[2],
            a[0] * g[1] + a[1] * g[3],
            a[2] * g[0] + a[3] * g[2],
            a[2] * g[1] + a[3] * g[3],
        ];
        let scale = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale > 0.0 {
            for v in &mut r {
                *v /= scale;
            }
            self.log_scale += scale.ln();
        }
        self.m = r;
    }

    /// Dominant column as a direction vector.
    fn dominant_column(&self) -> (f64, f64) {
        let c0 = (self.m[0], self.m[2]);
        let c1 = (self.m[1], self.m[3]);
        let n0 = c0.0 * c0.0 + c0.1 * c0.1;
        let n1 = c1.0 * c1.0 + c1.1 * c1.1;
        if n0 >= n1 {
            c0
        } else {
            c1
        }
    }

    /// ln of sigma_1/sigma_2 for the (determinant 1) product: since
    /// sigma_1 sigma_2 = 1, the contrast is sigma_1^2 ~ ||P||_F^2.
    fn ln_contrast(&self) -> f64 {
        let frob_sq = self.m.iter().map(|v| v * v).sum::<f64>();
        2.0 * self.log_scale + frob_sq.ln()
    }
}

fn window_direction<F: Fn(i64) -> [f64; 4]>(step: F, horizon: i64) -> (ProjDir, f64) {
    assert!(horizon >= 2);
    let mut prod = NormProduct::identity();
    let mut half_dir: Option<(f64, f64)> = None;
    for k in 0..horizon {
        prod.push_right(&step(k));
        if k + 1 == horizon / 2 {
            half_dir = Some(prod.dominant_column());
        }
    }
    let (fx, fy) = prod.dominant_column();
    let full = ProjDir::approx(fx, fy, 0.0);
    let (hx, hy) = half_dir.unwrap();
    let gap = full.angular_gap(&ProjDir::approx(hx, hy, 0.0));
    let err = gap + (-prod.ln_contrast()).exp();
    (ProjDir::approx(fx, fy, err), err)
}

/// Direction of the product of steps n+1 .. n+horizon (the forward limit
/// seen from fiber n), with its error bound.
pub fn forward_direction(path: &SamplePath<Sl2>, n: i64, horizon: i64) -> (ProjDir, f64) {
    window_direction(|k| path.step_forward(n + k).to_f64_matrix(), horizon)
}

/// Direction of the product omega_n^{-1} omega_{n-horizon} (the backward
/// limit seen from fiber n), with its error bound.
pub fn backward_direction(path: &SamplePath<Sl2>, n: i64, horizon: i64) -> (ProjDir, f64) {
    window_direction(
        |k| invert_f64(&path.step_forward(n - k - 1).to_f64_matrix()),
        horizon,
    )
}

fn invert_f64(m: &[f64; 4]) -> [f64; 4] {
    // determinant 1
    [m[3], -m[1], -m[2], m[0]]
}

/// Estimated limit direction F_{+-}(omega) with convergence control:
/// fails with `NotConverged` when the error bound exceeds `tol` (horizon too
/// short, or a degenerate/elementary generator set).
pub fn boundary_limit(
    path: &SamplePath<Sl2>,
    side: Side,
    horizon: i64,
    tol: f64,
) -> Result<ProjDir, TorusError> {
    let (dir, err) = match side {
        Side::Plus => forward_direction(path, 0, horizon),
        Side::Minus => backward_direction(path, 0, horizon),
    };
    if !err.is_finite() || err > tol {
        return Err(TorusError::NotConverged { gap: err, tol });
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::eigen_directions;
    use std::sync::Arc;
    use walk_engine::{GeneratorSet, Group, Label, ProbabilityMeasure};

    fn deterministic_path(g: Sl2, n: i64) -> SamplePath<Sl2> {
        let gens = Arc::new(GeneratorSet::new(vec![("g".into(), g)]));
        let mu = ProbabilityMeasure::uniform(vec![Label::gen(0)]);
        let mut p = SamplePath::new(0, gens, mu).unwrap();
        p.extend(-n, n);
        p
    }

    #[test]
    fn deterministic_walk_converges_to_expanding_eigendirection() {
        let g = Sl2::from_i64([2, 1, 1, 1]).unwrap();
        let p = deterministic_path(g.clone(), 64);
        let dir = boundary_limit(&p, Side::Plus, 40, 1e-9).unwrap();
        let (exp, con) = eigen_directions(&g).unwrap();
        assert!(dir.angular_gap(&exp) < 1e-9);
        // backward limit is the contracting eigendirection
        let dirm = boundary_limit(&p, Side::Minus, 40, 1e-9).unwrap();
        assert!(dirm.angular_gap(&con) < 1e-9);
    }

    #[test]
    fn identity_walk_does_not_converge() {
        let p = deterministic_path(Sl2::identity(), 64);
        assert!(matches!(
            boundary_limit(&p, Side::Plus, 40, 1e-6),
            Err(TorusError::NotConverged { .. })
        ));
    }

    #[test]
    fn random_walk_limits_converge() {
        let a = Sl2::from_i64([2, 1, 1, 1]).unwrap();
        let b = Sl2::from_i64([1, 1, 1, 2]).unwrap();
        let gens = Arc::new(GeneratorSet::new(vec![("A".into(), a), ("B".into(), b)]));
        let mu = ProbabilityMeasure::uniform(vec![
            Label::gen(0),
            Label::inv(0),
            Label::gen(1),
            Label::inv(1),
        ]);
        for seed in 0..5 {
            let mut p = SamplePath::new(seed, gens.clone(), mu.clone()).unwrap();
            p.extend(-300, 300);
            let d = boundary_limit(&p, Side::Plus, 250, 1e-6).unwrap();
            assert!(d.err() <= 1e-6);
        }
    }

    #[test]
    fn shifted_limit_is_equivariant() {
        // F_+(theta^n omega) = omega_n^{-1} F_+(omega)
        let g = Sl2::from_i64([2, 1, 1, 1]).unwrap();
        let p = deterministic_path(g.clone(), 128);
        let tol = 1e-8;
        let (base, _) = forward_direction(&p, 0, 60);
        for n in [1i64, 3, 7] {
            let (shifted, _) = forward_direction(&p, n, 60);
            let moved = base.act(&p.position(n).invert());
            assert!(
                shifted.angular_gap(&moved) < 2.0 * tol,
                "n = {n}: gap {}",
                shifted.angular_gap(&moved)
            );
        }
    }
}
