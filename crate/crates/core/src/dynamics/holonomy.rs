use super::splitting::seed_frame;
use super::{canonical_frame, step_back, DEFAULT_APERTURE};
use crate::cxcore::{RLinearMap, RMatrix};
use crate::zoo::{SystemDescriptor, SystemPoint};
use crate::{Error, Result};
use serde::Serialize;

pub const HOLONOMY_TOL: f64 = 1e-10;
pub const HOLONOMY_MAX_ITER: usize = 200;
/// Backward orbits of related points must come this close ...
pub const RELATION_TOL: f64 = 1e-6;
/// ... within this many steps.
pub const RELATION_STEPS: usize = 80;
/// Steps used to settle the unstable frame before the first stored one.
const BURN_IN: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Unstable,
    Stable,
    Center,
}

/// A linear identification between bundle fibers at two related points, in
/// the canonical frames of those fibers.
#[derive(Debug, Clone, Serialize)]
pub struct HolonomyProbe {
    pub source: SystemPoint,
    pub target: SystemPoint,
    pub relation: Relation,
    pub map: RLinearMap,
    /// Distance between successive approximations.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Unstable frames along the backward orbit of a point.
///
/// `points[k] = f⁻ᵏ(x)` and `frames[k]` is an orthonormal basis of `Eᵘ` at
/// that point, obtained by pushing a generic frame forward from deep in the
/// past. `gains[k]` satisfies `Dfᵏ·frames[k] = frames[0]·gains[k]`.
#[derive(Debug, Clone)]
pub struct BackwardFrames {
    pub points: Vec<SystemPoint>,
    pub frames: Vec<RMatrix>,
    pub gains: Vec<RMatrix>,
}

impl BackwardFrames {
    pub fn new(sys: &SystemDescriptor, x: &SystemPoint, depth: usize) -> Result<Self> {
        let total = depth + BURN_IN;
        let mut points = vec![x.clone()];
        for k in 0..total {
            points.push(step_back(sys, &points[k])?);
        }
        let tangents = points[1..]
            .iter()
            .map(|p| sys.tangent_real(p))
            .collect::<Result<Vec<_>>>()?;
        // tangents[k] maps points[k + 1] to points[k].
        let u = sys.block_dims().unstable;
        let mut frame = seed_frame(sys.real_dim(), u, DEFAULT_APERTURE, 1);
        let mut frames = vec![RMatrix::zeros(0, 0); depth + 1];
        let mut steps = vec![RMatrix::zeros(0, 0); depth + 1];
        for k in (0..total).rev() {
            let image = &tangents[k] * &frame;
            let qr = image.qr();
            frame = qr.q().columns(0, u).into_owned();
            if k < depth {
                // Df·frames[k + 1] = frames[k]·R.
                steps[k + 1] = qr.r().rows(0, u).into_owned();
            }
            if k <= depth {
                frames[k] = frame.clone();
            }
        }
        let mut gains = vec![RMatrix::identity(u, u)];
        for k in 1..=depth {
            gains.push(&gains[k - 1] * &steps[k]);
        }
        points.truncate(depth + 1);
        Ok(Self { points, frames, gains })
    }

    /// `Df⁻ᵏ` applied to the vector `frames[0]·c`, as a tangent vector at
    /// `f⁻ᵏ(x)`.
    pub fn pull_back(&self, k: usize, c: &crate::cxcore::RVector) -> Result<crate::cxcore::RVector> {
        let lu = self.gains[k].clone().lu();
        let coeffs = lu
            .solve(c)
            .ok_or_else(|| Error::SingularInput("unstable gain is not invertible".into()))?;
        Ok(&self.frames[k] * coeffs)
    }

    pub fn unstable(&self) -> &RMatrix {
        &self.frames[0]
    }
}

fn check_unstable_relation(sys: &SystemDescriptor, x: &SystemPoint, y: &SystemPoint) -> Result<()> {
    // Rounding off the leaf grows under f⁻¹, so only the closest approach
    // along the backward orbits is meaningful.
    let (mut a, mut b) = (x.clone(), y.clone());
    let mut closest = sys.distance(&a, &b)?;
    for _ in 0..RELATION_STEPS {
        if closest < RELATION_TOL {
            return Ok(());
        }
        a = sys.evaluate_inverse(&a)?;
        b = sys.evaluate_inverse(&b)?;
        closest = closest.min(sys.distance(&a, &b)?);
    }
    if closest < RELATION_TOL {
        return Ok(());
    }
    Err(Error::Relation(format!(
        "backward orbits come no closer than {closest:.3e} in {RELATION_STEPS} steps"
    )))
}

/// `H = lim Dfⁿ(f⁻ⁿy) ∘ I ∘ Df⁻ⁿ(x)` on `Eᵘ(x)`, with `I` the identity of
/// the flat chart, stopped when successive terms differ by less than `tol`.
pub fn unstable_holonomy(
    sys: &SystemDescriptor,
    x: &SystemPoint,
    y: &SystemPoint,
    tol: f64,
    n_max: usize,
) -> Result<HolonomyProbe> {
    if !sys.has_points() {
        return Err(Error::UnsupportedKind { operation: "unstable holonomy", kind: sys.kind_name().into() });
    }
    check_unstable_relation(sys, x, y)?;
    let fx = BackwardFrames::new(sys, x, n_max)?;
    let fy = BackwardFrames::new(sys, y, 0)?;
    let complex = sys.is_holomorphic();
    let frame_x = canonical_frame(fx.unstable(), complex);
    let frame_y = canonical_frame(fy.unstable(), complex);
    // Coordinates of frames[0] in the canonical frame at x.
    let to_canonical = frame_x.transpose() * fx.unstable();
    let mut y_orbit = vec![y.clone()];
    let mut y_tangents: Vec<RMatrix> = Vec::new();
    let mut history = Vec::new();
    let mut previous: Option<RMatrix> = None;
    for n in 1..=n_max {
        let yn = step_back(sys, &y_orbit[n - 1])?;
        y_tangents.push(sys.tangent_real(&yn)?);
        y_orbit.push(yn);
        if fx.points[n].chart != y_orbit[n].chart {
            return Err(Error::ContractViolation(format!("backward orbits use different charts at step {n}")));
        }
        // Dfⁿ(f⁻ⁿy)·frames[n], pushed forward along the orbit of y.
        let mut image = fx.frames[n].clone();
        for t in y_tangents.iter().rev() {
            image = t * image;
        }
        let gain_inv = (&to_canonical * &fx.gains[n])
            .try_inverse()
            .ok_or_else(|| Error::SingularInput("unstable gain is not invertible".into()))?;
        let h = frame_y.transpose() * image * gain_inv;
        if let Some(prev) = &previous {
            let gap = (&h - prev).norm();
            history.push(gap);
            if gap < tol {
                return Ok(HolonomyProbe {
                    source: x.clone(),
                    target: y.clone(),
                    relation: Relation::Unstable,
                    map: RLinearMap::from_real_matrix(&h)?,
                    history,
                    iterations: n,
                });
            }
        }
        previous = Some(h);
    }
    Err(Error::NonConvergence {
        iterations: n_max,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::unstable_point;
    use crate::zoo::build;
    use crate::cxcore::RVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn neighbor(sys: &SystemDescriptor, x: &SystemPoint, rng: &mut ChaCha8Rng, scale: f64) -> SystemPoint {
        let frames = BackwardFrames::new(sys, x, 0).unwrap();
        let u = frames.unstable().ncols();
        let c = RVector::from_fn(u, |_, _| scale * rng.gen_range(-1.0..1.0));
        let v = frames.unstable() * c;
        unstable_point(sys, x, &v, 1e-13, 200).unwrap()
    }

    #[test]
    fn identity_and_composition() {
        for name in ["cat2c", "skew_l1", "bc_n1", "mobius_elliptic"] {
            let sys = build(name).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let x = sys.sample_point(&mut rng).unwrap();
            let id = unstable_holonomy(&sys, &x, &x, HOLONOMY_TOL, HOLONOMY_MAX_ITER).unwrap();
            let k = id.map.dim();
            assert!((id.map.linear.clone() - crate::cxcore::CMatrix::identity(k, k)).norm() < 1e-12);
            let y = neighbor(&sys, &x, &mut rng, 0.05);
            let z = neighbor(&sys, &y, &mut rng, 0.05);
            let hxy = unstable_holonomy(&sys, &x, &y, HOLONOMY_TOL, HOLONOMY_MAX_ITER).unwrap();
            let hyz = unstable_holonomy(&sys, &y, &z, HOLONOMY_TOL, HOLONOMY_MAX_ITER).unwrap();
            let hxz = unstable_holonomy(&sys, &x, &z, HOLONOMY_TOL, HOLONOMY_MAX_ITER).unwrap();
            let comp = hyz.map.compose(&hxy.map);
            let err = (comp.to_real_matrix() - hxz.map.to_real_matrix()).norm();
            assert!(err < 1e-8, "{name}: composition error {err}");
            assert!(hxy.map.dbar_norm() < 1e-8, "{name}");
            assert!(hxz.iterations <= 60);
        }
    }

    #[test]
    fn unrelated_points_rejected() {
        let sys = build("cat2c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = sys.sample_point(&mut rng).unwrap();
        let y = sys.sample_point(&mut rng).unwrap();
        assert!(matches!(unstable_holonomy(&sys, &x, &y, HOLONOMY_TOL, 50), Err(Error::Relation(_))));
    }
}
