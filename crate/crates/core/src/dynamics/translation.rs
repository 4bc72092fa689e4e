use super::{canonical_frame, center_holonomy_closed_form, cone_splitting, DEFAULT_APERTURE, SPLITTING_ITER};
use crate::cxcore::{complexify, realify_vec, CVector, RMatrix, RVector, C64};
use crate::lattices::modulus_reduce;
use crate::zoo::{SystemDescriptor, SystemKind, SystemPoint};
use crate::{Error, Result};
use serde::Serialize;

/// Frames of the unstable (canonical, complex) and stable and center
/// bundles of a system with constant splitting.
struct Frames {
    unstable: RMatrix,
    stable: RMatrix,
    center: RMatrix,
}

fn frames(sys: &SystemDescriptor, x: &SystemPoint) -> Result<Frames> {
    match sys.kind {
        SystemKind::HolomorphicSkewProduct(_) | SystemKind::EllipticQuotient(_) => {}
        _ => return Err(Error::UnsupportedKind { operation: "translation map", kind: sys.kind_name().into() }),
    }
    let split = cone_splitting(sys, x, SPLITTING_ITER, DEFAULT_APERTURE)?;
    Ok(Frames { unstable: canonical_frame(&split.unstable, true), stable: split.stable, center: split.center })
}

/// Splits `p` on the center-unstable plaque of `x` as `Φ_y(t)` with `y` on
/// the center leaf of `x`; returns `y` and the real coordinates of `t` in
/// the canonical unstable frame.
pub fn unstable_projection(sys: &SystemDescriptor, x: &SystemPoint, p: &SystemPoint) -> Result<(SystemPoint, RVector)> {
    let f = frames(sys, x)?;
    project(sys, &f, x, p)
}

fn project(sys: &SystemDescriptor, f: &Frames, x: &SystemPoint, p: &SystemPoint) -> Result<(SystemPoint, RVector)> {
    let d = sys.displacement(x, p)?;
    let (ku, ks, kc) = (f.unstable.ncols(), f.stable.ncols(), f.center.ncols());
    let mut basis = RMatrix::zeros(d.len(), ku + ks + kc);
    basis.columns_mut(0, ku).copy_from(&f.unstable);
    basis.columns_mut(ku, ks).copy_from(&f.stable);
    basis.columns_mut(ku + ks, kc).copy_from(&f.center);
    let coeffs = basis
        .lu()
        .solve(&d)
        .ok_or_else(|| Error::SingularInput("splitting frames are dependent".into()))?;
    let stable_part = (&f.stable * coeffs.rows(ku, ks)).norm();
    if stable_part > 1e-9 * (1.0 + d.norm()) {
        return Err(Error::Relation(format!(
            "point is {stable_part:.3e} off the center-unstable plaque"
        )));
    }
    let y = sys.exp(x, &(&f.center * coeffs.rows(ku + ks, kc)))?;
    Ok((y, coeffs.rows(0, ku).into_owned()))
}

/// `p ↦ Φ_y(Φ_y⁻¹(p) + H^c_{xy}(v))` on the center-unstable plaque of `x`.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationMap {
    pub x: SystemPoint,
    /// Complex coordinates of the translation vector in the canonical
    /// unstable frame at `x`.
    pub v: CVector,
    #[serde(skip)]
    unstable: RMatrix,
    #[serde(skip)]
    stable: RMatrix,
    #[serde(skip)]
    center: RMatrix,
}

pub fn translation_map(sys: &SystemDescriptor, x: &SystemPoint, v: &RVector) -> Result<TranslationMap> {
    let f = frames(sys, x)?;
    let coords = f.unstable.transpose() * v;
    if (v - &f.unstable * &coords).norm() > 1e-9 * (1.0 + v.norm()) {
        return Err(Error::ContractViolation("translation vector is not in the unstable bundle".into()));
    }
    Ok(TranslationMap {
        x: x.clone(),
        v: complexify(&coords),
        unstable: f.unstable,
        stable: f.stable,
        center: f.center,
    })
}

impl TranslationMap {
    pub fn apply(&self, sys: &SystemDescriptor, p: &SystemPoint) -> Result<SystemPoint> {
        let f = Frames {
            unstable: self.unstable.clone(),
            stable: self.stable.clone(),
            center: self.center.clone(),
        };
        let (y, t) = project(sys, &f, &self.x, p)?;
        let h = center_holonomy_closed_form(sys, &self.x, &y)?.map;
        let shifted = t + realify_vec(&h.apply(&self.v));
        // Splittings of these kinds are constant, so the frame at x serves at y.
        sys.exp(&y, &(&f.unstable * shifted))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusScan {
    pub taus: Vec<C64>,
    /// `Σ |τ_{k+1} − τ_k|` in sample order.
    pub total_variation: f64,
}

/// Moduli of the holonomy images of the lattice `⟨v₁, v₂⟩ ⊂ Eᵘ(x)` at
/// points `y` of the center leaf of `x`. On a one-dimensional unstable
/// bundle the two images span the lattice directly; otherwise the second
/// image is projected onto the complex line of the first.
pub fn modulus_scan(
    sys: &SystemDescriptor,
    x: &SystemPoint,
    targets: &[SystemPoint],
    v1: &CVector,
    v2: &CVector,
) -> Result<ModulusScan> {
    let mut taus = Vec::with_capacity(targets.len());
    for y in targets {
        let h = center_holonomy_closed_form(sys, x, y)?.map;
        if v1.len() != h.dim() || v2.len() != h.dim() {
            return Err(Error::ContractViolation(format!("lattice vectors must have {} coordinates", h.dim())));
        }
        let (a, b) = (h.apply(v1), h.apply(v2));
        let (w1, w2) = if h.dim() == 1 {
            (a[0], b[0])
        } else {
            let norm = a.dotc(&a);
            if norm.norm() == 0.0 {
                return Err(Error::DegenerateLattice("first lattice vector maps to zero".into()));
            }
            (C64::new(1.0, 0.0), a.dotc(&b) / norm)
        };
        taus.push(modulus_reduce(w1, w2)?.0.tau);
    }
    let total_variation = taus.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    Ok(ModulusScan { taus, total_variation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxcore::c;
    use crate::zoo::build;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_translation_is_identity_and_maps_preserve_fibers() {
        let sys = build("skew_l1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = sys.sample_point(&mut rng).unwrap();
        let f = frames(&sys, &x).unwrap();
        let zero = translation_map(&sys, &x, &RVector::zeros(6)).unwrap();
        let v = &f.unstable * RVector::from_vec(vec![0.2, -0.1]);
        let t = translation_map(&sys, &x, &v).unwrap();
        for _ in 0..20 {
            let a = RVector::from_fn(2, |_, _| rng.gen_range(-0.3..0.3));
            let cc = RVector::from_fn(2, |_, _| rng.gen_range(-0.3..0.3));
            let p = sys.exp(&sys.exp(&x, &(&f.center * cc)).unwrap(), &(&f.unstable * a)).unwrap();
            assert!(sys.distance(&zero.apply(&sys, &p).unwrap(), &p).unwrap() < 1e-12);
            let q = t.apply(&sys, &p).unwrap();
            let (yp, _) = unstable_projection(&sys, &x, &p).unwrap();
            let (yq, _) = unstable_projection(&sys, &x, &q).unwrap();
            assert!(sys.distance(&yp, &yq).unwrap() < 1e-10);
        }
    }

    #[test]
    fn skew_modulus_constant_along_fiber() {
        let sys = build("skew_l1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = sys.sample_point(&mut rng).unwrap();
        let targets: Vec<_> = (0..20)
            .map(|_| {
                let mut y = x.clone();
                y.coords[2] = c(rng.gen(), rng.gen());
                y
            })
            .collect();
        let one = CVector::from_element(1, c(1.0, 0.0));
        let tau = CVector::from_element(1, c(0.3, 1.2));
        let scan = modulus_scan(&sys, &x, &targets, &one, &tau).unwrap();
        assert!(scan.total_variation < 1e-12);
        assert!((scan.taus[0] - c(0.3, 1.2)).norm() < 1e-12);
    }

    #[test]
    fn blanchard_calabi_modulus_varies() {
        let sys = build("bc_n1").unwrap();
        let SystemKind::BlanchardCalabi(b) = &sys.kind else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sys.sample_point(&mut rng).unwrap();
        let x = b.center_point(&p, 0, c(0.0, 0.0)).unwrap();
        let ys: Vec<_> = [0.0, 0.5].iter().map(|&r| b.center_point(&p, 0, c(r, 0.0)).unwrap()).collect();
        let v1 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let v2 = CVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        let scan = modulus_scan(&sys, &x, &ys, &v1, &v2).unwrap();
        // τ(z) = i(1 − |z|²)/(1 + |z|²), reduced.
        assert!((scan.taus[0] - c(0.0, 1.0)).norm() < 1e-12);
        let expected = modulus_reduce(c(1.0, 0.0), c(0.0, 0.6)).unwrap().0.tau;
        assert!((scan.taus[1] - expected).norm() < 1e-12);
        assert!(scan.total_variation > 0.1);
        let at_one = b.center_point(&p, 0, c(1.0, 0.0)).unwrap();
        assert!(matches!(modulus_scan(&sys, &x, &[at_one], &v1, &v2), Err(Error::DegenerateLattice(_))));
    }

    #[test]
    fn other_kinds_rejected() {
        let sys = build("cat2c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = sys.sample_point(&mut rng).unwrap();
        assert!(matches!(translation_map(&sys, &x, &RVector::zeros(4)), Err(Error::UnsupportedKind { .. })));
    }
}
