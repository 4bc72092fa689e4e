use super::{unit, BlockDims, PointDynamics, SystemPoint, TorusAutomorphism};
use crate::cxcore::{complexify, realify, realify_vec, CMatrix, CVector, RMatrix, RVector, C64};
use crate::lattices::Lattice;
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// `(ẑ, w) ↦ (A·ẑ, w + ℓ(ẑ))` on a base torus times an elliptic curve.
#[derive(Debug, Clone, Serialize)]
pub struct SkewProduct {
    pub base: TorusAutomorphism,
    pub fiber: Lattice,
    /// Coefficients of the ℂ-linear twist `ℓ(ẑ) = Σ ℓₖ ẑₖ`.
    pub twist: Vec<C64>,
}

impl SkewProduct {
    pub fn new(base: TorusAutomorphism, fiber: Lattice, twist: Vec<C64>) -> Result<Self> {
        if fiber.dim() != 1 {
            return Err(Error::ContractViolation("fiber must be an elliptic curve".into()));
        }
        if twist.len() != base.dim() {
            return Err(Error::ContractViolation(format!(
                "twist has {} coefficients for a base of dimension {}",
                twist.len(),
                base.dim()
            )));
        }
        let s = Self { base, fiber, twist };
        for (k, b) in s.base.lattice.basis().iter().enumerate() {
            let image = CVector::from_element(1, s.twist_at(b));
            if !s.fiber.contains(&image, 1e-9) {
                return Err(Error::IncompatibleTwist(format!(
                    "base period {k} maps to {} outside the fiber lattice",
                    image[0]
                )));
            }
        }
        Ok(s)
    }

    pub fn twist_at(&self, z: &CVector) -> C64 {
        self.twist.iter().zip(z.iter()).map(|(a, b)| a * b).sum()
    }

    fn n(&self) -> usize {
        self.base.dim()
    }

    fn split(&self, p: &SystemPoint) -> (CVector, C64) {
        let n = self.n();
        (CVector::from_column_slice(&p.coords[..n]), p.coords[n])
    }

    fn join(z: &CVector, w: C64) -> SystemPoint {
        let mut coords: Vec<C64> = z.iter().copied().collect();
        coords.push(w);
        SystemPoint::new(0, coords)
    }

    fn reduce_fiber(&self, w: C64) -> C64 {
        self.fiber.reduce(&CVector::from_element(1, w))[0]
    }

    /// Constant complex derivative `[[A, 0], [ℓ, 1]]`.
    pub fn complex_tangent(&self) -> CMatrix {
        let n = self.n();
        let mut t = CMatrix::zeros(n + 1, n + 1);
        t.view_mut((0, 0), (n, n)).copy_from(self.base.complex_matrix());
        for k in 0..n {
            t[(n, k)] = self.twist[k];
        }
        t[(n, n)] = C64::new(1.0, 0.0);
        t
    }

    /// The fiber point `(ẑ, w)` as a point of the system.
    pub fn point(&self, z: &CVector, w: C64) -> SystemPoint {
        Self::join(&self.base.lattice.reduce(z), self.reduce_fiber(w))
    }

    pub fn fiber_coordinate(&self, p: &SystemPoint) -> C64 {
        p.coords[self.n()]
    }

    /// Lattice coordinates of the fiber component.
    pub fn fiber_lattice_coords(&self, p: &SystemPoint) -> [f64; 2] {
        let c = self.fiber.coordinates(&CVector::from_element(1, p.coords[self.n()]));
        [c[0], c[1]]
    }

    /// Lattice coordinates of the base component.
    pub fn base_lattice_coords(&self, p: &SystemPoint) -> RVector {
        self.base.lattice.coordinates(&self.split(p).0)
    }
}

impl PointDynamics for SkewProduct {
    fn coord_dim(&self) -> usize {
        self.n() + 1
    }

    fn evaluate(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let (z, w) = self.split(p);
        Ok(Self::join(&self.base.apply(&z), self.reduce_fiber(w + self.twist_at(&z))))
    }

    fn evaluate_inverse(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let (z, w) = self.split(p);
        let pre = self.base.apply_inverse(&z);
        Ok(Self::join(&pre, self.reduce_fiber(w - self.twist_at(&pre))))
    }

    fn tangent_real(&self, _p: &SystemPoint) -> Result<RMatrix> {
        Ok(realify(&self.complex_tangent()))
    }

    fn displacement(&self, p: &SystemPoint, q: &SystemPoint) -> Result<RVector> {
        let (zp, wp) = self.split(p);
        let (zq, wq) = self.split(q);
        let dz = self.base.lattice.wrap_difference(&(zq - zp));
        let dw = self.fiber.wrap_difference(&CVector::from_element(1, wq - wp));
        let mut all: Vec<C64> = dz.iter().copied().collect();
        all.push(dw[0]);
        Ok(realify_vec(&CVector::from_vec(all)))
    }

    fn exp(&self, p: &SystemPoint, v: &RVector) -> Result<SystemPoint> {
        let dv = complexify(v);
        let (z, w) = self.split(p);
        let n = self.n();
        Ok(self.point(&(z + dv.rows(0, n)), w + dv[n]))
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> SystemPoint {
        let z = self.base.sample(rng);
        let c = RVector::from_fn(2, |_, _| unit(rng));
        Self::join(&z, self.fiber.from_coordinates(&c)[0])
    }

    fn block_dims(&self) -> BlockDims {
        let b = self.base.block_dims();
        BlockDims { stable: b.stable, center: b.center + 2, unstable: b.unstable }
    }

    fn is_holomorphic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxcore::c;

    fn gaussian_fiber() -> Lattice {
        Lattice::planar(c(1.0, 0.0), c(0.0, 1.0)).unwrap()
    }

    #[test]
    fn twist_examples() {
        let s = SkewProduct::new(TorusAutomorphism::cat_map(), gaussian_fiber(), vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = s.complex_tangent();
        assert_eq!(t[(2, 0)], c(1.0, 0.0));
        assert_eq!(t[(2, 2)], c(1.0, 0.0));
        assert_eq!(t[(0, 2)], c(0.0, 0.0));
        let half = SkewProduct::new(TorusAutomorphism::cat_map(), gaussian_fiber(), vec![c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(half, Err(Error::IncompatibleTwist(_))));
    }

    #[test]
    fn center_direction_is_the_fiber() {
        let s = SkewProduct::new(TorusAutomorphism::cat_map(), gaussian_fiber(), vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        // (A − I)v = 0 has only v = 0, so the eigenvalue-1 eigenvector is (0, 0, 1).
        let t = s.complex_tangent();
        let e = crate::cxcore::cvec(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((&t * &e - &e).norm() < 1e-15);
        assert_eq!(s.block_dims(), BlockDims { stable: 2, center: 2, unstable: 2 });
    }
}
