use super::TorusAutomorphism;
use crate::cxcore::{CVector, C64};
use crate::lattices::{involution_fixed_fibers, modulus_reduce, Lattice, Modulus};
use crate::liecx::rational::q;
use crate::liecx::{QMatrix, Rational};
use crate::{Error, Result};
use num_rational::Ratio;
use serde::Serialize;

/// `A = diag([[2,1],[1,1]], 1)` on `E³` with `E = ℂ/⟨1, τ⟩`, together with
/// the free involution `(z₁, z₂, z₃) ↦ (−z₁, −z₂, z₃ + 1/2)` commuting
/// with it. The cover carries the point dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct EllipticQuotient {
    pub tau: C64,
    pub cover: TorusAutomorphism,
}

/// Exact checks on the involution in lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuotientCheck {
    /// Linear parts commute and `A` fixes the translation part.
    pub commutes: bool,
    /// The square of the involution is a lattice translation.
    pub square_is_identity: bool,
    /// Fibers over the 2-torsion of `E²`.
    pub singular_fibers: usize,
    /// The same count from the fixed-fiber formula.
    pub formula_count: u64,
}

const MIXING: [[i64; 3]; 3] = [[2, 1, 0], [1, 1, 0], [0, 0, 1]];

fn elliptic_lattice(n: usize, tau: C64) -> Result<Lattice> {
    let mut basis = Vec::with_capacity(2 * n);
    for k in 0..n {
        for w in [C64::new(1.0, 0.0), tau] {
            let mut v = CVector::zeros(n);
            v[k] = w;
            basis.push(v);
        }
    }
    Lattice::new(basis)
}

impl EllipticQuotient {
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() {
            return Err(Error::ContractViolation(format!("modulus {tau} is not in the upper half-plane")));
        }
        let matrix = MIXING.iter().map(|r| r.to_vec()).collect();
        let cover = TorusAutomorphism::new(matrix, elliptic_lattice(3, tau)?)?;
        Ok(Self { tau, cover })
    }

    /// Linear part of `A` in lattice coordinates `(e₁, τe₁, e₂, τe₂, e₃, τe₃)`.
    fn mixing_lattice_coords() -> QMatrix {
        let mut m = QMatrix::zeros(6, 6);
        for (i, row) in MIXING.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                for r in 0..2 {
                    m[(2 * i + r, 2 * j + r)] = q(a as i128);
                }
            }
        }
        m
    }

    fn involution_linear() -> QMatrix {
        let mut d = QMatrix::identity(6);
        for k in 0..4 {
            d[(k, k)] = q(-1);
        }
        d
    }

    fn involution_translation() -> Vec<Rational> {
        let mut t = vec![q(0); 6];
        t[4] = Ratio::new(1, 2);
        t
    }

    /// The involution on the cover.
    pub fn involution(&self, z: &CVector) -> CVector {
        let w = CVector::from_vec(vec![-z[0], -z[1], z[2] + C64::new(0.5, 0.0)]);
        self.cover.lattice.reduce(&w)
    }

    /// Points of `E²` whose fiber is mapped to itself by the involution.
    pub fn singular_fibers(&self) -> Result<Vec<CVector>> {
        let base = elliptic_lattice(2, self.tau)?;
        Ok(base
            .two_torsion()
            .into_iter()
            .filter(|p| base.contains(&(p * C64::new(2.0, 0.0)), 1e-12))
            .collect())
    }

    pub fn check(&self) -> Result<QuotientCheck> {
        let a = Self::mixing_lattice_coords();
        let d = Self::involution_linear();
        let t = Self::involution_translation();
        let commutes = d.mul(&a) == a.mul(&d) && a.mul_vec(&t) == t;
        let dt: Vec<Rational> = d.mul_vec(&t).iter().zip(&t).map(|(x, y)| x + y).collect();
        let square_is_identity = d.mul(&d) == QMatrix::identity(6) && dt.iter().all(|x| x.is_integer());
        Ok(QuotientCheck {
            commutes,
            square_is_identity,
            singular_fibers: self.singular_fibers()?.len(),
            formula_count: involution_fixed_fibers(2, Some(2))?,
        })
    }

    /// Modulus of a generic center fiber, `ℂ/⟨1, τ⟩`.
    pub fn generic_fiber_modulus(&self) -> Result<Modulus> {
        Ok(modulus_reduce(C64::new(1.0, 0.0), self.tau)?.0)
    }

    /// Modulus of a singular fiber, `ℂ/⟨1/2, τ⟩`.
    pub fn singular_fiber_modulus(&self) -> Result<Modulus> {
        Ok(modulus_reduce(C64::new(0.5, 0.0), self.tau)?.0)
    }
}
