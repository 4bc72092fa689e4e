use super::Lattice;
use crate::cxcore::C64;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance for comparing reduced moduli.
pub const MODULUS_TOL: f64 = 1e-9;
const EPS: f64 = 1e-12;
const MAX_STEPS: usize = 10_000;

/// Point of the closed fundamental domain: `Re τ ∈ (−1/2, 1/2]`, `|τ| ≥ 1`,
/// and `Re τ ≥ 0` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub tau: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModularGenerator {
    /// `τ ↦ τ + 1`
    T,
    /// `τ ↦ τ − 1`
    TInv,
    /// `τ ↦ −1/τ`
    S,
}

impl ModularGenerator {
    pub fn apply(self, tau: C64) -> C64 {
        match self {
            Self::T => tau + 1.0,
            Self::TInv => tau - 1.0,
            Self::S => -tau.inv(),
        }
    }
}

/// Applies the generators of `word` to `tau` from left to right.
pub fn apply_word(tau: C64, word: &[ModularGenerator]) -> C64 {
    word.iter().fold(tau, |t, g| g.apply(t))
}

/// Modulus of the planar lattice `ℤ·w1 + ℤ·w2` and the generator word that
/// moves `±w2/w1` into the fundamental domain.
pub fn modulus_reduce(w1: C64, w2: C64) -> Result<(Modulus, Vec<ModularGenerator>)> {
    if !(w1.norm() > 0.0) || !w2.norm().is_finite() {
        return Err(Error::DegenerateLattice(format!("periods {w1}, {w2}")));
    }
    let mut tau = w2 / w1;
    if !(tau.im.abs() > EPS * tau.norm().max(1.0)) {
        return Err(Error::DegenerateLattice(format!(
            "periods {w1} and {w2} are ℝ-dependent"
        )));
    }
    if tau.im < 0.0 {
        tau = -tau;
    }
    let mut word = Vec::new();
    for _ in 0..MAX_STEPS {
        let k = (tau.re - 0.5 - EPS).ceil();
        if k != 0.0 {
            let g = if k > 0.0 { ModularGenerator::TInv } else { ModularGenerator::T };
            for _ in 0..k.abs() as usize {
                word.push(g);
            }
            tau.re -= k;
        }
        let r2 = tau.norm_sqr();
        if r2 < 1.0 - EPS || ((r2 - 1.0).abs() <= EPS && tau.re < -EPS) {
            word.push(ModularGenerator::S);
            tau = -tau.inv();
            continue;
        }
        if (tau.re + 0.5).abs() <= EPS {
            word.push(ModularGenerator::T);
            tau.re += 1.0;
        }
        return Ok((Modulus { tau }, word));
    }
    Err(Error::DegenerateLattice("modulus reduction did not terminate".into()))
}

impl Lattice {
    /// Reduced modulus of a lattice in ℂ.
    pub fn modulus(&self) -> Result<Modulus> {
        if self.dim() != 1 {
            return Err(Error::ContractViolation(format!(
                "modulus needs a lattice in ℂ, got ℂ^{}",
                self.dim()
            )));
        }
        Ok(modulus_reduce(self.basis()[0][0], self.basis()[1][0])?.0)
    }
}

/// Whether two lattices in ℂ differ by multiplication by a nonzero complex
/// number, decided on reduced moduli with the boundary identifications of the
/// fundamental domain.
pub fn torus_equivalent_1d(l1: &Lattice, l2: &Lattice) -> Result<bool> {
    let t1 = l1.modulus()?.tau;
    let t2 = l2.modulus()?.tau;
    let s = -t2.inv();
    let candidates = [t2, t2 + 1.0, t2 - 1.0, s, s + 1.0, s - 1.0];
    Ok(candidates.iter().any(|t| (t1 - t).norm() <= MODULUS_TOL * t1.norm().max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxcore::c;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn in_domain(t: C64) -> bool {
        t.im > 0.0
            && t.re > -0.5
            && t.re <= 0.5 + 1e-12
            && t.norm_sqr() >= 1.0 - 1e-12
            && !((t.norm_sqr() - 1.0).abs() < 1e-12 && t.re < -1e-12)
    }

    #[test]
    fn square_lattice_is_reduced() {
        let (m, word) = modulus_reduce(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(m.tau, c(0.0, 1.0));
        assert!(word.is_empty());
    }

    #[test]
    fn sheared_square_lattice() {
        let (m, word) = modulus_reduce(c(1.0, 0.0), c(1.0, 1.0)).unwrap();
        assert!((m.tau - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(word, vec![ModularGenerator::TInv]);
    }

    #[test]
    fn scaled_square_lattice() {
        let (m, _) = modulus_reduce(c(2.0, 0.0), c(0.0, 2.0)).unwrap();
        assert!((m.tau - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn dependent_periods() {
        assert!(matches!(
            modulus_reduce(c(1.0, 0.0), c(3.0, 0.0)),
            Err(Error::DegenerateLattice(_))
        ));
    }

    #[test]
    fn equivalence_examples() {
        let sq = Lattice::planar(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!(torus_equivalent_1d(&sq, &sq.scaled(c(2.0, 0.0)).unwrap()).unwrap());
        let tall = Lattice::planar(c(1.0, 0.0), c(0.0, 2.0)).unwrap();
        assert!(!torus_equivalent_1d(&sq, &tall).unwrap());
        let hex = Lattice::planar(c(1.0, 0.0), C64::from_polar(1.0, PI / 3.0)).unwrap();
        let rot = hex.scaled(C64::from_polar(1.0, PI / 7.0)).unwrap();
        assert!(torus_equivalent_1d(&hex, &rot).unwrap());
    }

    #[test]
    fn boundary_points_are_identified() {
        let left = Lattice::planar(c(1.0, 0.0), c(-0.5, 1.5)).unwrap();
        let right = Lattice::planar(c(1.0, 0.0), c(0.5, 1.5)).unwrap();
        assert!(torus_equivalent_1d(&left, &right).unwrap());
        let m = left.modulus().unwrap();
        assert!((m.tau - c(0.5, 1.5)).norm() < 1e-12);
    }

    fn arb_gl2z() -> impl Strategy<Value = [i64; 4]> {
        proptest::collection::vec(-6i64..=6, 4).prop_filter_map("not unimodular", |v| {
            let d = v[0] * v[3] - v[1] * v[2];
            (d == 1 || d == -1).then_some([v[0], v[1], v[2], v[3]])
        })
    }

    fn arb_lattice() -> impl Strategy<Value = (C64, C64)> {
        (-2.0f64..2.0, 0.3f64..3.0, 0.0f64..std::f64::consts::TAU, 0.5f64..2.0)
            .prop_map(|(x, y, phase, r)| {
                let w1 = C64::from_polar(r, phase);
                (w1, w1 * c(x, y))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn reduction_is_basis_independent((w1, w2) in arb_lattice(), g in arb_gl2z()) {
            let (m, word) = modulus_reduce(w1, w2).unwrap();
            prop_assert!(in_domain(m.tau));
            let tau0 = { let t = w2 / w1; if t.im < 0.0 { -t } else { t } };
            prop_assert!((apply_word(tau0, &word) - m.tau).norm() < 1e-9);
            let v1 = w1 * g[0] as f64 + w2 * g[1] as f64;
            let v2 = w1 * g[2] as f64 + w2 * g[3] as f64;
            let (n, _) = modulus_reduce(v1, v2).unwrap();
            let a = Lattice::planar(w1, w2).unwrap();
            let b = Lattice::planar(v1, v2).unwrap();
            prop_assert!((m.tau - n.tau).norm() < 1e-9 || torus_equivalent_1d(&a, &b).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn equivalence_relation(a in arb_lattice(), b in arb_lattice(), s in 0.3f64..3.0, phase in 0.0f64..std::f64::consts::TAU) {
            let la = Lattice::planar(a.0, a.1).unwrap();
            let lb = Lattice::planar(b.0, b.1).unwrap();
            let lc = la.scaled(C64::from_polar(s, phase)).unwrap();
            prop_assert!(torus_equivalent_1d(&la, &la).unwrap());
            prop_assert_eq!(torus_equivalent_1d(&la, &lb).unwrap(), torus_equivalent_1d(&lb, &la).unwrap());
            prop_assert!(torus_equivalent_1d(&la, &lc).unwrap());
            prop_assert_eq!(torus_equivalent_1d(&lc, &lb).unwrap(), torus_equivalent_1d(&la, &lb).unwrap());
        }
    }
}
