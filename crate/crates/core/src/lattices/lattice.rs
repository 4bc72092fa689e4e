use crate::cxcore::{antilinear_split, complexify, realify_vec, singular_values, CVector, RLinearMap, RMatrix, RVector, C64};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Full-rank lattice in ℂⁿ given by `2n` ℝ-independent basis vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct Lattice {
    basis: Vec<CVector>,
    periods: RMatrix,
    periods_inv: RMatrix,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    basis: Vec<Vec<C64>>,
}

impl TryFrom<LatticeRepr> for Lattice {
    type Error = Error;
    fn try_from(r: LatticeRepr) -> Result<Self> {
        Lattice::new(r.basis.iter().map(|v| CVector::from_column_slice(v)).collect())
    }
}

impl From<Lattice> for LatticeRepr {
    fn from(l: Lattice) -> Self {
        LatticeRepr {
            basis: l.basis.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

/// Minimal `|det|` of the real period matrix.
const MIN_COVOLUME: f64 = 1e-10;

impl Lattice {
    pub fn new(basis: Vec<CVector>) -> Result<Self> {
        let n = basis.first().map_or(0, |v| v.len());
        if n == 0 || basis.len() != 2 * n || basis.iter().any(|v| v.len() != n) {
            return Err(Error::DegenerateLattice(format!(
                "expected 2n basis vectors in ℂⁿ, got {} vectors",
                basis.len()
            )));
        }
        if basis.iter().any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::DegenerateLattice("non-finite basis entry".into()));
        }
        let periods = RMatrix::from_columns(&basis.iter().map(realify_vec).collect::<Vec<_>>());
        let det = periods.determinant();
        let s = singular_values(&periods);
        if !(det.abs() > MIN_COVOLUME) || !(s[s.len() - 1] > 1e-12 * s[0]) {
            return Err(Error::DegenerateLattice(format!(
                "basis is not ℝ-independent (period determinant {det:.3e})"
            )));
        }
        let periods_inv = periods
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateLattice("period matrix is not invertible".into()))?;
        Ok(Self { basis, periods, periods_inv })
    }

    /// `ℤ[i]ⁿ` with basis `(e₁, i·e₁, …)`.
    pub fn gaussian(n: usize) -> Self {
        Self::new(crate::cxcore::standard_real_basis(n)).expect("standard basis")
    }

    /// Rank-two lattice `ℤ·w1 + ℤ·w2` in ℂ.
    pub fn planar(w1: C64, w2: C64) -> Result<Self> {
        Self::new(vec![CVector::from_element(1, w1), CVector::from_element(1, w2)])
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    pub fn period_matrix(&self) -> &RMatrix {
        &self.periods
    }

    pub fn covolume(&self) -> f64 {
        self.periods.determinant().abs()
    }

    pub fn scaled(&self, factor: C64) -> Result<Self> {
        Self::new(self.basis.iter().map(|v| v * factor).collect())
    }

    /// Real coordinates of `v` with respect to the basis.
    pub fn coordinates(&self, v: &CVector) -> RVector {
        &self.periods_inv * realify_vec(v)
    }

    pub fn from_coordinates(&self, coords: &RVector) -> CVector {
        complexify(&(&self.periods * coords))
    }

    pub fn contains(&self, v: &CVector, tol: f64) -> bool {
        self.coordinates(v).iter().all(|x| (x - x.round()).abs() <= tol)
    }

    /// Representative of `v` in the fundamental parallelepiped `[0,1)^{2n}`.
    pub fn reduce(&self, v: &CVector) -> CVector {
        let c = self.coordinates(v).map(|x| x - x.floor());
        self.from_coordinates(&c)
    }

    /// Representative of `v` with coordinates in `[−1/2, 1/2)`.
    pub fn wrap_difference(&self, v: &CVector) -> CVector {
        let c = self.coordinates(v).map(|x| x - (x + 0.5).floor());
        self.from_coordinates(&c)
    }

    /// Integer matrix of a real-linear map in lattice coordinates, provided
    /// the map sends the lattice into itself (entries within `tol` of
    /// integers). Column `j` holds the coordinates of the image of `basis[j]`.
    pub fn map_integral(&self, map: &RLinearMap, tol: f64) -> Result<Vec<Vec<i64>>> {
        let m = 2 * self.dim();
        let mut out = vec![vec![0i64; m]; m];
        for (j, b) in self.basis.iter().enumerate() {
            let c = self.coordinates(&map.apply(b));
            for i in 0..m {
                let r = c[i].round();
                if (c[i] - r).abs() > tol {
                    return Err(Error::NotLatticePreserving(format!(
                        "image of basis vector {j} has coordinate {:.6} along basis vector {i}",
                        c[i]
                    )));
                }
                out[i][j] = r as i64;
            }
        }
        Ok(out)
    }

    /// The `4ⁿ` points of order dividing two, in lattice coordinates
    /// `{0, 1/2}^{2n}`.
    pub fn two_torsion(&self) -> Vec<CVector> {
        let m = 2 * self.dim();
        (0..1usize << m)
            .map(|mask| {
                let c = RVector::from_fn(m, |i, _| if mask >> i & 1 == 1 { 0.5 } else { 0.0 });
                self.from_coordinates(&c)
            })
            .collect()
    }
}

/// The real-linear map sending `l1.basis[i]` to `l2.basis[pairing[i]]`
/// together with the operator norm of its ℂ-antilinear part.
pub fn clinear_extension_residual(l1: &Lattice, l2: &Lattice, pairing: &[usize]) -> Result<(f64, RLinearMap)> {
    let m = 2 * l1.dim();
    if l2.dim() != l1.dim() {
        return Err(Error::ContractViolation(format!(
            "lattices live in ℂ^{} and ℂ^{}",
            l1.dim(),
            l2.dim()
        )));
    }
    let mut seen = vec![false; m];
    if pairing.len() != m || pairing.iter().any(|&k| k >= m || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::ContractViolation(format!(
            "pairing {pairing:?} is not a permutation of the {m} basis vectors"
        )));
    }
    let images: Vec<CVector> = pairing.iter().map(|&k| l2.basis[k].clone()).collect();
    let map = antilinear_split(&l1.basis, &images)?;
    Ok((map.dbar_norm(), map))
}
