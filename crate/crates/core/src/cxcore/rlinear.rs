use super::{complexify, operator_norm, realify, realify_vec, CMatrix, CVector, RMatrix, C64, I};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Real-linear endomorphism of ℂⁿ written as `v ↦ P·v + Q·conj(v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RLinearMap {
    pub linear: CMatrix,
    pub antilinear: CMatrix,
}

impl RLinearMap {
    pub fn new(linear: CMatrix, antilinear: CMatrix) -> Result<Self> {
        if linear.shape() != antilinear.shape() || linear.nrows() != linear.ncols() {
            return Err(Error::ContractViolation(format!(
                "linear part {:?} and antilinear part {:?} must be equal square shapes",
                linear.shape(),
                antilinear.shape()
            )));
        }
        Ok(Self { linear, antilinear })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            linear: CMatrix::identity(n, n),
            antilinear: CMatrix::zeros(n, n),
        }
    }

    pub fn from_complex_linear(m: CMatrix) -> Self {
        let n = m.nrows();
        Self {
            antilinear: CMatrix::zeros(n, m.ncols()),
            linear: m,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    /// Splits a real `2n×2n` matrix acting on interleaved coordinates.
    pub fn from_real_matrix(t: &RMatrix) -> Result<Self> {
        if t.nrows() != t.ncols() || t.nrows() % 2 != 0 {
            return Err(Error::ContractViolation(format!(
                "real matrix must be square of even size, got {:?}",
                t.shape()
            )));
        }
        let n = t.nrows() / 2;
        let mut p = CMatrix::zeros(n, n);
        let mut q = CMatrix::zeros(n, n);
        for k in 0..n {
            let te = complexify(&t.column(2 * k).into_owned());
            let tie = complexify(&t.column(2 * k + 1).into_owned());
            let ie = &tie * I;
            p.set_column(k, &(&te - &ie).unscale(2.0));
            q.set_column(k, &(&te + &ie).unscale(2.0));
        }
        Ok(Self { linear: p, antilinear: q })
    }

    pub fn to_real_matrix(&self) -> RMatrix {
        let n = self.dim();
        let mut conj = RMatrix::identity(2 * n, 2 * n);
        for k in 0..n {
            conj[(2 * k + 1, 2 * k + 1)] = -1.0;
        }
        realify(&self.linear) + realify(&self.antilinear) * conj
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.linear * v + &self.antilinear * v.map(|z| z.conj())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RLinearMap) -> RLinearMap {
        let conj = |m: &CMatrix| m.map(|z| z.conj());
        RLinearMap {
            linear: &self.linear * &other.linear + &self.antilinear * conj(&other.antilinear),
            antilinear: &self.linear * &other.antilinear + &self.antilinear * conj(&other.linear),
        }
    }

    pub fn inverse(&self) -> Result<RLinearMap> {
        let inv = self
            .to_real_matrix()
            .try_inverse()
            .ok_or_else(|| Error::SingularInput("real-linear map is not invertible".into()))?;
        Self::from_real_matrix(&inv)
    }

    /// Operator norm of the ℂ-antilinear part.
    pub fn dbar_norm(&self) -> f64 {
        operator_norm(&self.antilinear)
    }

    pub fn is_complex_linear(&self, tol: f64) -> bool {
        self.dbar_norm() <= tol
    }

    /// Ratio of extreme real singular values; the linear dilatation of the map.
    pub fn linear_dilatation(&self) -> Result<f64> {
        let s = super::singular_values(&self.to_real_matrix());
        let (max, min) = (s[0], s[s.len() - 1]);
        if !(min > 0.0) {
            return Err(Error::DistortionUndefined("real-linear map is singular".into()));
        }
        Ok(max / min)
    }
}

/// Recovers the real-linear map sending each `basis[k]` to `images[k]`.
/// The `2n` basis vectors must be ℝ-linearly independent in ℂⁿ.
pub fn antilinear_split(basis: &[CVector], images: &[CVector]) -> Result<RLinearMap> {
    let n = basis.first().map_or(0, |v| v.len());
    if n == 0 || basis.len() != 2 * n || images.len() != 2 * n {
        return Err(Error::ContractViolation(format!(
            "need 2n samples of vectors in ℂⁿ, got {} basis and {} image vectors",
            basis.len(),
            images.len()
        )));
    }
    if basis.iter().chain(images).any(|v| v.len() != n) {
        return Err(Error::ContractViolation("sample vectors differ in dimension".into()));
    }
    if basis.iter().chain(images).any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::ContractViolation("non-finite sample entries".into()));
    }
    let b = RMatrix::from_columns(&basis.iter().map(realify_vec).collect::<Vec<_>>());
    let y = RMatrix::from_columns(&images.iter().map(realify_vec).collect::<Vec<_>>());
    let s = super::singular_values(&b);
    if !(s[s.len() - 1] > 1e-12 * s[0].max(1.0)) {
        return Err(Error::SingularInput(
            "sample vectors do not form a real basis".into(),
        ));
    }
    let b_inv = b
        .try_inverse()
        .ok_or_else(|| Error::SingularInput("sample vectors do not form a real basis".into()))?;
    RLinearMap::from_real_matrix(&(y * b_inv))
}

/// Standard real basis `(e₁, i·e₁, …, eₙ, i·eₙ)` of ℂⁿ.
pub fn standard_real_basis(n: usize) -> Vec<CVector> {
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let mut e = CVector::zeros(n);
        e[k] = C64::new(1.0, 0.0);
        out.push(e.clone());
        e[k] = I;
        out.push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{c, cmat, cvec};
    use super::*;
    use proptest::prelude::*;

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn identity_split() {
        let basis = standard_real_basis(2);
        let m = antilinear_split(&basis, &basis).unwrap();
        assert!(close(&m.linear, &CMatrix::identity(2, 2)));
        assert_eq!(m.dbar_norm(), 0.0);
    }

    #[test]
    fn conjugation_split() {
        let basis = standard_real_basis(1);
        let images: Vec<CVector> = basis.iter().map(|v| v.map(|z| z.conj())).collect();
        let m = antilinear_split(&basis, &images).unwrap();
        assert!(m.linear.norm() < 1e-12);
        assert!((m.antilinear[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lattice_basis_change_has_rotation_antilinear_part() {
        let basis = standard_real_basis(2);
        let images = vec![
            cvec(&[c(1.0, 0.0), c(1.0, 0.0)]),
            cvec(&[c(0.0, 1.0), c(0.0, -1.0)]),
            cvec(&[c(-1.0, 0.0), c(1.0, 0.0)]),
            cvec(&[c(0.0, 1.0), c(0.0, 1.0)]),
        ];
        let m = antilinear_split(&basis, &images).unwrap();
        let expected_q = cmat(&[&[c(0.0, 0.0), c(-1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]]);
        assert!(close(&m.antilinear, &expected_q), "{}", m.antilinear);
        assert!((m.dbar_norm() - 1.0).abs() < 1e-12);
        // Direct evaluation of the split formulas on e₁, e₂.
        for k in 0..2 {
            let te = &images[2 * k];
            let tie = &images[2 * k + 1];
            let q = (te + tie * I).unscale(2.0);
            assert!((q - m.antilinear.column(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_basis_is_rejected() {
        let v = cvec(&[c(1.0, 0.0)]);
        let w = cvec(&[c(2.0, 0.0)]);
        let err = antilinear_split(&[v.clone(), w.clone()], &[v, w]).unwrap_err();
        assert!(matches!(err, Error::SingularInput(_)));
    }

    #[test]
    fn conformal_linear_dilatation() {
        let m = RLinearMap::new(
            cmat(&[&[c(1.0, 0.0)]]),
            cmat(&[&[c(0.5, 0.0)]]),
        )
        .unwrap();
        assert!((m.linear_dilatation().unwrap() - 3.0).abs() < 1e-12);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n * n)
            .prop_map(move |v| CMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1)))
    }

    proptest! {
        #[test]
        fn split_reassembles_samples(p in arb_matrix(2), q in arb_matrix(2),
                                     shear in -2.0f64..2.0) {
            let map = RLinearMap::new(p, q).unwrap();
            let mut basis = standard_real_basis(2);
            basis[1][0] += c(shear, 0.0);
            let images: Vec<CVector> = basis.iter().map(|v| map.apply(v)).collect();
            let split = antilinear_split(&basis, &images).unwrap();
            for (v, w) in basis.iter().zip(&images) {
                prop_assert!((split.apply(v) - w).norm() < 1e-12 * (1.0 + w.norm()) * 10.0);
            }
        }

        #[test]
        fn compose_matches_real_product(p1 in arb_matrix(2), q1 in arb_matrix(2),
                                        p2 in arb_matrix(2), q2 in arb_matrix(2)) {
            let a = RLinearMap::new(p1, q1).unwrap();
            let b = RLinearMap::new(p2, q2).unwrap();
            let lhs = a.compose(&b).to_real_matrix();
            let rhs = a.to_real_matrix() * b.to_real_matrix();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn zero_antilinear_part_iff_conformal(p in arb_matrix(1), q in arb_matrix(1)) {
            prop_assume!(p[(0, 0)].norm() > q[(0, 0)].norm() + 0.1);
            let linear = RLinearMap::from_complex_linear(p.clone());
            prop_assert!((linear.linear_dilatation().unwrap() - 1.0).abs() < 1e-12);
            let general = RLinearMap::new(p, q.clone()).unwrap();
            if q[(0, 0)].norm() > 1e-6 {
                prop_assert!(general.linear_dilatation().unwrap() > 1.0 + 1e-12);
            }
        }
    }
}
