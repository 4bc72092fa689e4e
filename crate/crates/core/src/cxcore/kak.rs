use super::{CMatrix, C64};
use crate::{Error, Result};

/// Singular value decomposition `A = U·diag(s₁, s₂)·Vᴴ` of a 2×2 complex
/// matrix, with `s₁ ≥ s₂ ≥ 0` and `det U = det A / |det A|`, `det V = 1`.
#[derive(Debug, Clone)]
pub struct Svd2 {
    pub u: CMatrix,
    pub s1: f64,
    pub s2: f64,
    pub v: CMatrix,
}

/// `A = U·diag(σ, 1/σ)·V` with `U`, `V` unitary and `σ ≥ 1`.
#[derive(Debug, Clone)]
pub struct Kak {
    pub u: CMatrix,
    pub sigma: f64,
    pub v: CMatrix,
}

impl Kak {
    pub fn d(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(self.sigma, 0.0),
            C64::new(1.0 / self.sigma, 0.0),
        ]))
    }

    pub fn reassemble(&self) -> CMatrix {
        &self.u * self.d() * &self.v
    }
}

fn det2(a: &CMatrix) -> C64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
}

fn unit2(x: C64, y: C64) -> (C64, C64) {
    let n = x.norm().hypot(y.norm());
    (x / n, y / n)
}

fn check_2x2(a: &CMatrix) -> Result<()> {
    if a.shape() != (2, 2) {
        return Err(Error::ContractViolation(format!("expected a 2×2 matrix, got {:?}", a.shape())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ContractViolation("non-finite matrix entry".into()));
    }
    Ok(())
}

/// Closed-form SVD via the Hermitian eigenproblem of `AᴴA`.
pub fn svd2(a: &CMatrix) -> Result<Svd2> {
    check_2x2(a)?;
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return Ok(Svd2 {
            u: CMatrix::identity(2, 2),
            s1: 0.0,
            s2: 0.0,
            v: CMatrix::identity(2, 2),
        });
    }
    let b = a.unscale(scale);
    let h = b.adjoint() * &b;
    let (p, q, off) = (h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)]);
    let half_gap = 0.5 * (p - q);
    let lambda1 = 0.5 * (p + q) + half_gap.hypot(off.norm());
    let det_b = det2(&b);
    let abs_det_b = det_b.norm();

    let x1 = (off, C64::new(lambda1 - p, 0.0));
    let x2 = (C64::new(lambda1 - q, 0.0), off.conj());
    let n1 = x1.0.norm().hypot(x1.1.norm());
    let n2 = x2.0.norm().hypot(x2.1.norm());
    let (v1a, v1b) = if n1.max(n2) <= 1e-300 {
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    } else if n1 >= n2 {
        unit2(x1.0, x1.1)
    } else {
        unit2(x2.0, x2.1)
    };
    let (v2a, v2b) = (-v1b.conj(), v1a.conj());
    let v = CMatrix::from_row_slice(2, 2, &[v1a, v2a, v1b, v2b]);

    let s1b = lambda1.sqrt();
    let s2b = if s1b > 0.0 { abs_det_b / s1b } else { 0.0 };
    let av1 = &b * v.column(0);
    let (u1a, u1b) = unit2(av1[0], av1[1]);
    let phase = if abs_det_b > 0.0 { det_b / abs_det_b } else { C64::new(1.0, 0.0) };
    let (u2a, u2b) = (-u1b.conj() * phase, u1a.conj() * phase);
    let u = CMatrix::from_row_slice(2, 2, &[u1a, u2a, u1b, u2b]);
    Ok(Svd2 {
        u,
        s1: s1b * scale,
        s2: s2b * scale,
        v,
    })
}

/// KAK factorization of a unit-determinant 2×2 matrix.
pub fn kak(a: &CMatrix) -> Result<Kak> {
    check_2x2(a)?;
    let norm2 = a.norm_squared();
    let det = det2(a);
    if (det - C64::new(1.0, 0.0)).norm() > 1e-9 * norm2.max(1.0) {
        return Err(Error::ContractViolation(format!(
            "KAK needs unit determinant, got {det}"
        )));
    }
    let svd = svd2(a)?;
    if (svd.s1 - 1.0).abs() <= 1e-12 {
        return Ok(Kak {
            u: a.clone(),
            sigma: 1.0,
            v: CMatrix::identity(2, 2),
        });
    }
    Ok(Kak {
        u: svd.u,
        sigma: svd.s1,
        v: svd.v.adjoint(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{c, cmat};
    use super::*;
    use proptest::prelude::*;

    fn is_unitary(m: &CMatrix) -> bool {
        (m.adjoint() * m - CMatrix::identity(2, 2)).norm() < 1e-10
    }

    #[test]
    fn diagonal_input() {
        let a = cmat(&[&[c(2.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(0.5, 0.0)]]);
        let k = kak(&a).unwrap();
        assert!((k.sigma - 2.0).abs() < 1e-14);
        assert!((k.u.clone() - CMatrix::identity(2, 2)).norm() < 1e-14);
        assert!((k.v.clone() - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn unitary_input_has_trivial_d() {
        let t = 0.7f64;
        let a = cmat(&[&[c(t.cos(), 0.0), c(0.0, t.sin())], &[c(0.0, t.sin()), c(t.cos(), 0.0)]]);
        let k = kak(&a).unwrap();
        assert_eq!(k.sigma, 1.0);
        assert!((k.reassemble() - a).norm() < 1e-12);
    }

    #[test]
    fn cat_map_sigma() {
        let a = cmat(&[&[c(2.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(1.0, 0.0)]]);
        let k = kak(&a).unwrap();
        // Oracle: largest root of λ² − 7λ + 1 (characteristic polynomial of AᵀA).
        let lambda = (7.0 + 45f64.sqrt()) / 2.0;
        assert!((k.sigma - lambda.sqrt()).abs() < 1e-12);
        assert!((k.sigma - 2.618033988749895).abs() < 1e-12);
        assert!((k.reassemble() - a).norm() < 1e-10);
    }

    #[test]
    fn non_unit_determinant_is_rejected() {
        let a = cmat(&[&[c(2.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(kak(&a), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn huge_norm_stays_accurate() {
        let s = 1e40;
        let u = cmat(&[&[c(0.6, 0.0), c(0.0, 0.8)], &[c(0.0, 0.8), c(0.6, 0.0)]]);
        let d = cmat(&[&[c(s, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0 / s, 0.0)]]);
        let a = &u * d * u.adjoint();
        let k = kak(&a).unwrap();
        assert!(((k.sigma - s) / s).abs() < 1e-12);
        // Kernel direction of the normalized limit is u·(0,1).
        let b = k.v.adjoint().column(1).into_owned();
        let expected = u.column(1).into_owned();
        let overlap = b.dotc(&expected).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    fn arb_sl2() -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec(-2.0f64..2.0, 8).prop_filter_map("near singular", |v| {
            let m = CMatrix::from_row_slice(
                2,
                2,
                &[c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])],
            );
            let d = det2(&m);
            if d.norm() < 0.05 {
                return None;
            }
            let r = d.sqrt();
            Some(m.map(|z| z / r))
        })
    }

    proptest! {
        #[test]
        fn kak_reassembles(a in arb_sl2()) {
            let k = kak(&a).unwrap();
            prop_assert!(k.sigma >= 1.0);
            prop_assert!(is_unitary(&k.u) && is_unitary(&k.v));
            prop_assert!((k.reassemble() - &a).norm() < 1e-10 * a.norm().max(1.0));
        }

        #[test]
        fn inverse_has_same_sigma(a in arb_sl2()) {
            let inv = a.clone().try_inverse().unwrap();
            let s = kak(&a).unwrap().sigma;
            let t = kak(&inv).unwrap().sigma;
            prop_assert!((s - t).abs() < 1e-9 * s);
        }

        #[test]
        fn svd_matches_nalgebra(a in arb_sl2()) {
            let ours = svd2(&a).unwrap();
            let theirs = a.clone().svd(false, false).singular_values;
            let top = theirs[0].max(theirs[1]);
            let bottom = theirs[0].min(theirs[1]);
            prop_assert!((ours.s1 - top).abs() < 1e-10 * top);
            prop_assert!((ours.s2 - bottom).abs() < 1e-10 * top);
        }
    }
}
