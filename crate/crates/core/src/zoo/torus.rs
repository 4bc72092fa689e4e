use super::{unit, BlockDims, PointDynamics, SystemPoint};
use crate::cxcore::{realify, CMatrix, CVector, RLinearMap, RMatrix, RVector, C64};
use crate::lattices::Lattice;
use crate::liecx::{spectral_splitting, QMatrix};
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HyperbolicityClass {
    /// No eigenvalue on the unit circle.
    Anosov,
    /// Both hyperbolic and unimodular eigenvalues.
    PartiallyHyperbolic,
    /// All eigenvalues unimodular and the matrix has finite order.
    Isometry,
    /// All eigenvalues unimodular, infinite order.
    Parabolic,
}

/// `z ↦ A·z mod Λ` for an integer matrix acting ℂ-linearly on ℂⁿ.
#[derive(Debug, Clone, Serialize)]
pub struct TorusAutomorphism {
    pub matrix: Vec<Vec<i64>>,
    pub lattice: Lattice,
    pub class: HyperbolicityClass,
    dims: BlockDims,
    #[serde(skip)]
    a: CMatrix,
    #[serde(skip)]
    a_inv: CMatrix,
    #[serde(skip)]
    real: RMatrix,
}

const MAX_FINITE_ORDER: usize = 24;

fn int_matrix(rows: &[Vec<i64>]) -> Result<QMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::ContractViolation("matrix must be square and nonempty".into()));
    }
    let rows128: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let refs: Vec<&[i128]> = rows128.iter().map(|r| r.as_slice()).collect();
    Ok(QMatrix::from_int_rows(&refs))
}

/// Classifies an integer matrix with determinant ±1 by its spectrum.
pub(crate) fn classify(rows: &[Vec<i64>]) -> Result<(HyperbolicityClass, crate::liecx::SpectralSplitting)> {
    let q = int_matrix(rows)?;
    let split = spectral_splitting(&q.to_f64())?;
    let (s, c, u) = split.dims();
    let class = if c == 0 {
        HyperbolicityClass::Anosov
    } else if s + u > 0 {
        HyperbolicityClass::PartiallyHyperbolic
    } else {
        let id = QMatrix::identity(q.nrows());
        let mut power = q.clone();
        let mut finite = power == id;
        for _ in 1..MAX_FINITE_ORDER {
            if finite {
                break;
            }
            power = power.mul(&q);
            finite = power == id;
        }
        if finite {
            HyperbolicityClass::Isometry
        } else {
            HyperbolicityClass::Parabolic
        }
    };
    Ok((class, split))
}

pub(crate) fn unimodular_inverse(rows: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let q = int_matrix(rows)?;
    let det = q.determinant();
    if det != crate::liecx::rational::q(1) && det != crate::liecx::rational::q(-1) {
        return Err(Error::NotLatticePreserving(format!("integer matrix has determinant {det}")));
    }
    let inv = q.to_f64().try_inverse().expect("unimodular matrix is invertible");
    Ok((0..rows.len())
        .map(|i| (0..rows.len()).map(|j| inv[(i, j)].round() as i64).collect())
        .collect())
}

pub(crate) fn to_cmatrix(rows: &[Vec<i64>]) -> CMatrix {
    CMatrix::from_fn(rows.len(), rows.len(), |i, j| C64::new(rows[i][j] as f64, 0.0))
}

impl TorusAutomorphism {
    pub fn new(matrix: Vec<Vec<i64>>, lattice: Lattice) -> Result<Self> {
        let n = lattice.dim();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::ContractViolation(format!(
                "matrix must be {n}×{n} to act on the lattice"
            )));
        }
        let inv = unimodular_inverse(&matrix)?;
        let a = to_cmatrix(&matrix);
        let a_inv = to_cmatrix(&inv);
        lattice.map_integral(&RLinearMap::from_complex_linear(a.clone()), 1e-9)?;
        lattice.map_integral(&RLinearMap::from_complex_linear(a_inv.clone()), 1e-9)?;
        let (class, split) = classify(&matrix)?;
        let (s, c, u) = split.dims();
        Ok(Self {
            matrix,
            lattice,
            class,
            dims: BlockDims { stable: 2 * s, center: 2 * c, unstable: 2 * u },
            real: realify(&a),
            a,
            a_inv,
        })
    }

    /// The cat map `[[2,1],[1,1]]` acting ℂ-linearly on `(ℂ/ℤ[i])²`.
    pub fn cat_map() -> Self {
        Self::new(vec![vec![2, 1], vec![1, 1]], Lattice::gaussian(2)).expect("cat map")
    }

    pub fn ensure_partially_hyperbolic(&self) -> Result<()> {
        match self.class {
            HyperbolicityClass::Anosov | HyperbolicityClass::PartiallyHyperbolic => Ok(()),
            other => Err(Error::NotHyperbolic(format!("torus automorphism is {other:?}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn complex_matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn real_matrix(&self) -> &RMatrix {
        &self.real
    }

    pub(crate) fn apply(&self, z: &CVector) -> CVector {
        self.lattice.reduce(&(&self.a * z))
    }

    pub(crate) fn apply_inverse(&self, z: &CVector) -> CVector {
        self.lattice.reduce(&(&self.a_inv * z))
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> CVector {
        let c = RVector::from_fn(2 * self.dim(), |_, _| unit(rng));
        self.lattice.from_coordinates(&c)
    }
}

fn cvec(p: &SystemPoint) -> CVector {
    CVector::from_column_slice(&p.coords)
}

impl PointDynamics for TorusAutomorphism {
    fn coord_dim(&self) -> usize {
        self.dim()
    }

    fn evaluate(&self, p: &SystemPoint) -> Result<SystemPoint> {
        Ok(SystemPoint::new(0, self.apply(&cvec(p)).iter().copied().collect()))
    }

    fn evaluate_inverse(&self, p: &SystemPoint) -> Result<SystemPoint> {
        Ok(SystemPoint::new(0, self.apply_inverse(&cvec(p)).iter().copied().collect()))
    }

    fn tangent_real(&self, _p: &SystemPoint) -> Result<RMatrix> {
        Ok(self.real.clone())
    }

    fn displacement(&self, p: &SystemPoint, q: &SystemPoint) -> Result<RVector> {
        Ok(crate::cxcore::realify_vec(&self.lattice.wrap_difference(&(cvec(q) - cvec(p)))))
    }

    fn exp(&self, p: &SystemPoint, v: &RVector) -> Result<SystemPoint> {
        let z = cvec(p) + crate::cxcore::complexify(v);
        Ok(SystemPoint::new(0, self.lattice.reduce(&z).iter().copied().collect()))
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> SystemPoint {
        SystemPoint::new(0, self.sample(rng).iter().copied().collect())
    }

    fn block_dims(&self) -> BlockDims {
        self.dims
    }

    fn is_holomorphic(&self) -> bool {
        true
    }
}
