use super::rational::{q, QMatrix, Rational};
use crate::cxcore::RVector;
use crate::{Error, Result};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Real Lie algebra with rational structure constants `[eᵢ, eⱼ] = Σₖ c[i][j][k]·eₖ`
/// and an optional almost complex structure.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureAlgebra {
    dim: usize,
    constants: Vec<Vec<Vec<Rational>>>,
    j: Option<QMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AutomorphismCheck {
    pub is_automorphism: bool,
    /// Vacuously true when the algebra carries no complex structure.
    pub commutes_with_j: bool,
    pub preserves_lattice: bool,
}

impl StructureAlgebra {
    /// Builds the algebra from the brackets `[e_i, e_j] = v` for `i ≠ j`;
    /// the reversed brackets follow by antisymmetry.
    pub fn new(dim: usize, brackets: &[(usize, usize, Vec<Rational>)]) -> Result<Self> {
        let zero = vec![Rational::zero(); dim];
        let mut c = vec![vec![zero.clone(); dim]; dim];
        let mut set = vec![vec![false; dim]; dim];
        for (i, j, v) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim || v.len() != dim {
                return Err(Error::ContractViolation(format!(
                    "bracket ({i}, {j}) does not fit dimension {dim}"
                )));
            }
            if i == j {
                if v.iter().any(|x| !x.is_zero()) {
                    return Err(Error::ContractViolation(format!("[e{i}, e{i}] must vanish")));
                }
                continue;
            }
            let neg: Vec<Rational> = v.iter().map(|x| -x).collect();
            if (set[i][j] && c[i][j] != *v) || (set[j][i] && c[j][i] != neg) {
                return Err(Error::ContractViolation(format!(
                    "brackets of e{i} and e{j} are not antisymmetric"
                )));
            }
            c[i][j] = v.clone();
            c[j][i] = neg;
            set[i][j] = true;
            set[j][i] = true;
        }
        let alg = Self { dim, constants: c, j: None };
        alg.check_jacobi()?;
        Ok(alg)
    }

    pub fn abelian(dim: usize) -> Self {
        Self::new(dim, &[]).expect("abelian algebra")
    }

    pub fn with_complex_structure(mut self, j: QMatrix) -> Result<Self> {
        if j.nrows() != self.dim || j.ncols() != self.dim {
            return Err(Error::ContractViolation("complex structure has the wrong shape".into()));
        }
        if !j.mul(&j).add(&QMatrix::identity(self.dim)).is_zero() {
            return Err(Error::ContractViolation("J² ≠ −I".into()));
        }
        self.j = Some(j);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn complex_structure(&self) -> Option<&QMatrix> {
        self.j.as_ref()
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim];
        v[i] = Rational::one();
        v
    }

    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.dim, "vector dimension");
        assert_eq!(y.len(), self.dim, "vector dimension");
        let mut out = vec![Rational::zero(); self.dim];
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() || i == j {
                    continue;
                }
                let f = x[i] * y[j];
                for (o, c) in out.iter_mut().zip(&self.constants[i][j]) {
                    *o += f * c;
                }
            }
        }
        out
    }

    pub fn bracket_f64(&self, x: &RVector, y: &RVector) -> RVector {
        let mut out = RVector::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let f = x[i] * y[j];
                if f == 0.0 || i == j {
                    continue;
                }
                for k in 0..self.dim {
                    let c = self.constants[i][j][k];
                    if !c.is_zero() {
                        out[k] += f * c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
                    }
                }
            }
        }
        out
    }

    fn check_jacobi(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in j + 1..self.dim {
                    let (a, b, c) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let t1 = self.bracket(&a, &self.bracket(&b, &c));
                    let t2 = self.bracket(&b, &self.bracket(&c, &a));
                    let t3 = self.bracket(&c, &self.bracket(&a, &b));
                    if t1.iter().zip(&t2).zip(&t3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        return Err(Error::JacobiViolation(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    /// `N(X, Y) = [X,Y] + J([JX,Y] + [X,JY]) − [JX,JY]`.
    pub fn nijenhuis(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        let j = self.j.as_ref().ok_or(Error::MissingComplexStructure)?;
        let jx = j.mul_vec(x);
        let jy = j.mul_vec(y);
        let inner: Vec<Rational> = self
            .bracket(&jx, y)
            .iter()
            .zip(self.bracket(x, &jy))
            .map(|(a, b)| a + b)
            .collect();
        let j_inner = j.mul_vec(&inner);
        let xy = self.bracket(x, y);
        let jxjy = self.bracket(&jx, &jy);
        Ok((0..self.dim).map(|k| xy[k] + j_inner[k] - jxjy[k]).collect())
    }

    /// Basis pairs `(i, j)`, `i < j`, on which the Nijenhuis tensor is nonzero.
    pub fn nijenhuis_support(&self) -> Result<Vec<(usize, usize, Vec<Rational>)>> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for k in i + 1..self.dim {
                let n = self.nijenhuis(&self.basis_vector(i), &self.basis_vector(k))?;
                if n.iter().any(|x| !x.is_zero()) {
                    out.push((i, k, n));
                }
            }
        }
        Ok(out)
    }

    /// Exact check of `f[eᵢ,eⱼ] = [feᵢ, feⱼ]` on all basis pairs, of `fJ = Jf`,
    /// and of `f` being an integer matrix with determinant ±1.
    pub fn automorphism_check(&self, f: &QMatrix) -> Result<AutomorphismCheck> {
        if f.nrows() != self.dim || f.ncols() != self.dim {
            return Err(Error::ContractViolation(format!(
                "map is {}×{}, algebra has dimension {}",
                f.nrows(),
                f.ncols(),
                self.dim
            )));
        }
        let images = f.columns();
        let mut is_automorphism = f.determinant() != Rational::zero();
        'outer: for i in 0..self.dim {
            for k in i + 1..self.dim {
                let lhs = f.mul_vec(&self.bracket(&self.basis_vector(i), &self.basis_vector(k)));
                if lhs != self.bracket(&images[i], &images[k]) {
                    is_automorphism = false;
                    break 'outer;
                }
            }
        }
        let commutes_with_j = self.j.as_ref().map_or(true, |j| f.mul(j) == j.mul(f));
        let det = f.determinant();
        let preserves_lattice = f.is_integral() && (det == q(1) || det == q(-1));
        Ok(AutomorphismCheck { is_automorphism, commutes_with_j, preserves_lattice })
    }

    /// Smallest subalgebra containing the span of `generators`, as a
    /// row-reduced basis, with the number of bracket rounds needed.
    pub fn generated_subalgebra(&self, generators: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, usize) {
        let mut basis = QMatrix::span_basis(generators, self.dim);
        let mut rounds = 0;
        loop {
            let mut candidates = basis.clone();
            for a in &basis {
                for b in &basis {
                    candidates.push(self.bracket(a, b));
                }
            }
            let next = QMatrix::span_basis(&candidates, self.dim);
            if next.len() == basis.len() {
                return (basis, rounds);
            }
            basis = next;
            rounds += 1;
        }
    }

    /// Whether the span of `vectors` is invariant under the complex structure.
    pub fn is_j_invariant(&self, vectors: &[Vec<Rational>]) -> Result<bool> {
        let j = self.j.as_ref().ok_or(Error::MissingComplexStructure)?;
        let base = QMatrix::span_basis(vectors, self.dim).len();
        let mut all = vectors.to_vec();
        all.extend(vectors.iter().map(|v| j.mul_vec(v)));
        Ok(QMatrix::span_basis(&all, self.dim).len() == base)
    }
}
