use super::algebra::StructureAlgebra;
use super::rational::{split_cyclotomic, QMatrix, Rational};
use crate::cxcore::{null_space, orthonormalize, CMatrix, RMatrix, C64};
use crate::{Error, Result};
use serde::Serialize;

/// Tolerance on `| |λ| − 1 |` separating center from hyperbolic eigenvalues.
pub const UNIMODULAR_TOL: f64 = 1e-9;
/// Below this, an eigenvalue is taken as exactly unimodular without warning.
const EXACT_UNIMODULAR: f64 = 1e-12;

/// Real invariant subspaces of a linear map grouped by eigenvalue modulus.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSplitting {
    pub stable: RMatrix,
    pub center: RMatrix,
    pub unstable: RMatrix,
    pub eigenvalues: Vec<C64>,
    /// Largest distance of `f·v` from the subspace containing `v`, over all
    /// returned basis vectors.
    pub invariance_residual: f64,
    pub warnings: Vec<String>,
}

impl SpectralSplitting {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.stable.ncols(), self.center.ncols(), self.unstable.ncols())
    }
}

fn group_kernel(m: &RMatrix, group: &[C64]) -> RMatrix {
    let n = m.nrows();
    if group.is_empty() {
        return RMatrix::zeros(n, 0);
    }
    let mc = m.map(|x| C64::new(x, 0.0));
    let mut prod = CMatrix::identity(n, n);
    for &lambda in group {
        prod = &prod * (&mc - CMatrix::from_diagonal_element(n, n, lambda));
    }
    // The group is closed under conjugation, so the product is real.
    let real = prod.map(|z| z.re);
    let scale = real.norm().max(1.0);
    orthonormalize(&null_space(&(real / scale), group.len()), 1e-10)
}

fn projection_residual(m: &RMatrix, basis: &RMatrix) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    let image = m * basis;
    let back = basis * (basis.transpose() * &image);
    (0..image.ncols())
        .map(|j| (image.column(j) - back.column(j)).norm())
        .fold(0.0, f64::max)
}

/// Splits `ℝⁿ` into the sums of generalized eigenspaces of `m` with
/// `|λ| < 1`, `|λ| = 1` and `|λ| > 1`.
pub fn spectral_splitting(m: &RMatrix) -> Result<SpectralSplitting> {
    if m.nrows() != m.ncols() || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::ContractViolation("splitting needs a finite square matrix".into()));
    }
    let eigenvalues: Vec<C64> = m.clone().complex_eigenvalues().iter().copied().collect();
    let mut warnings = Vec::new();
    let (mut s, mut c, mut u) = (Vec::new(), Vec::new(), Vec::new());
    for &lambda in &eigenvalues {
        let gap = lambda.norm() - 1.0;
        if gap.abs() <= UNIMODULAR_TOL {
            if gap.abs() > EXACT_UNIMODULAR {
                warnings.push(format!(
                    "ambiguous splitting: |λ| − 1 = {gap:.3e} for λ = {lambda}"
                ));
            }
            c.push(lambda);
        } else if gap < 0.0 {
            s.push(lambda);
        } else {
            u.push(lambda);
        }
    }
    let stable = group_kernel(m, &s);
    let center = group_kernel(m, &c);
    let unstable = group_kernel(m, &u);
    let residual = [&stable, &center, &unstable]
        .iter()
        .map(|b| projection_residual(m, b))
        .fold(0.0, f64::max);
    Ok(SpectralSplitting {
        stable,
        center,
        unstable,
        eigenvalues,
        invariance_residual: residual,
        warnings,
    })
}

/// Splitting of an algebra endomorphism, with exact rational bases of the
/// center (roots of unity) and hyperbolic parts when they account for the
/// whole spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicSplitting {
    pub spectral: SpectralSplitting,
    #[serde(skip)]
    pub exact_center: Option<Vec<Vec<Rational>>>,
    #[serde(skip)]
    pub exact_hyperbolic: Option<Vec<Vec<Rational>>>,
}

pub fn hyperbolic_splitting(alg: &StructureAlgebra, f: &QMatrix) -> Result<HyperbolicSplitting> {
    if f.nrows() != alg.dim() || f.ncols() != alg.dim() {
        return Err(Error::ContractViolation("map and algebra dimensions differ".into()));
    }
    let spectral = spectral_splitting(&f.to_f64())?;
    let (cyclo, rest) = split_cyclotomic(&f.charpoly());
    let center = f.eval_poly(&cyclo).nullspace();
    let hyperbolic = f.eval_poly(&rest).nullspace();
    let (_, c_dim, _) = spectral.dims();
    let exact = center.len() == c_dim && center.len() + hyperbolic.len() == alg.dim();
    Ok(HyperbolicSplitting {
        spectral,
        exact_center: exact.then_some(center),
        exact_hyperbolic: exact.then_some(hyperbolic),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Accessibility {
    pub dim: usize,
    /// Basis of the generated subalgebra as floating point rows.
    pub basis: Vec<Vec<f64>>,
    pub exact: bool,
    pub rounds: usize,
    /// Whether the generated span is invariant under the complex structure;
    /// `None` without a complex structure.
    pub j_invariant: Option<bool>,
}

/// Dimension of the Lie subalgebra generated by `Eˢ ⊕ Eᵘ`.
pub fn accessibility_dimension(alg: &StructureAlgebra, f: &QMatrix) -> Result<Accessibility> {
    let split = hyperbolic_splitting(alg, f)?;
    if let Some(gens) = &split.exact_hyperbolic {
        let (basis, rounds) = alg.generated_subalgebra(gens);
        let j_invariant = match alg.complex_structure() {
            Some(_) => Some(alg.is_j_invariant(&basis)?),
            None => None,
        };
        let as_f64 = QMatrix::from_rows(&basis)
            .map(|m| m.to_f64())
            .unwrap_or_else(|_| RMatrix::zeros(0, alg.dim()));
        return Ok(Accessibility {
            dim: basis.len(),
            basis: as_f64.row_iter().map(|r| r.iter().copied().collect()).collect(),
            exact: true,
            rounds,
            j_invariant,
        });
    }
    // Spectrum with unimodular non-roots of unity: bracket float bases.
    let s = &split.spectral;
    let mut cols: Vec<_> = s.stable.column_iter().chain(s.unstable.column_iter()).map(|c| c.into_owned()).collect();
    let mut span = orthonormalize(&RMatrix::from_columns(&cols), 1e-9);
    let mut rounds = 0;
    loop {
        let current: Vec<_> = span.column_iter().map(|c| c.into_owned()).collect();
        cols = current.clone();
        for a in &current {
            for b in &current {
                cols.push(alg.bracket_f64(a, b));
            }
        }
        let next = orthonormalize(&RMatrix::from_columns(&cols), 1e-9);
        if next.ncols() == span.ncols() {
            break;
        }
        span = next;
        rounds += 1;
    }
    let j_invariant = alg.complex_structure().map(|j| {
        let jspan = j.to_f64() * &span;
        let back = &span * (span.transpose() * &jspan);
        (jspan - back).norm() < 1e-9
    });
    Ok(Accessibility {
        dim: span.ncols(),
        basis: span.column_iter().map(|c| c.iter().copied().collect()).collect(),
        exact: false,
        rounds,
        j_invariant,
    })
}

/// Exact check that `m` maps the span of `basis` into itself.
pub fn is_invariant_exact(m: &QMatrix, basis: &[Vec<Rational>]) -> bool {
    if basis.is_empty() {
        return true;
    }
    let dim = m.nrows();
    let base = QMatrix::span_basis(basis, dim).len();
    let mut all = basis.to_vec();
    all.extend(basis.iter().map(|v| m.mul_vec(v)));
    QMatrix::span_basis(&all, dim).len() == base
}
