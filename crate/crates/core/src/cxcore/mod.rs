//! Complex and real-linear algebra on small coordinate spaces.
//!
//! Real coordinates of a complex vector `(z₁, …, zₙ)` are always interleaved
//! as `(Re z₁, Im z₁, …, Re zₙ, Im zₙ)`; [`realify`] and [`complexify`]
//! convert between the two pictures.

mod dilatation;
mod kak;
mod rlinear;
mod sphere;

pub use dilatation::{dilatation, DilatationEstimate, CIRCLE_SAMPLES, DEFAULT_RADII};
pub use kak::{kak, svd2, Kak, Svd2};
pub use rlinear::{antilinear_split, standard_real_basis, RLinearMap};
pub use sphere::{chordal_distance, degenerate_limit, mobius_apply, DegenerateLimit, SpherePoint, DEGENERATE_NORM_RATIO};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cvec(entries: &[C64]) -> CVector {
    CVector::from_column_slice(entries)
}

/// Builds a complex matrix from row slices.
pub fn cmat(rows: &[&[C64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn realify_vec(v: &CVector) -> RVector {
    RVector::from_fn(2 * v.len(), |k, _| {
        let z = v[k / 2];
        if k % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

pub fn complexify(v: &RVector) -> CVector {
    assert!(v.len() % 2 == 0, "odd real dimension {}", v.len());
    CVector::from_fn(v.len() / 2, |k, _| C64::new(v[2 * k], v[2 * k + 1]))
}

/// Real matrix of the ℂ-linear map `m` in interleaved coordinates.
pub fn realify(m: &CMatrix) -> RMatrix {
    let mut out = RMatrix::zeros(2 * m.nrows(), 2 * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Standard complex structure (multiplication by `i`) in interleaved real
/// coordinates of ℂⁿ.
pub fn complex_structure(n: usize) -> RMatrix {
    realify(&CMatrix::from_diagonal_element(n, n, I))
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

pub fn real_operator_norm(m: &RMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Singular values in decreasing order.
pub fn singular_values(m: &RMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of the null space of `m` with exactly `dim` columns:
/// the right singular vectors of the `dim` smallest singular values.
pub fn null_space(m: &RMatrix, dim: usize) -> RMatrix {
    let n = m.ncols();
    if dim == 0 {
        return RMatrix::zeros(n, 0);
    }
    // Pad to a square matrix so that the SVD yields a full right basis.
    let rows = m.nrows().max(n);
    let mut padded = RMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut out = RMatrix::zeros(n, dim);
    for (col, &k) in order.iter().take(dim).enumerate() {
        out.set_column(col, &vt.row(k).transpose());
    }
    out
}

/// Gram–Schmidt orthonormalization of the columns of `m`, dropping columns
/// whose residual norm is below `tol` (relative to the column norm).
pub fn orthonormalize(m: &RMatrix, tol: f64) -> RMatrix {
    let mut cols: Vec<RVector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &cols {
                let d = q.dot(&v);
                v -= q * d;
            }
        }
        let r = v.norm();
        if r > tol * scale {
            cols.push(v / r);
        }
    }
    if cols.is_empty() {
        RMatrix::zeros(m.nrows(), 0)
    } else {
        RMatrix::from_columns(&cols)
    }
}

/// Complex-orthonormal frame for a real subspace that is invariant under the
/// standard complex structure. The returned real matrix has columns
/// `(c₁, i·c₁, c₂, i·c₂, …)`, so that real coordinates in this frame are the
/// interleaved coordinates of a complex vector.
pub fn complex_frame(basis: &RMatrix, tol: f64) -> RMatrix {
    let n = basis.nrows() / 2;
    let mut frame: Vec<CVector> = Vec::new();
    for j in 0..basis.ncols() {
        let mut v = complexify(&basis.column(j).into_owned());
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &frame {
                let d = q.dotc(&v);
                v -= q * d;
            }
        }
        let r = v.norm();
        if r > tol * scale {
            frame.push(v.unscale(r));
        }
    }
    let mut out = RMatrix::zeros(2 * n, 2 * frame.len());
    for (k, q) in frame.iter().enumerate() {
        out.set_column(2 * k, &realify_vec(q));
        out.set_column(2 * k + 1, &realify_vec(&(q * I)));
    }
    out
}
