//! Dense rational matrices and polynomials for exact algebra checks.

use crate::cxcore::RMatrix;
use crate::{Error, Result};
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

pub fn q(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// Parses `"p/q"`, `"p"` or a JSON integer.
pub fn parse_rational(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|x| q(x as i128))
            .ok_or_else(|| Error::Catalog(format!("non-integer number {n}; use a \"p/q\" string"))),
        serde_json::Value::String(s) => {
            let parse = |t: &str| {
                t.trim()
                    .parse::<i128>()
                    .map_err(|e| Error::Catalog(format!("bad rational {s:?}: {e}")))
            };
            match s.split_once('/') {
                Some((a, b)) => {
                    let d = parse(b)?;
                    if d == 0 {
                        return Err(Error::Catalog(format!("zero denominator in {s:?}")));
                    }
                    Ok(Rational::new(parse(a)?, d))
                }
                None => Ok(q(parse(s)?)),
            }
        }
        other => Err(Error::Catalog(format!("expected a rational, got {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ContractViolation("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_int_rows(rows: &[&[i128]]) -> Self {
        let v: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        Self::from_rows(&v).expect("rectangular integer rows")
    }

    pub fn from_columns(cols: &[Vec<Rational>], nrows: usize) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for i in 0..nrows {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "shape mismatch in product");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Rational::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: Rational) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        self.add(&other.scale(-Rational::one()))
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).fold(Rational::zero(), |a, i| a + self[(i, i)])
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn to_f64(&self) -> RMatrix {
        RMatrix::from_fn(self.rows, self.cols, |i, j| {
            let x = self[(i, j)];
            x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, row * m.cols + j);
            }
            let inv = m[(row, col)].recip();
            for j in 0..m.cols {
                m[(row, j)] *= inv;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let f = m[(r, col)];
                    for j in 0..m.cols {
                        let delta = f * m[(row, j)];
                        m[(r, j)] -= delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn determinant(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                for j in 0..n {
                    m.data.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pivot = m[(col, col)];
            det *= pivot;
            for r in col + 1..n {
                let f = m[(r, col)] / pivot;
                if !f.is_zero() {
                    for j in col..n {
                        let delta = f * m[(col, j)];
                        m[(r, j)] -= delta;
                    }
                }
            }
        }
        det
    }

    /// Basis of the null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)];
                }
                v
            })
            .collect()
    }

    /// Row-reduced basis of the span of the given vectors.
    pub fn span_basis(vectors: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
        if vectors.is_empty() {
            return Vec::new();
        }
        let rows: Vec<Vec<Rational>> = vectors.to_vec();
        let m = QMatrix::from_rows(&rows).expect("equal length vectors");
        let (r, pivots) = m.rref();
        (0..pivots.len()).map(|i| (0..dim).map(|j| r[(i, j)]).collect()).collect()
    }

    /// `p(M)` for a polynomial with coefficients from low to high degree.
    pub fn eval_poly(&self, p: &[Rational]) -> QMatrix {
        let n = self.rows;
        let mut acc = QMatrix::zeros(n, n);
        for c in p.iter().rev() {
            acc = acc.mul(self).add(&QMatrix::identity(n).scale(*c));
        }
        acc
    }

    /// Characteristic polynomial `det(xI − M)` by Faddeev–LeVerrier,
    /// coefficients from low to high degree.
    pub fn charpoly(&self) -> Vec<Rational> {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        let mut m = QMatrix::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&QMatrix::identity(n).scale(coeffs[n - k + 1]));
            coeffs[n - k] = -self.mul(&m).trace() / q(k as i128);
        }
        coeffs
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

pub fn poly_trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(out)
}

/// Quotient and remainder of polynomial division.
pub fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = poly_trim(b.to_vec());
    let lead = *b.last().expect("nonempty divisor");
    assert!(!lead.is_zero(), "division by the zero polynomial");
    let mut r = poly_trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let mut quot = vec![Rational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let f = *r.last().expect("nonempty") / lead;
        quot[shift] = f;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= f * c;
        }
        r.pop();
        r = poly_trim(r);
        if r.is_empty() {
            r.push(Rational::zero());
        }
    }
    (poly_trim(quot), r)
}

pub fn poly_is_zero(p: &[Rational]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// The `k`-th cyclotomic polynomial.
pub fn cyclotomic(k: usize) -> Vec<Rational> {
    assert!(k >= 1);
    let mut num = vec![Rational::zero(); k + 1];
    num[0] = -Rational::one();
    num[k] = Rational::one();
    for d in (1..k).filter(|d| k % d == 0) {
        num = poly_divmod(&num, &cyclotomic(d)).0;
    }
    num
}

/// Splits `p = c · h` where `c` collects every cyclotomic factor (roots of
/// unity) and `h` has no root of unity as a root.
pub fn split_cyclotomic(p: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut h = poly_trim(p.to_vec());
    let mut c = vec![Rational::one()];
    for k in 1..=64 {
        if h.len() <= 1 {
            break;
        }
        let phi = cyclotomic(k);
        loop {
            let (quot, rem) = poly_divmod(&h, &phi);
            if !poly_is_zero(&rem) || h.len() < phi.len() {
                break;
            }
            h = quot;
            c = poly_mul(&c, &phi);
        }
    }
    (c, h)
}

pub fn abs_is_one(x: Rational) -> bool {
    x.abs() == Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_values() {
        assert_eq!(cyclotomic(1), vec![q(-1), q(1)]);
        assert_eq!(cyclotomic(4), vec![q(1), q(0), q(1)]);
        assert_eq!(cyclotomic(6), vec![q(1), q(-1), q(1)]);
    }

    #[test]
    fn charpoly_of_cat_map() {
        let a = QMatrix::from_int_rows(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.charpoly(), vec![q(1), q(-3), q(1)]);
        assert!(a.eval_poly(&a.charpoly()).is_zero());
    }

    #[test]
    fn cyclotomic_split() {
        // (x − 1)²(x² − 3x + 1)
        let p = poly_mul(&poly_mul(&cyclotomic(1), &cyclotomic(1)), &[q(1), q(-3), q(1)]);
        let (c, h) = split_cyclotomic(&p);
        assert_eq!(c, vec![q(1), q(-2), q(1)]);
        assert_eq!(h, vec![q(1), q(-3), q(1)]);
    }

    #[test]
    fn nullspace_and_rank() {
        let m = QMatrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
        assert_eq!(QMatrix::from_int_rows(&[&[2, 1], &[1, 1]]).determinant(), q(1));
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational(&serde_json::json!("3/6")).unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational(&serde_json::json!(-4)).unwrap(), q(-4));
        assert!(parse_rational(&serde_json::json!("1/0")).is_err());
        assert!(parse_rational(&serde_json::json!(0.5)).is_err());
    }
}
