use super::torus::{classify, unimodular_inverse};
use super::{unit, BlockDims, HyperbolicityClass, PointDynamics, SystemPoint};
use crate::cxcore::{complexify, realify, realify_vec, CMatrix, CVector, RLinearMap, RMatrix, RVector, C64};
use crate::lattices::{det_degree, DegreeReport, Lattice};
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Base charts switch when the affine coordinate exceeds this modulus.
const CHART_SWITCH: f64 = 2.0;

/// Two sections of `O(1)` on ℙ¹, `sᵢ = pᵢ + qᵢ·z` in chart 0 and
/// `sᵢ = pᵢ·ζ + qᵢ` in chart 1 (`ζ = 1/z`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearSection {
    pub constant: [C64; 2],
    pub linear: [C64; 2],
}

impl Default for LinearSection {
    /// `s = (1, z)`.
    fn default() -> Self {
        let (zero, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self { constant: [one, zero], linear: [zero, one] }
    }
}

impl LinearSection {
    pub fn new(constant: [C64; 2], linear: [C64; 2]) -> Result<Self> {
        let det = constant[0] * linear[1] - constant[1] * linear[0];
        if det.norm() <= 1e-12 {
            return Err(Error::CommonZero(format!(
                "sections {} + {}·z and {} + {}·z vanish simultaneously",
                constant[0], linear[0], constant[1], linear[1]
            )));
        }
        Ok(Self { constant, linear })
    }

    pub fn values(&self, chart: u8, x: C64) -> [C64; 2] {
        let (p, q) = (self.constant, self.linear);
        if chart == 0 {
            [p[0] + q[0] * x, p[1] + q[1] * x]
        } else {
            [p[0] * x + q[0], p[1] * x + q[1]]
        }
    }

    pub fn derivative(&self, chart: u8) -> [C64; 2] {
        if chart == 0 {
            self.linear
        } else {
            self.constant
        }
    }
}

/// The four ℝ-independent sections built from `s = (s₁, s₂)`.
fn sigma(s: [C64; 2]) -> [CVector; 4] {
    let i = C64::new(0.0, 1.0);
    let v = |a: C64, b: C64| CVector::from_vec(vec![a, b]);
    [v(s[0], s[1]), v(i * s[0], -i * s[1]), v(-s[1], s[0]), v(i * s[1], i * s[0])]
}

/// `n` copies of `L ⊕ L` over ℙ¹ modulo the lattices spanned by the four
/// sections in each copy, with a hyperbolic `A ∈ SL(n, ℤ)` mixing the copies.
///
/// Coordinates are `[x, v₁₁, v₁₂, …, vₙ₁, vₙ₂]` with `x` the base coordinate
/// of the chart and `vₗ ∈ ℂ²` the `l`-th copy in the trivialization of that
/// chart. Fibers are stored with real section coordinates in `[0, 1)⁴`.
#[derive(Debug, Clone, Serialize)]
pub struct BlanchardCalabi {
    pub copies: usize,
    pub matrix: Vec<Vec<i64>>,
    pub sections: LinearSection,
    #[serde(skip)]
    inverse: Vec<Vec<i64>>,
    #[serde(skip)]
    dims: BlockDims,
}

impl BlanchardCalabi {
    pub fn new(matrix: Vec<Vec<i64>>, sections: LinearSection) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::ContractViolation("mixing matrix must be square".into()));
        }
        let inverse = unimodular_inverse(&matrix)?;
        let (class, split) = classify(&matrix)?;
        if class != HyperbolicityClass::Anosov {
            return Err(Error::NotHyperbolic(format!("mixing matrix is {class:?}")));
        }
        let (s, _, u) = split.dims();
        // Re-validate in case the caller built the sections by hand.
        let sections = LinearSection::new(sections.constant, sections.linear)?;
        Ok(Self {
            copies: n,
            matrix,
            sections,
            inverse,
            dims: BlockDims { stable: 4 * s, center: 2, unstable: 4 * u },
        })
    }

    /// Two copies mixed by the cat map, sections `(1, z)`.
    pub fn standard() -> Self {
        Self::new(vec![vec![2, 1], vec![1, 1]], LinearSection::default()).expect("standard construction")
    }

    /// The four lattice generators of one copy over the base point `x`.
    pub fn lattice_vectors(&self, chart: u8, x: C64) -> [CVector; 4] {
        sigma(self.sections.values(chart, x))
    }

    /// Derivatives of the lattice generators in the base coordinate.
    pub fn lattice_vector_derivatives(&self, chart: u8) -> [CVector; 4] {
        sigma(self.sections.derivative(chart))
    }

    /// Real matrix whose columns are the generators of one copy.
    pub fn frame(&self, chart: u8, x: C64) -> RMatrix {
        RMatrix::from_columns(&self.lattice_vectors(chart, x).iter().map(realify_vec).collect::<Vec<_>>())
    }

    fn frame_inverse(&self, chart: u8, x: C64) -> Result<RMatrix> {
        self.frame(chart, x)
            .try_inverse()
            .ok_or_else(|| Error::CommonZero(format!("sections vanish at chart {chart} point {x}")))
    }

    /// Lattice of one copy over `x`.
    pub fn fiber_lattice(&self, chart: u8, x: C64) -> Result<Lattice> {
        Lattice::new(self.lattice_vectors(chart, x).to_vec())
    }

    /// Lattice of the whole fiber `ℂ^{2n}` over `x`, copy by copy.
    pub fn full_fiber_lattice(&self, chart: u8, x: C64) -> Result<Lattice> {
        let n = self.copies;
        let mut basis = Vec::with_capacity(4 * n);
        for l in 0..n {
            for s in self.lattice_vectors(chart, x) {
                let mut v = CVector::zeros(2 * n);
                v.rows_mut(2 * l, 2).copy_from(&s);
                basis.push(v);
            }
        }
        Lattice::new(basis)
    }

    /// The fiber map `A ⊗ I₂` on `ℂ^{2n}`.
    pub fn fiber_action(&self) -> RLinearMap {
        let n = self.copies;
        RLinearMap::from_complex_linear(CMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i % 2 == j % 2 {
                C64::new(self.matrix[i / 2][j / 2] as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Integer matrix of the fiber map in the lattice basis over `x`.
    pub fn lattice_action_coordinates(&self, chart: u8, x: C64) -> Result<Vec<Vec<i64>>> {
        self.full_fiber_lattice(chart, x)?.map_integral(&self.fiber_action(), 1e-9)
    }

    /// Real section coordinates of each copy.
    pub fn fiber_real_coords(&self, p: &SystemPoint) -> Result<Vec<RVector>> {
        let inv = self.frame_inverse(p.chart, p.coords[0])?;
        Ok((0..self.copies).map(|l| &inv * realify_vec(&self.block(p, l))).collect())
    }

    fn block(&self, p: &SystemPoint, l: usize) -> CVector {
        CVector::from_column_slice(&p.coords[1 + 2 * l..3 + 2 * l])
    }

    fn assemble(&self, chart: u8, x: C64, a: &[RVector]) -> SystemPoint {
        let frame = self.frame(chart, x);
        let mut coords = vec![x];
        for al in a {
            coords.extend(complexify(&(&frame * al)).iter().copied());
        }
        SystemPoint::new(chart, coords)
    }

    /// Mixes section coordinates across copies and splits off integer parts.
    fn mix(&self, a: &[RVector], matrix: &[Vec<i64>]) -> (Vec<RVector>, Vec<RVector>) {
        let mut reduced = Vec::with_capacity(self.copies);
        let mut shifts = Vec::with_capacity(self.copies);
        for row in matrix {
            let mixed = row.iter().zip(a).fold(RVector::zeros(4), |acc, (&c, al)| acc + al * c as f64);
            let floor = mixed.map(f64::floor);
            reduced.push(&mixed - &floor);
            shifts.push(floor);
        }
        (reduced, shifts)
    }

    /// The same point expressed in the other base chart.
    pub fn switch_chart(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let x = p.coords[0];
        if x.norm() == 0.0 {
            return Err(Error::ContractViolation("base point is the pole of the other chart".into()));
        }
        let inv = x.inv();
        let mut coords = vec![inv];
        coords.extend(p.coords[1..].iter().map(|v| v * inv));
        Ok(SystemPoint::new(1 - p.chart, coords))
    }

    fn in_chart(&self, p: &SystemPoint, chart: u8) -> Result<SystemPoint> {
        if p.chart == chart {
            Ok(p.clone())
        } else {
            self.switch_chart(p)
        }
    }

    fn normalize(&self, p: SystemPoint) -> Result<SystemPoint> {
        if p.coords[0].norm() > CHART_SWITCH {
            self.switch_chart(&p)
        } else {
            Ok(p)
        }
    }

    /// The point over the base point `x` (in `chart`) on the center leaf of
    /// `p`, i.e. with the same section coordinates.
    pub fn center_point(&self, p: &SystemPoint, chart: u8, x: C64) -> Result<SystemPoint> {
        let a = self.fiber_real_coords(p)?;
        self.normalize(self.assemble(chart, x, &a))
    }

    /// Center holonomy on one copy from the fiber over `x` to the fiber over
    /// `y`, each in the trivialization of its own chart: the real-linear map
    /// keeping section coordinates fixed.
    pub fn center_transport(&self, from: (u8, C64), to: (u8, C64)) -> Result<RLinearMap> {
        let m = self.frame(to.0, to.1) * self.frame_inverse(from.0, from.1)?;
        RLinearMap::from_real_matrix(&m)
    }

    /// Degree of the determinant of the fiber bundle as the sum over its
    /// `2n` line-bundle summands of degree one.
    pub fn det_degree(&self) -> DegreeReport {
        det_degree(&vec![1; 2 * self.copies])
    }

    /// The closed-form count `n·deg L`.
    pub fn stated_degree(&self) -> i64 {
        self.copies as i64
    }

    fn base_sample(rng: &mut ChaCha8Rng) -> (u8, C64) {
        let height = 2.0 * unit(rng) - 1.0;
        let phi = 2.0 * PI * unit(rng);
        let r = (1.0 - height * height).sqrt();
        let (a, b) = (C64::from_polar(r, phi), C64::new(1.0 - height, 0.0));
        if b.norm() >= a.norm() {
            (0, a / b)
        } else {
            (1, b / a)
        }
    }
}

impl PointDynamics for BlanchardCalabi {
    fn coord_dim(&self) -> usize {
        1 + 2 * self.copies
    }

    fn evaluate(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let a = self.fiber_real_coords(p)?;
        let (reduced, _) = self.mix(&a, &self.matrix);
        Ok(self.assemble(p.chart, p.coords[0], &reduced))
    }

    fn evaluate_inverse(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let a = self.fiber_real_coords(p)?;
        let (reduced, _) = self.mix(&a, &self.inverse);
        Ok(self.assemble(p.chart, p.coords[0], &reduced))
    }

    fn tangent_real(&self, p: &SystemPoint) -> Result<RMatrix> {
        let n = self.copies;
        let a = self.fiber_real_coords(p)?;
        let (_, shifts) = self.mix(&a, &self.matrix);
        let d_sigma = self.lattice_vector_derivatives(p.chart);
        let mut t = RMatrix::zeros(2 + 4 * n, 2 + 4 * n);
        t[(0, 0)] = 1.0;
        t[(1, 1)] = 1.0;
        for l in 0..n {
            for m in 0..n {
                let c = self.matrix[l][m] as f64;
                for k in 0..4 {
                    t[(2 + 4 * l + k, 2 + 4 * m + k)] = c;
                }
            }
            // v' = A·v − Σ mₖ σₖ(x) with locally constant integers mₖ.
            let column = d_sigma.iter().zip(shifts[l].iter()).fold(CVector::zeros(2), |acc, (s, &m)| acc - s * C64::new(m, 0.0));
            let block = realify(&CMatrix::from_column_slice(2, 1, column.as_slice()));
            t.view_mut((2 + 4 * l, 0), (4, 2)).copy_from(&block);
        }
        Ok(t)
    }

    fn displacement(&self, p: &SystemPoint, q: &SystemPoint) -> Result<RVector> {
        let q = self.in_chart(q, p.chart)?;
        let (xp, xq) = (p.coords[0], q.coords[0]);
        let ap = self.fiber_real_coords(p)?;
        let aq = self.fiber_real_coords(&q)?;
        let frame_q = self.frame(p.chart, xq);
        let mut out = vec![xq - xp];
        for l in 0..self.copies {
            let shift = (&aq[l] - &ap[l]).map(f64::round);
            let lifted = realify_vec(&self.block(&q, l)) - &frame_q * shift;
            out.extend(complexify(&lifted).iter().zip(self.block(p, l).iter()).map(|(a, b)| a - b));
        }
        Ok(realify_vec(&CVector::from_vec(out)))
    }

    fn exp(&self, p: &SystemPoint, v: &RVector) -> Result<SystemPoint> {
        let dv = complexify(v);
        let coords: Vec<C64> = p.coords.iter().zip(dv.iter()).map(|(a, b)| a + b).collect();
        let moved = SystemPoint::new(p.chart, coords);
        let a: Vec<RVector> = self.fiber_real_coords(&moved)?.into_iter().map(|al| al.map(|c| c - c.floor())).collect();
        self.normalize(self.assemble(moved.chart, moved.coords[0], &a))
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> SystemPoint {
        let (chart, x) = Self::base_sample(rng);
        let a: Vec<RVector> = (0..self.copies).map(|_| RVector::from_fn(4, |_, _| unit(rng))).collect();
        self.assemble(chart, x, &a)
    }

    fn block_dims(&self) -> BlockDims {
        self.dims
    }

    fn is_holomorphic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxcore::c;
    use crate::lattices::clinear_extension_residual;
    use rand::SeedableRng;

    #[test]
    fn lattice_generators_at_zero_and_one() {
        let bc = BlanchardCalabi::standard();
        let at = |x: f64| bc.lattice_vectors(0, c(x, 0.0)).map(|v| (v[0], v[1]));
        assert_eq!(
            at(0.0),
            [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 1.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)), (c(0.0, 0.0), c(0.0, 1.0))]
        );
        assert_eq!(
            at(1.0),
            [(c(1.0, 0.0), c(1.0, 0.0)), (c(0.0, 1.0), c(0.0, -1.0)), (c(-1.0, 0.0), c(1.0, 0.0)), (c(0.0, 1.0), c(0.0, 1.0))]
        );
    }

    #[test]
    fn common_zero_and_non_hyperbolic_rejected() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert!(matches!(LinearSection::new([z, z], [one, one]), Err(Error::CommonZero(_))));
        let r = BlanchardCalabi::new(vec![vec![1, 1], vec![0, 1]], LinearSection::default());
        assert!(matches!(r, Err(Error::NotHyperbolic(_))));
    }

    #[test]
    fn generators_independent_in_both_charts() {
        let bc = BlanchardCalabi::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for chart in [0u8, 1] {
            for _ in 0..200 {
                let x = C64::from_polar(CHART_SWITCH * unit(&mut rng).sqrt(), 2.0 * PI * unit(&mut rng));
                let f = bc.frame(chart, x);
                let gram = f.transpose() * &f;
                // |s|⁸ bounds the Gram determinant from below by 1 on |x| ≤ 2.
                assert!(gram.determinant() >= 1.0 - 1e-9, "chart {chart}, x = {x}");
            }
        }
    }

    #[test]
    fn fiber_map_preserves_lattices_exactly() {
        let bc = BlanchardCalabi::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let (chart, x) = BlanchardCalabi::base_sample(&mut rng);
            let m = bc.lattice_action_coordinates(chart, x).unwrap();
            let q = crate::liecx::QMatrix::from_int_rows(
                &m.iter().map(|r| r.iter().map(|&e| e as i128).collect::<Vec<_>>()).collect::<Vec<_>>().iter().map(|r| r.as_slice()).collect::<Vec<_>>(),
            );
            assert!(crate::liecx::rational::abs_is_one(q.determinant()));
        }
    }

    #[test]
    fn center_transport_between_zero_and_one() {
        let bc = BlanchardCalabi::standard();
        let h = bc.center_transport((0, c(0.0, 0.0)), (0, c(1.0, 0.0))).unwrap();
        assert!((h.antilinear[(0, 1)] + 1.0).norm() < 1e-12 && (h.antilinear[(1, 0)] - 1.0).norm() < 1e-12);
        assert!((h.dbar_norm() - 1.0).abs() < 1e-12);
        let l0 = bc.fiber_lattice(0, c(0.0, 0.0)).unwrap();
        let l1 = bc.fiber_lattice(0, c(1.0, 0.0)).unwrap();
        let (defect, _) = clinear_extension_residual(&l0, &l1, &[0, 1, 2, 3]).unwrap();
        assert!((defect - h.dbar_norm()).abs() < 1e-12);
    }

    #[test]
    fn chart_switch_keeps_section_coordinates() {
        let bc = BlanchardCalabi::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = bc.sample_point(&mut rng);
        let q = bc.switch_chart(&p).unwrap();
        let (a, b) = (bc.fiber_real_coords(&p).unwrap(), bc.fiber_real_coords(&q).unwrap());
        for l in 0..2 {
            assert!((&a[l] - &b[l]).norm() < 1e-12);
        }
        assert!(bc.displacement(&p, &q).unwrap().norm() < 1e-12);
    }

    #[test]
    fn degrees() {
        let bc = BlanchardCalabi::standard();
        assert_eq!(bc.det_degree(), DegreeReport { degree: 4, kahler: false });
        assert_eq!(bc.stated_degree(), 2);
        assert!(det_degree(&[0, 0, 0, 0]).kahler);
    }
}
