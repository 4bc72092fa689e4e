use super::{unit, BlockDims, PointDynamics, SystemPoint, TorusAutomorphism};
use crate::cxcore::{complexify, realify, realify_vec, CMatrix, CVector, RMatrix, RVector, SpherePoint, C64};
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Fiber charts switch when the affine coordinate exceeds this modulus.
const CHART_SWITCH: f64 = 2.0;

/// `(ẑ, w) ↦ (A·ẑ, g(ẑ)·w)` on a base torus times the Riemann sphere.
///
/// The fiber coordinate is `w` in chart 0 (the point `[w:1]`) and `1/w` in
/// chart 1 (the point `[1:u]`). With a modulation amplitude the fiber matrix
/// is `R(θ(ẑ))·g` with `θ = amp·sin(2π Re ẑ₁)` and `R` a real rotation,
/// which is continuous but not holomorphic in `ẑ`.
#[derive(Debug, Clone, Serialize)]
pub struct MobiusFiberSystem {
    pub base: TorusAutomorphism,
    pub g: CMatrix,
    pub modulation: Option<f64>,
    #[serde(skip)]
    g_inv: CMatrix,
}

fn homogeneous(chart: u8, c: C64) -> (C64, C64) {
    if chart == 0 {
        (c, C64::new(1.0, 0.0))
    } else {
        (C64::new(1.0, 0.0), c)
    }
}

fn homogeneous_derivative(chart: u8) -> (C64, C64) {
    if chart == 0 {
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    } else {
        (C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }
}

/// Numerator and denominator of the affine coordinate in `chart`.
fn ratio_parts(chart: u8, h: (C64, C64)) -> (C64, C64) {
    if chart == 0 {
        (h.0, h.1)
    } else {
        (h.1, h.0)
    }
}

/// Chooses a chart for a homogeneous pair, keeping `preferred` unless its
/// coordinate is infinite or exceeds the switching modulus.
fn chart_for(preferred: u8, h: (C64, C64)) -> (u8, C64) {
    let (n, d) = ratio_parts(preferred, h);
    if d.norm() > 0.0 {
        let c = n / d;
        if c.norm() <= CHART_SWITCH {
            return (preferred, c);
        }
    }
    let other = 1 - preferred;
    let (n, d) = ratio_parts(other, h);
    (other, n / d)
}

fn apply2(m: &CMatrix, h: (C64, C64)) -> (C64, C64) {
    (m[(0, 0)] * h.0 + m[(0, 1)] * h.1, m[(1, 0)] * h.0 + m[(1, 1)] * h.1)
}

fn rotation(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
}

fn rotation_derivative(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_row_slice(2, 2, &[C64::new(-s, 0.0), C64::new(-c, 0.0), C64::new(c, 0.0), C64::new(-s, 0.0)])
}

impl MobiusFiberSystem {
    pub fn new(base: TorusAutomorphism, g: CMatrix, modulation: Option<f64>) -> Result<Self> {
        if g.shape() != (2, 2) {
            return Err(Error::ContractViolation("fiber matrix must be 2×2".into()));
        }
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularInput("fiber matrix is not invertible".into()))?;
        if let Some(a) = modulation {
            if !a.is_finite() {
                return Err(Error::ContractViolation("modulation amplitude must be finite".into()));
            }
        }
        Ok(Self { base, g, modulation, g_inv })
    }

    fn n(&self) -> usize {
        self.base.dim()
    }

    fn theta(&self, z: &CVector) -> f64 {
        self.modulation.map_or(0.0, |a| a * (2.0 * PI * z[0].re).sin())
    }

    /// Fiber matrix over the base point `z`.
    pub fn fiber_matrix(&self, z: &CVector) -> CMatrix {
        match self.modulation {
            None => self.g.clone(),
            Some(_) => rotation(self.theta(z)) * &self.g,
        }
    }

    fn fiber_matrix_inverse(&self, z: &CVector) -> CMatrix {
        match self.modulation {
            None => self.g_inv.clone(),
            Some(_) => &self.g_inv * rotation(-self.theta(z)),
        }
    }

    fn base_of(&self, p: &SystemPoint) -> CVector {
        CVector::from_column_slice(&p.coords[..self.n()])
    }

    fn join(&self, z: &CVector, chart: u8, c: C64) -> SystemPoint {
        let mut coords: Vec<C64> = z.iter().copied().collect();
        coords.push(c);
        SystemPoint::new(chart, coords)
    }

    /// The fiber component as a point of the sphere.
    pub fn fiber_point(&self, p: &SystemPoint) -> Result<SpherePoint> {
        let (a, b) = homogeneous(p.chart, p.coords[self.n()]);
        SpherePoint::new(a, b)
    }

    /// The point over the base point `z` with fiber component `s`.
    pub fn point(&self, z: &CVector, s: &SpherePoint) -> SystemPoint {
        let (chart, c) = chart_for(0, s.coords());
        self.join(&self.base.lattice.reduce(z), chart, c)
    }

    pub fn base_point(&self, p: &SystemPoint) -> CVector {
        self.base_of(p)
    }

    /// Product of fiber matrices along the first `n` steps of the orbit of
    /// `p`, scaled to unit determinant.
    pub fn fiber_cocycle(&self, p: &SystemPoint, n: usize) -> CMatrix {
        let mut z = self.base_of(p);
        let mut m = CMatrix::identity(2, 2);
        for _ in 0..n {
            m = self.unit_fiber_matrix(&z) * m;
            z = self.base.apply(&z);
        }
        m
    }

    /// The fiber matrix scaled to unit determinant. Products are formed from
    /// these factors; recomputing the determinant of a long product loses it
    /// to cancellation.
    pub fn unit_fiber_matrix(&self, z: &CVector) -> CMatrix {
        let g = &self.g;
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        self.fiber_matrix(z) / det.sqrt()
    }

    /// Whether the fiber matrix is constant over the base.
    pub fn is_constant(&self) -> bool {
        self.modulation.is_none()
    }
}

impl PointDynamics for MobiusFiberSystem {
    fn coord_dim(&self) -> usize {
        self.n() + 1
    }

    fn evaluate(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let z = self.base_of(p);
        let h = apply2(&self.fiber_matrix(&z), homogeneous(p.chart, p.coords[self.n()]));
        let (chart, c) = chart_for(p.chart, h);
        Ok(self.join(&self.base.apply(&z), chart, c))
    }

    fn evaluate_inverse(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let pre = self.base.apply_inverse(&self.base_of(p));
        let h = apply2(&self.fiber_matrix_inverse(&pre), homogeneous(p.chart, p.coords[self.n()]));
        let (chart, c) = chart_for(p.chart, h);
        Ok(self.join(&pre, chart, c))
    }

    fn tangent_real(&self, p: &SystemPoint) -> Result<RMatrix> {
        let n = self.n();
        let z = self.base_of(p);
        let gm = self.fiber_matrix(&z);
        let source = homogeneous(p.chart, p.coords[n]);
        let image = apply2(&gm, source);
        let (target, _) = chart_for(p.chart, image);
        let (num, den) = ratio_parts(target, image);
        let quotient = |dh: (C64, C64)| {
            let (dn, dd) = ratio_parts(target, dh);
            (dn * den - num * dd) / (den * den)
        };
        let d_fiber = quotient(apply2(&gm, homogeneous_derivative(p.chart)));
        let mut t = RMatrix::zeros(2 * n + 2, 2 * n + 2);
        t.view_mut((0, 0), (2 * n, 2 * n)).copy_from(self.base.real_matrix());
        let fiber_block = realify(&CMatrix::from_element(1, 1, d_fiber));
        t.view_mut((2 * n, 2 * n), (2, 2)).copy_from(&fiber_block);
        if let Some(amp) = self.modulation {
            let theta = self.theta(&z);
            let dh = apply2(&(rotation_derivative(theta) * &self.g), source);
            let dtheta = amp * 2.0 * PI * (2.0 * PI * z[0].re).cos();
            let d_base = quotient(dh) * dtheta;
            t[(2 * n, 0)] = d_base.re;
            t[(2 * n + 1, 0)] = d_base.im;
        }
        Ok(t)
    }

    fn displacement(&self, p: &SystemPoint, q: &SystemPoint) -> Result<RVector> {
        let n = self.n();
        let dz = self.base.lattice.wrap_difference(&(self.base_of(q) - self.base_of(p)));
        let (num, den) = ratio_parts(p.chart, homogeneous(q.chart, q.coords[n]));
        if den.norm() == 0.0 {
            return Err(Error::ContractViolation("fiber points are antipodal across charts".into()));
        }
        let mut all: Vec<C64> = dz.iter().copied().collect();
        all.push(num / den - p.coords[n]);
        Ok(realify_vec(&CVector::from_vec(all)))
    }

    fn exp(&self, p: &SystemPoint, v: &RVector) -> Result<SystemPoint> {
        let n = self.n();
        let dv = complexify(v);
        let z = self.base.lattice.reduce(&(self.base_of(p) + dv.rows(0, n)));
        let (chart, c) = chart_for(p.chart, homogeneous(p.chart, p.coords[n] + dv[n]));
        Ok(self.join(&z, chart, c))
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> SystemPoint {
        let z = self.base.sample(rng);
        let height = 2.0 * unit(rng) - 1.0;
        let phi = 2.0 * PI * unit(rng);
        let r = (1.0 - height * height).sqrt();
        let h = (C64::from_polar(r, phi), C64::new(1.0 - height, 0.0));
        let (chart, c) = if h.1.norm() >= h.0.norm() {
            (0, h.0 / h.1)
        } else {
            (1, h.1 / h.0)
        };
        self.join(&z, chart, c)
    }

    fn block_dims(&self) -> BlockDims {
        let b = self.base.block_dims();
        BlockDims { stable: b.stable, center: b.center + 2, unstable: b.unstable }
    }

    fn is_holomorphic(&self) -> bool {
        self.modulation.is_none()
    }
}
