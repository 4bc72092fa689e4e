//! The example systems as executable descriptors: point evaluation, exact
//! tangent cocycles in interleaved real coordinates, and the closed-form
//! invariant data used as oracles.

mod blanchard;
mod mobius;
mod nil;
mod quotient;
mod registry;
mod skew;
mod torus;

pub use blanchard::{BlanchardCalabi, LinearSection};
pub use mobius::MobiusFiberSystem;
pub use nil::Nilmanifold;
pub use quotient::{EllipticQuotient, QuotientCheck};
pub use registry::{build, registry_names};
pub use skew::SkewProduct;
pub use torus::{HyperbolicityClass, TorusAutomorphism};

use crate::cxcore::{complex_structure, complexify, realify_vec, CVector, RMatrix, RVector, C64};
use crate::{Error, Result};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A point in one chart of a system's atlas. Torus factors are stored as
/// fundamental-domain representatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemPoint {
    pub chart: u8,
    pub coords: Vec<C64>,
}

impl SystemPoint {
    pub fn new(chart: u8, coords: Vec<C64>) -> Self {
        Self { chart, coords }
    }

    pub fn real(&self) -> RVector {
        realify_vec(&CVector::from_column_slice(&self.coords))
    }

    pub fn from_real(chart: u8, v: &RVector) -> Self {
        Self { chart, coords: complexify(v).iter().copied().collect() }
    }
}

/// Real dimensions of the stable, center and unstable bundles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockDims {
    pub stable: usize,
    pub center: usize,
    pub unstable: usize,
}

impl BlockDims {
    pub fn total(&self) -> usize {
        self.stable + self.center + self.unstable
    }
}

/// Point dynamics shared by all kinds with an atlas of flat charts.
pub(crate) trait PointDynamics {
    fn coord_dim(&self) -> usize;
    fn evaluate(&self, p: &SystemPoint) -> Result<SystemPoint>;
    fn evaluate_inverse(&self, p: &SystemPoint) -> Result<SystemPoint>;
    /// Derivative from the chart of `p` to the chart of `f(p)`.
    fn tangent_real(&self, p: &SystemPoint) -> Result<RMatrix>;
    /// Vector from `p` to `q` in the chart of `p`, using the minimal lattice
    /// image on torus factors.
    fn displacement(&self, p: &SystemPoint, q: &SystemPoint) -> Result<RVector>;
    /// `p + v` in the chart of `p`, then normalized into the atlas.
    fn exp(&self, p: &SystemPoint, v: &RVector) -> Result<SystemPoint>;
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> SystemPoint;
    fn block_dims(&self) -> BlockDims;
    fn is_holomorphic(&self) -> bool;
}

#[derive(Debug, Clone, Serialize)]
pub enum SystemKind {
    TorusAutomorphism(TorusAutomorphism),
    HolomorphicSkewProduct(SkewProduct),
    MobiusFiberSystem(MobiusFiberSystem),
    BlanchardCalabi(BlanchardCalabi),
    NilmanifoldAutomorphism(Nilmanifold),
    EllipticQuotient(EllipticQuotient),
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemDescriptor {
    pub name: String,
    pub kind: SystemKind,
}

impl SystemDescriptor {
    pub fn new(name: impl Into<String>, kind: SystemKind) -> Self {
        Self { name: name.into(), kind }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SystemKind::TorusAutomorphism(_) => "TorusAutomorphism",
            SystemKind::HolomorphicSkewProduct(_) => "HolomorphicSkewProduct",
            SystemKind::MobiusFiberSystem(_) => "MobiusFiberSystem",
            SystemKind::BlanchardCalabi(_) => "BlanchardCalabi",
            SystemKind::NilmanifoldAutomorphism(_) => "NilmanifoldAutomorphism",
            SystemKind::EllipticQuotient(_) => "EllipticQuotient",
        }
    }

    fn unsupported(&self, operation: &'static str) -> Error {
        Error::UnsupportedKind { operation, kind: self.kind_name().to_string() }
    }

    fn points(&self, operation: &'static str) -> Result<&dyn PointDynamics> {
        Ok(match &self.kind {
            SystemKind::TorusAutomorphism(s) => s,
            SystemKind::HolomorphicSkewProduct(s) => s,
            SystemKind::MobiusFiberSystem(s) => s,
            SystemKind::BlanchardCalabi(s) => s,
            SystemKind::EllipticQuotient(s) => &s.cover,
            SystemKind::NilmanifoldAutomorphism(_) => return Err(self.unsupported(operation)),
        })
    }

    pub fn has_points(&self) -> bool {
        !matches!(self.kind, SystemKind::NilmanifoldAutomorphism(_))
    }

    pub fn real_dim(&self) -> usize {
        match &self.kind {
            SystemKind::NilmanifoldAutomorphism(n) => n.map.nrows(),
            _ => 2 * self.points("real_dim").map(|p| p.coord_dim()).unwrap_or(0),
        }
    }

    pub fn evaluate(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let ops = self.points("evaluate")?;
        self.check_point(ops, p)?;
        ops.evaluate(p)
    }

    pub fn evaluate_inverse(&self, p: &SystemPoint) -> Result<SystemPoint> {
        let ops = self.points("evaluate_inverse")?;
        self.check_point(ops, p)?;
        ops.evaluate_inverse(p)
    }

    /// `fⁿ(p)`; negative `n` iterates the inverse.
    pub fn iterate(&self, p: &SystemPoint, n: i64) -> Result<SystemPoint> {
        let mut q = p.clone();
        for _ in 0..n.unsigned_abs() {
            q = if n > 0 { self.evaluate(&q)? } else { self.evaluate_inverse(&q)? };
        }
        Ok(q)
    }

    /// Real derivative of `f` at `p`. Left-invariant systems ignore `p`.
    pub fn tangent_real(&self, p: &SystemPoint) -> Result<RMatrix> {
        if let SystemKind::NilmanifoldAutomorphism(n) = &self.kind {
            return Ok(n.map.clone());
        }
        let ops = self.points("tangent")?;
        self.check_point(ops, p)?;
        ops.tangent_real(p)
    }

    /// Derivative of `f⁻¹` at `p`, i.e. the inverse of the derivative of `f`
    /// at `f⁻¹(p)`.
    pub fn tangent_inverse_real(&self, p: &SystemPoint) -> Result<RMatrix> {
        let pre = match &self.kind {
            SystemKind::NilmanifoldAutomorphism(_) => p.clone(),
            _ => self.evaluate_inverse(p)?,
        };
        self.tangent_real(&pre)?
            .try_inverse()
            .ok_or_else(|| Error::SingularInput("tangent map is not invertible".into()))
    }

    /// Complex derivative in interleaved coordinates, when `f` is holomorphic.
    pub fn tangent_complex(&self, p: &SystemPoint) -> Result<crate::cxcore::CMatrix> {
        if !self.is_holomorphic() {
            return Err(self.unsupported("complex tangent"));
        }
        let t = self.tangent_real(p)?;
        let split = crate::cxcore::RLinearMap::from_real_matrix(&t)?;
        Ok(split.linear)
    }

    pub fn displacement(&self, p: &SystemPoint, q: &SystemPoint) -> Result<RVector> {
        let ops = self.points("displacement")?;
        self.check_point(ops, p)?;
        self.check_point(ops, q)?;
        ops.displacement(p, q)
    }

    pub fn distance(&self, p: &SystemPoint, q: &SystemPoint) -> Result<f64> {
        Ok(self.displacement(p, q)?.norm())
    }

    pub fn exp(&self, p: &SystemPoint, v: &RVector) -> Result<SystemPoint> {
        let ops = self.points("exp")?;
        self.check_point(ops, p)?;
        if v.len() != 2 * ops.coord_dim() {
            return Err(Error::ContractViolation(format!(
                "tangent vector has length {}, expected {}",
                v.len(),
                2 * ops.coord_dim()
            )));
        }
        ops.exp(p, v)
    }

    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Result<SystemPoint> {
        Ok(self.points("sample_point")?.sample_point(rng))
    }

    pub fn block_dims(&self) -> BlockDims {
        match &self.kind {
            SystemKind::NilmanifoldAutomorphism(n) => n.block_dims(),
            _ => self.points("block_dims").map(|p| p.block_dims()).expect("point dynamics"),
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        match &self.kind {
            SystemKind::NilmanifoldAutomorphism(n) => n.is_holomorphic,
            _ => self.points("is_holomorphic").map(|p| p.is_holomorphic()).unwrap_or(false),
        }
    }

    /// Complex structure on tangent spaces in the coordinates of
    /// [`tangent_real`](Self::tangent_real).
    pub fn complex_structure(&self) -> RMatrix {
        match &self.kind {
            SystemKind::NilmanifoldAutomorphism(n) => n.j.clone(),
            _ => complex_structure(self.real_dim() / 2),
        }
    }

    fn check_point(&self, ops: &dyn PointDynamics, p: &SystemPoint) -> Result<()> {
        if p.coords.len() != ops.coord_dim() {
            return Err(Error::ContractViolation(format!(
                "{} expects {} coordinates, got {}",
                self.name,
                ops.coord_dim(),
                p.coords.len()
            )));
        }
        if p.coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::ContractViolation("non-finite point coordinates".into()));
        }
        Ok(())
    }

    /// Whether center leaves are the fibers of a fibration with flat torus
    /// fibers (the setting of the heat semigroup).
    pub fn has_flat_fibers(&self) -> bool {
        matches!(self.kind, SystemKind::HolomorphicSkewProduct(_))
    }
}

/// Uniform sample of `[0, 1)`.
pub(crate) fn unit(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    rng.gen::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn inverse_round_trip_on_all_point_systems() {
        for name in registry_names() {
            let sys = build(name).unwrap();
            if !sys.has_points() {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..1000 {
                let p = sys.sample_point(&mut rng).unwrap();
                let back = sys.evaluate_inverse(&sys.evaluate(&p).unwrap()).unwrap();
                let d = sys.distance(&p, &back).unwrap();
                assert!(d < 1e-10, "{name}: round trip error {d}");
            }
        }
    }

    #[test]
    fn tangent_matches_finite_differences() {
        for name in registry_names() {
            let sys = build(name).unwrap();
            if !sys.has_points() {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..20 {
                let p = sys.sample_point(&mut rng).unwrap();
                let fp = sys.evaluate(&p).unwrap();
                let t = sys.tangent_real(&p).unwrap();
                let h = 1e-6;
                for j in 0..sys.real_dim() {
                    let mut e = RVector::zeros(sys.real_dim());
                    e[j] = h;
                    let plus = sys.evaluate(&sys.exp(&p, &e).unwrap()).unwrap();
                    let minus = sys.evaluate(&sys.exp(&p, &(-&e)).unwrap()).unwrap();
                    let fd = (sys.displacement(&fp, &plus).unwrap() - sys.displacement(&fp, &minus).unwrap()) / (2.0 * h);
                    let err = (fd - t.column(j)).norm();
                    assert!(err < 1e-6 * (1.0 + t.norm()), "{name}: column {j} error {err}");
                }
            }
        }
    }

    #[test]
    fn chain_rule_along_orbits() {
        // Finite differences of fⁿ, unwrapped against the product prediction.
        for name in ["cat2c", "skew_l1", "bc_n1", "mobius_elliptic", "elliptic_quotient"] {
            let sys = build(name).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let p = sys.sample_point(&mut rng).unwrap();
            let mut product = RMatrix::identity(sys.real_dim(), sys.real_dim());
            let mut q = p.clone();
            for n in 1..=20 {
                product = sys.tangent_real(&q).unwrap() * product;
                q = sys.evaluate(&q).unwrap();
                if n % 5 != 0 {
                    continue;
                }
                let h = 1e-6;
                for j in 0..sys.real_dim() {
                    let mut e = RVector::zeros(sys.real_dim());
                    e[j] = h;
                    let moved = sys.iterate(&sys.exp(&p, &e).unwrap(), n).unwrap();
                    let predicted = product.column(j) * h;
                    let q_pred = sys.exp(&q, &predicted.clone_owned()).unwrap();
                    let residual = sys.displacement(&q_pred, &moved).unwrap();
                    let rel = residual.norm() / (h * product.norm());
                    assert!(rel < 1e-8, "{name}: n = {n}, column {j}, relative error {rel}");
                }
            }
        }
    }
}
