use super::{svd2, CMatrix, C64};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A point `[a:b]` of the Riemann sphere with unit-norm representative whose
/// first nonzero coordinate is real and positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    a: C64,
    b: C64,
}

impl SpherePoint {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let scale = a.norm().max(b.norm());
        if !(scale.is_finite()) || scale == 0.0 {
            return Err(Error::ContractViolation(format!(
                "homogeneous pair [{a}:{b}] is zero or non-finite"
            )));
        }
        let (a, b) = (a / scale, b / scale);
        let n = a.norm().hypot(b.norm());
        let (a, b) = (a / n, b / n);
        let lead = if a.norm() > 0.0 { a } else { b };
        let phase = lead.conj() / lead.norm();
        Ok(Self {
            a: a * phase,
            b: b * phase,
        })
    }

    /// `[z:1]`.
    pub fn affine(z: C64) -> Self {
        Self::new(z, C64::new(1.0, 0.0)).expect("finite affine point")
    }

    pub fn infinity() -> Self {
        Self { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) }
    }

    pub fn zero() -> Self {
        Self { a: C64::new(0.0, 0.0), b: C64::new(1.0, 0.0) }
    }

    pub fn coords(&self) -> (C64, C64) {
        (self.a, self.b)
    }

    /// Affine coordinate `a/b`, or `None` at infinity.
    pub fn to_affine(&self) -> Option<C64> {
        (self.b.norm() > 0.0).then(|| self.a / self.b)
    }

    /// The orthogonal point `[−conj b : conj a]`.
    pub fn antipode(&self) -> Self {
        Self::new(-self.b.conj(), self.a.conj()).expect("unit representative")
    }

    /// Chordal distance `|a₁b₂ − a₂b₁|` on unit representatives; lies in [0, 1].
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        (self.a * other.b - other.a * self.b).norm()
    }
}

pub fn chordal_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    p.distance(q)
}

/// Projective action of an invertible 2×2 matrix.
pub fn mobius_apply(m: &CMatrix, p: &SpherePoint) -> Result<SpherePoint> {
    if m.shape() != (2, 2) {
        return Err(Error::ContractViolation(format!("expected a 2×2 matrix, got {:?}", m.shape())));
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.norm() == 0.0 || m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularInput("Möbius matrix is not invertible".into()));
    }
    apply_homogeneous(m, p)
}

/// Projective action without the invertibility check; unit-determinant
/// matrices of very large norm lose their determinant to cancellation.
fn apply_homogeneous(m: &CMatrix, p: &SpherePoint) -> Result<SpherePoint> {
    let (a, b) = p.coords();
    SpherePoint::new(m[(0, 0)] * a + m[(0, 1)] * b, m[(1, 0)] * a + m[(1, 1)] * b)
}

/// Outcome of following a degenerating sequence of unit-determinant matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegenerateLimit {
    /// Kernel direction of the normalized limit.
    pub b: SpherePoint,
    /// Image direction of the normalized limit.
    pub attractor: SpherePoint,
    /// Sequence indices of the records kept (strictly increasing norms).
    pub indices: Vec<usize>,
    pub norms: Vec<f64>,
    /// Largest pairwise chordal distance among images of the test panel.
    pub contraction_curve: Vec<f64>,
}

/// The records must grow by at least this factor for the sequence to count
/// as degenerating.
pub const DEGENERATE_NORM_RATIO: f64 = 10.0;

const NORM_CAP: f64 = 1e150;

/// Test points `b⊥ + c·b`; all lie at chordal distance at least 0.11 from `b`.
fn panel(b: &SpherePoint) -> Vec<SpherePoint> {
    let (ba, bb) = b.coords();
    let perp = b.antipode();
    let (pa, pb) = perp.coords();
    let mut out = vec![perp];
    for r in [0.5, 2.0, 9.0] {
        for j in 0..8 {
            let cc = C64::from_polar(r, 2.0 * PI * j as f64 / 8.0);
            out.push(SpherePoint::new(pa + cc * ba, pb + cc * bb).expect("finite panel point"));
        }
    }
    out
}

/// Follows `seq(0), …, seq(sample_k − 1)`, keeping the records of strictly
/// increasing operator norm, and extracts the limiting kernel direction and
/// the contraction curve of a fixed test panel away from it.
pub fn degenerate_limit<F>(mut seq: F, sample_k: usize) -> Result<DegenerateLimit>
where
    F: FnMut(usize) -> CMatrix,
{
    if sample_k == 0 {
        return Err(Error::ContractViolation("sample count must be positive".into()));
    }
    let mut records: Vec<(usize, CMatrix, super::Svd2)> = Vec::new();
    for k in 0..sample_k {
        let m = seq(k);
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        let svd = svd2(&m)?;
        if svd.s1 > NORM_CAP {
            break;
        }
        let improves = records
            .last()
            .map_or(true, |(_, _, last)| svd.s1 > last.s1 * (1.0 + 1e-12));
        if improves {
            records.push((k, m, svd));
        }
    }
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f.2.s1, l.2.s1),
        _ => return Err(Error::NotDegenerating { largest_norm: f64::NAN }),
    };
    if last < DEGENERATE_NORM_RATIO * first || last < DEGENERATE_NORM_RATIO {
        return Err(Error::NotDegenerating { largest_norm: last });
    }
    let top = &records.last().expect("nonempty").2;
    let b = SpherePoint::new(top.v[(0, 1)], top.v[(1, 1)])?;
    let attractor = SpherePoint::new(top.u[(0, 0)], top.u[(1, 0)])?;
    let points = panel(&b);
    let mut curve = Vec::with_capacity(records.len());
    for (_, m, _) in &records {
        let images = points
            .iter()
            .map(|p| apply_homogeneous(m, p))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                worst = worst.max(images[i].distance(&images[j]));
            }
        }
        curve.push(worst);
    }
    Ok(DegenerateLimit {
        b,
        attractor,
        indices: records.iter().map(|r| r.0).collect(),
        norms: records.iter().map(|r| r.2.s1).collect(),
        contraction_curve: curve,
    })
}
