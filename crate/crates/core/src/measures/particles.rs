use crate::cxcore::{RMatrix, RVector, C64};
use crate::dynamics::BackwardFrames;
use crate::exec::Execution;
use crate::zoo::{SystemDescriptor, SystemKind, SystemPoint};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Tolerance on the total mass of a particle measure.
pub const MASS_TOL: f64 = 1e-12;

/// Finitely many weighted points of one system, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleMeasure {
    coord_dim: usize,
    charts: Vec<u8>,
    coords: Vec<C64>,
    weights: Vec<f64>,
}

impl ParticleMeasure {
    /// Normalizes the weights to total mass one.
    pub fn new(points: &[SystemPoint], weights: &[f64]) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::ContractViolation(format!(
                "{} points with {} weights",
                points.len(),
                weights.len()
            )));
        }
        let coord_dim = points[0].coords.len();
        if points.iter().any(|p| p.coords.len() != coord_dim) {
            return Err(Error::ContractViolation("points have different dimensions".into()));
        }
        let mut m = Self {
            coord_dim,
            charts: points.iter().map(|p| p.chart).collect(),
            coords: points.iter().flat_map(|p| p.coords.iter().copied()).collect(),
            weights: weights.to_vec(),
        };
        m.renormalize()?;
        Ok(m)
    }

    pub fn uniform(points: &[SystemPoint]) -> Result<Self> {
        Self::new(points, &vec![1.0; points.len()])
    }

    fn renormalize(&mut self) -> Result<()> {
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::ContractViolation("weights must be finite and nonnegative".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ContractViolation("total weight is zero".into()));
        }
        for w in &mut self.weights {
            *w /= total;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> SystemPoint {
        let k = self.coord_dim;
        SystemPoint::new(self.charts[i], self.coords[i * k..(i + 1) * k].to_vec())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `f₊` of the measure; weights are renormalized after the push.
    pub fn push(&self, sys: &SystemDescriptor, exec: Execution) -> Result<Self> {
        let images = exec.try_map_indexed(self.len(), |i| sys.evaluate(&self.point(i)))?;
        let mut out = Self {
            coord_dim: self.coord_dim,
            charts: images.iter().map(|p| p.chart).collect(),
            coords: images.iter().flat_map(|p| p.coords.iter().copied()).collect(),
            weights: self.weights.clone(),
        };
        out.renormalize()?;
        Ok(out)
    }

    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&SystemPoint) -> f64,
    {
        (0..self.len()).map(|i| self.weights[i] * f(&self.point(i))).sum()
    }

    /// Rows `chart, re₁, im₁, …, weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("chart");
        for k in 0..self.coord_dim {
            let _ = write!(s, ",re{k},im{k}");
        }
        s.push_str(",weight\n");
        for i in 0..self.len() {
            let _ = write!(s, "{}", self.charts[i]);
            for z in &self.coords[i * self.coord_dim..(i + 1) * self.coord_dim] {
                let _ = write!(s, ",{:e},{:e}", z.re, z.im);
            }
            let _ = writeln!(s, ",{:e}", self.weights[i]);
        }
        s
    }
}

/// Real lattice coordinates in `[0, 1)` of the torus factors of a point:
/// base then fiber for skew products, base only for sphere fibers.
pub fn torus_coordinates(sys: &SystemDescriptor, p: &SystemPoint) -> Result<RVector> {
    match &sys.kind {
        SystemKind::TorusAutomorphism(t) => Ok(t.lattice.coordinates(&crate::cxcore::CVector::from_column_slice(&p.coords))),
        SystemKind::HolomorphicSkewProduct(s) => {
            let base = s.base_lattice_coords(p);
            let fiber = s.fiber_lattice_coords(p);
            Ok(RVector::from_iterator(base.len() + 2, base.iter().copied().chain(fiber)))
        }
        SystemKind::EllipticQuotient(q) => {
            Ok(q.cover.lattice.coordinates(&crate::cxcore::CVector::from_column_slice(&p.coords)))
        }
        SystemKind::MobiusFiberSystem(m) => Ok(m.base.lattice.coordinates(&m.base_point(p))),
        _ => Err(Error::UnsupportedKind { operation: "test panel", kind: sys.kind_name().into() }),
    }
}

pub const PANEL_SIZE: usize = 16;
const PANEL_PAIRS: [(usize, usize); 4] = [(0, 1), (2, 3), (0, 2), (1, 3)];

/// Values of the 16 trigonometric test functions at the torus coordinates
/// `θ`: `cos, sin` of `2πθₖ` for the first four coordinates, then of
/// `2π(θₐ + θ_b)` for four coordinate pairs. Each has Haar integral zero.
pub fn panel_values(theta: &RVector) -> Result<[f64; PANEL_SIZE]> {
    if theta.len() < 4 {
        return Err(Error::ContractViolation(format!("test panel needs 4 torus coordinates, got {}", theta.len())));
    }
    let mut out = [0.0; PANEL_SIZE];
    for k in 0..4 {
        let a = 2.0 * PI * theta[k];
        out[2 * k] = a.cos();
        out[2 * k + 1] = a.sin();
    }
    for (j, (a, b)) in PANEL_PAIRS.iter().enumerate() {
        let s = 2.0 * PI * (theta[*a] + theta[*b]);
        out[8 + 2 * j] = s.cos();
        out[9 + 2 * j] = s.sin();
    }
    Ok(out)
}

pub fn panel_names() -> Vec<String> {
    let mut names = Vec::with_capacity(PANEL_SIZE);
    for k in 0..4 {
        names.push(format!("cos θ{k}"));
        names.push(format!("sin θ{k}"));
    }
    for (a, b) in PANEL_PAIRS {
        names.push(format!("cos(θ{a}+θ{b})"));
        names.push(format!("sin(θ{a}+θ{b})"));
    }
    names
}

/// Test-panel integrals of a particle measure.
pub fn panel_integrals(sys: &SystemDescriptor, m: &ParticleMeasure) -> Result<[f64; PANEL_SIZE]> {
    let mut acc = [0.0; PANEL_SIZE];
    for i in 0..m.len() {
        let v = panel_values(&torus_coordinates(sys, &m.point(i))?)?;
        for k in 0..PANEL_SIZE {
            acc[k] += m.weights[i] * v[k];
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PanelEstimate {
    pub mean: f64,
    /// Standard error from the spread of the per-sample Cesàro averages.
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsEstimate {
    #[serde(skip)]
    pub measure: ParticleMeasure,
    pub panel: Vec<PanelEstimate>,
    pub radius: f64,
    pub iterations: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Orthonormal real frame spanning the disk directions at `x`. Sphere-fiber
/// systems use the horizontal lift of the base unstable directions.
fn disk_frame(sys: &SystemDescriptor, x: &SystemPoint) -> Result<RMatrix> {
    if let SystemKind::MobiusFiberSystem(m) = &sys.kind {
        let base = SystemDescriptor::new("base", SystemKind::TorusAutomorphism(m.base.clone()));
        let z = m.base_point(x);
        let bp = SystemPoint::new(0, z.iter().copied().collect());
        let e = BackwardFrames::new(&base, &bp, 0)?.unstable().clone();
        let mut out = RMatrix::zeros(sys.real_dim(), e.ncols());
        out.rows_mut(0, e.nrows()).copy_from(&e);
        return Ok(out);
    }
    Ok(BackwardFrames::new(sys, x, 0)?.unstable().clone())
}

/// Uniform point of the unit ball in `ℝᵏ`.
fn ball_point(rng: &mut ChaCha8Rng, k: usize) -> RVector {
    loop {
        let v = RVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm_squared() <= 1.0 {
            return v;
        }
    }
}

/// Cesàro averages `(1/n) Σⱼ f^j₊ m_D` of the normalized volume on the
/// unstable disk of the given radius at `x`, with `m_samples` uniform
/// quadrature points drawn from a seeded ChaCha stream.
pub fn gibbs_u_estimate(
    sys: &SystemDescriptor,
    x: &SystemPoint,
    radius: f64,
    n_iter: usize,
    m_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<GibbsEstimate> {
    if n_iter == 0 || m_samples == 0 || !(radius > 0.0) {
        return Err(Error::ContractViolation("need n_iter, m_samples > 0 and radius > 0".into()));
    }
    let frame = disk_frame(sys, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = (0..m_samples)
        .map(|_| sys.exp(x, &(&frame * ball_point(&mut rng, frame.ncols()) * radius)))
        .collect::<Result<Vec<_>>>()?;
    let panel_ok = torus_coordinates(sys, x).is_ok();
    let orbits = exec.try_map_indexed(m_samples, |i| -> Result<(Vec<SystemPoint>, [f64; PANEL_SIZE])> {
        let mut p = starts[i].clone();
        let mut orbit = Vec::with_capacity(n_iter);
        let mut avg = [0.0; PANEL_SIZE];
        for j in 0..n_iter {
            if j > 0 {
                p = sys.evaluate(&p)?;
            }
            if panel_ok {
                let v = panel_values(&torus_coordinates(sys, &p)?)?;
                for k in 0..PANEL_SIZE {
                    avg[k] += v[k] / n_iter as f64;
                }
            }
            orbit.push(p.clone());
        }
        Ok((orbit, avg))
    })?;
    let k = x.coords.len();
    let mut measure = ParticleMeasure {
        coord_dim: k,
        charts: Vec::with_capacity(m_samples * n_iter),
        coords: Vec::with_capacity(m_samples * n_iter * k),
        weights: vec![1.0 / (m_samples * n_iter) as f64; m_samples * n_iter],
    };
    for (orbit, _) in &orbits {
        for p in orbit {
            measure.charts.push(p.chart);
            measure.coords.extend_from_slice(&p.coords);
        }
    }
    measure.renormalize()?;
    let panel = if panel_ok {
        (0..PANEL_SIZE)
            .map(|k| {
                let m = m_samples as f64;
                let mean = orbits.iter().map(|(_, a)| a[k]).sum::<f64>() / m;
                let var = orbits.iter().map(|(_, a)| (a[k] - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
                PanelEstimate { mean, sigma: (var / m).sqrt() }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(GibbsEstimate { measure, panel, radius, iterations: n_iter, samples: m_samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxcore::SpherePoint;
    use crate::zoo::build;

    fn origin_cloud(sys: &SystemDescriptor, k: usize, seed: u64) -> ParticleMeasure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<SystemPoint> = (0..k).map(|_| sys.sample_point(&mut rng).unwrap()).collect();
        ParticleMeasure::uniform(&pts).unwrap()
    }

    #[test]
    fn weights_validated_and_normalized() {
        let sys = build("cat2c").unwrap();
        let p = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let m = ParticleMeasure::new(&[p.clone(), p.clone()], &[1.0, 3.0]).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.75]);
        assert!(ParticleMeasure::new(std::slice::from_ref(&p), &[-1.0]).is_err());
        assert!(ParticleMeasure::new(&[p], &[0.0]).is_err());
    }

    #[test]
    fn mass_does_not_drift() {
        let sys = build("cat2c").unwrap();
        let mut m = origin_cloud(&sys, 7, 1);
        for _ in 0..10_000 {
            m = m.push(&sys, Execution::Sequential).unwrap();
        }
        assert!((m.mass() - 1.0).abs() < MASS_TOL);
    }

    #[test]
    fn haar_cloud_statistics_survive_a_push() {
        let sys = build("cat2c").unwrap();
        let m = origin_cloud(&sys, 20_000, 4);
        let before = panel_integrals(&sys, &m).unwrap();
        let after = panel_integrals(&sys, &m.push(&sys, Execution::Parallel).unwrap()).unwrap();
        // Both are Monte Carlo estimates of zero with error ~ 1/√(2·20000).
        for k in 0..PANEL_SIZE {
            assert!(before[k].abs() < 0.03 && after[k].abs() < 0.03, "{k}: {} {}", before[k], after[k]);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let sys = build("cat2c").unwrap();
        let csv = origin_cloud(&sys, 3, 2).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "chart,re0,im0,re1,im1,weight");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn cat_map_estimate_is_haar_on_cosine() {
        let sys = build("cat2c").unwrap();
        let x = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let est = gibbs_u_estimate(&sys, &x, 0.5, 500, 4096, 1, Execution::Parallel).unwrap();
        assert_eq!(est.measure.len(), 500 * 4096);
        // Haar integral of cos 2πθ₀ is zero.
        assert!(est.panel[0].mean.abs() < 0.02);
        let again = gibbs_u_estimate(&sys, &x, 0.5, 500, 4096, 1, Execution::Sequential).unwrap();
        assert_eq!(est.panel, again.panel);
    }

    #[test]
    fn loxodromic_fiber_mass_concentrates() {
        let sys = build("mobius_loxodromic").unwrap();
        let SystemKind::MobiusFiberSystem(m) = &sys.kind else { unreachable!() };
        let x = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let est = gibbs_u_estimate(&sys, &x, 0.2, 200, 256, 5, Execution::Parallel).unwrap();
        // Oracle: iterate the fiber map directly from a sample fiber point.
        let mut s = m.fiber_point(&x).unwrap();
        for _ in 0..200 {
            s = crate::cxcore::mobius_apply(&m.g, &s).unwrap();
        }
        assert!(s.distance(&SpherePoint::infinity()) < 1e-12);
        let near = est.measure.integrate(|p| {
            let f = m.fiber_point(p).unwrap();
            if f.distance(&s) < 0.1 { 1.0 } else { 0.0 }
        });
        assert!(near >= 0.95, "{near}");
    }
}
