use super::heat::{FiberDensity, ALIASING_LEVEL, CUTOFF, MOLLIFIER_TIME};
use super::particles::ParticleMeasure;
use crate::cxcore::{CVector, C64};
use crate::dynamics::{center_growth, classify_growth, Verdict};
use crate::exec::Execution;
use crate::zoo::{SkewProduct, SystemDescriptor, SystemKind};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

/// The conditional density on the fiber over one base point.
#[derive(Debug, Clone, Serialize)]
pub struct FiberSlice {
    pub base: Vec<C64>,
    pub mass: f64,
    pub density: FiberDensity,
}

/// Base particles, each carrying a probability density on its fiber.
#[derive(Debug, Clone, Serialize)]
pub struct HybridMeasure {
    pub fibers: Vec<FiberSlice>,
    /// Heat time applied after mollification.
    pub time: f64,
    pub aliasing: Option<String>,
}

fn skew(sys: &SystemDescriptor) -> Result<&SkewProduct> {
    match &sys.kind {
        SystemKind::HolomorphicSkewProduct(s) => Ok(s),
        _ => Err(Error::UnsupportedKind { operation: "fiber heat flow", kind: sys.kind_name().into() }),
    }
}

impl HybridMeasure {
    /// Groups particles by their exact base point and mollifies each group
    /// at time `t0` with the given cutoff.
    pub fn from_particles(
        sys: &SystemDescriptor,
        measure: &ParticleMeasure,
        cutoff: usize,
        t0: f64,
        exec: Execution,
    ) -> Result<Self> {
        let s = skew(sys)?;
        let n = s.base.dim();
        let mut order: Vec<Vec<C64>> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for i in 0..measure.len() {
            let p = measure.point(i);
            let base = p.coords[..n].to_vec();
            let key: Vec<u64> = base.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect();
            let g = *seen.entry(key).or_insert_with(|| {
                order.push(base);
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        let fibers = exec.try_map_indexed(groups.len(), |g| -> Result<FiberSlice> {
            let idx = &groups[g];
            let mass: f64 = idx.iter().map(|&i| measure.weights()[i]).sum();
            let theta: Vec<[f64; 2]> = idx.iter().map(|&i| s.fiber_lattice_coords(&measure.point(i))).collect();
            let w: Vec<f64> = idx.iter().map(|&i| measure.weights()[i] / mass).collect();
            Ok(FiberSlice { base: order[g].clone(), mass, density: FiberDensity::from_particles(&s.fiber, cutoff, &theta, &w, t0)? })
        })?;
        let edge = fibers.first().map_or(0.0, |f| f.density.edge_multiplier(t0));
        let aliasing = (edge > ALIASING_LEVEL).then(|| {
            format!("cutoff {cutoff} truncates the mollified particles (boundary multiplier {edge:.2e})")
        });
        Ok(Self { fibers, time: 0.0, aliasing })
    }

    /// `P_t` on every fiber; the base marginal is untouched.
    pub fn heat(&self, t: f64, exec: Execution) -> Result<Self> {
        let fibers = self
            .fibers
            .iter()
            .map(|f| Ok(FiberSlice { density: f.density.heat_step_with(t, exec)?, ..f.clone() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { fibers, time: self.time + t, aliasing: self.aliasing.clone() })
    }

    /// `f₊` for a skew product: base points move by the base map and fiber
    /// densities by the translation `ℓ(ẑ)`.
    pub fn push(&self, sys: &SystemDescriptor, exec: Execution) -> Result<Self> {
        let s = skew(sys)?;
        let fibers = exec.map_indexed(self.fibers.len(), |i| {
            let f = &self.fibers[i];
            let z = CVector::from_column_slice(&f.base);
            let shift = s.fiber.coordinates(&CVector::from_element(1, s.twist_at(&z)));
            FiberSlice {
                base: s.base.apply(&z).iter().copied().collect(),
                mass: f.mass,
                density: f.density.translate([shift[0], shift[1]]),
            }
        });
        Ok(Self { fibers, time: self.time, aliasing: self.aliasing.clone() })
    }

    pub fn base_marginal(&self) -> Vec<(Vec<C64>, f64)> {
        self.fibers.iter().map(|f| (f.base.clone(), f.mass)).collect()
    }

    /// Largest coefficient gap between matching fibers; the base points must
    /// agree to `1e-12`.
    pub fn gap(&self, other: &Self) -> Result<f64> {
        if self.fibers.len() != other.fibers.len() {
            return Err(Error::ContractViolation("measures have different numbers of fibers".into()));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.fibers.iter().zip(&other.fibers) {
            let base_gap = a.base.iter().zip(&b.base).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            if base_gap > 1e-12 || (a.mass - b.mass).abs() > 1e-12 {
                return Err(Error::ContractViolation(format!("fibers sit over different base points ({base_gap:.2e})")));
            }
            worst = worst.max(a.density.coefficient_gap(&b.density)?);
        }
        Ok(worst)
    }

    /// `(Σ mass · ‖ρ − mean‖²)^{1/2}`.
    pub fn l2_to_uniform(&self) -> f64 {
        self.fibers.iter().map(|f| f.mass * f.density.l2_to_mean().powi(2)).sum::<f64>().sqrt()
    }
}

/// `μ_t`: particles binned per fiber, mollified at the default time with the
/// default cutoff, then evolved by the fiberwise heat flow for time `t ≥ 0`.
pub fn mu_t(sys: &SystemDescriptor, measure: &ParticleMeasure, t: f64, exec: Execution) -> Result<HybridMeasure> {
    if !(t >= 0.0) {
        return Err(Error::ContractViolation(format!("heat time must be nonnegative, got {t}")));
    }
    let h = HybridMeasure::from_particles(sys, measure, CUTOFF, MOLLIFIER_TIME, exec)?;
    if t == 0.0 {
        Ok(h)
    } else {
        h.heat(t, exec)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthStatistics {
    pub steps: usize,
    pub sup: Vec<f64>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
}

impl GrowthStatistics {
    pub fn verdict(&self, bound: f64) -> Verdict {
        classify_growth(&self.sup, bound)
    }
}

/// Distribution over the particles of `‖Dfⁿ|E^c‖` for `n = 0..=steps`.
pub fn center_growth_statistics(
    sys: &SystemDescriptor,
    measure: &ParticleMeasure,
    steps: usize,
    exec: Execution,
) -> Result<GrowthStatistics> {
    let curves = exec.try_map_indexed(measure.len(), |i| center_growth(sys, &measure.point(i), steps))?;
    let w = measure.weights();
    let pick = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
        (0..=steps)
            .map(|k| f(&curves.iter().map(|c| c[k]).collect::<Vec<_>>()))
            .collect()
    };
    Ok(GrowthStatistics {
        steps,
        sup: pick(&|v| v.iter().copied().fold(0.0, f64::max)),
        mean: pick(&|v| v.iter().zip(w).map(|(x, w)| x * w).sum()),
        min: pick(&|v| v.iter().copied().fold(f64::INFINITY, f64::min)),
    })
}
