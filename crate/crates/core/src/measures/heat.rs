use crate::cxcore::{RMatrix, RVector, C64};
use crate::exec::Execution;
use crate::lattices::Lattice;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Fourier cutoff per real fiber direction.
pub const CUTOFF: usize = 32;
/// Heat time used to turn particles into densities.
pub const MOLLIFIER_TIME: f64 = 1e-3;
/// Largest multiplier allowed on the cutoff boundary before the mollified
/// particles are reported as aliased.
pub const ALIASING_LEVEL: f64 = 1e-8;

/// Density on the flat torus `ℂ/Λ` against normalized Haar measure,
/// `ρ(θ) = Σ c_k e^{2πi k·θ}` in lattice coordinates `θ ∈ [0,1)²` with
/// `|k₁|, |k₂| ≤ K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberDensity {
    pub lattice: Lattice,
    pub cutoff: usize,
    /// Row-major over `(k₁, k₂) ∈ [−K, K]²`.
    pub coefficients: Vec<C64>,
    #[serde(skip)]
    dual_gram: RMatrix,
}

fn dual_gram(lattice: &Lattice) -> Result<RMatrix> {
    if lattice.dim() != 1 {
        return Err(Error::ContractViolation("fiber densities live on elliptic curves".into()));
    }
    let p = lattice.period_matrix();
    (p.transpose() * p)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateLattice("period Gram matrix is singular".into()))
}

impl FiberDensity {
    fn empty(lattice: &Lattice, cutoff: usize) -> Result<Self> {
        let side = 2 * cutoff + 1;
        Ok(Self {
            dual_gram: dual_gram(lattice)?,
            lattice: lattice.clone(),
            cutoff,
            coefficients: vec![C64::new(0.0, 0.0); side * side],
        })
    }

    pub fn constant(lattice: &Lattice, cutoff: usize, mass: f64) -> Result<Self> {
        let mut d = Self::empty(lattice, cutoff)?;
        let i = d.index(0, 0);
        d.coefficients[i] = C64::new(mass, 0.0);
        Ok(d)
    }

    /// Constant one plus `amplitude·cos 2π(k·θ)`.
    pub fn single_mode(lattice: &Lattice, cutoff: usize, k: (i64, i64), amplitude: f64) -> Result<Self> {
        let mut d = Self::constant(lattice, cutoff, 1.0)?;
        if k == (0, 0) || k.0.unsigned_abs() as usize > cutoff || k.1.unsigned_abs() as usize > cutoff {
            return Err(Error::ContractViolation(format!("mode {k:?} is zero or beyond the cutoff")));
        }
        let (a, b) = (d.index(k.0, k.1), d.index(-k.0, -k.1));
        d.coefficients[a] += C64::new(amplitude / 2.0, 0.0);
        d.coefficients[b] += C64::new(amplitude / 2.0, 0.0);
        Ok(d)
    }

    /// Particles at lattice coordinates `θᵢ` with weights `wᵢ`, mollified by
    /// the heat kernel at time `t0`.
    pub fn from_particles(lattice: &Lattice, cutoff: usize, theta: &[[f64; 2]], weights: &[f64], t0: f64) -> Result<Self> {
        if theta.len() != weights.len() {
            return Err(Error::ContractViolation("one weight per particle".into()));
        }
        let mut d = Self::empty(lattice, cutoff)?;
        let k = cutoff as i64;
        for k1 in -k..=k {
            for k2 in -k..=k {
                let mut c = C64::new(0.0, 0.0);
                for (t, w) in theta.iter().zip(weights) {
                    c += C64::from_polar(*w, -2.0 * PI * (k1 as f64 * t[0] + k2 as f64 * t[1]));
                }
                let i = d.index(k1, k2);
                d.coefficients[i] = c * d.multiplier(k1, k2, t0);
            }
        }
        Ok(d)
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn index(&self, k1: i64, k2: i64) -> usize {
        let k = self.cutoff as i64;
        ((k1 + k) * (2 * k + 1) + (k2 + k)) as usize
    }

    fn mode(&self, i: usize) -> (i64, i64) {
        let (s, k) = (self.side(), self.cutoff as i64);
        ((i / s) as i64 - k, (i % s) as i64 - k)
    }

    pub fn coefficient(&self, k1: i64, k2: i64) -> C64 {
        self.coefficients[self.index(k1, k2)]
    }

    /// `|ξ|²` for the dual vector with lattice coordinates `k`.
    pub fn dual_norm_sq(&self, k1: i64, k2: i64) -> f64 {
        let k = RVector::from_vec(vec![k1 as f64, k2 as f64]);
        (k.transpose() * &self.dual_gram * &k)[0]
    }

    pub fn multiplier(&self, k1: i64, k2: i64, t: f64) -> f64 {
        (-4.0 * PI * PI * self.dual_norm_sq(k1, k2) * t).exp()
    }

    /// Largest heat multiplier at time `t` on the boundary of the cutoff box.
    pub fn edge_multiplier(&self, t: f64) -> f64 {
        let k = self.cutoff as i64;
        (-k..=k)
            .flat_map(|j| [(k, j), (-k, j), (j, k), (j, -k)])
            .map(|(a, b)| self.multiplier(a, b, t))
            .fold(0.0, f64::max)
    }

    pub fn mass(&self) -> f64 {
        self.coefficient(0, 0).re
    }

    /// Largest violation of `c₋ₖ = conj(c_k)`.
    pub fn reality_defect(&self) -> f64 {
        (0..self.coefficients.len())
            .map(|i| {
                let (a, b) = self.mode(i);
                (self.coefficients[i] - self.coefficient(-a, -b).conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn evaluate(&self, theta: [f64; 2]) -> f64 {
        (0..self.coefficients.len())
            .map(|i| {
                let (a, b) = self.mode(i);
                (self.coefficients[i] * C64::from_polar(1.0, 2.0 * PI * (a as f64 * theta[0] + b as f64 * theta[1]))).re
            })
            .sum()
    }

    /// Minimum over the `n × n` grid of lattice coordinates `(i/n, j/n)`.
    pub fn min_on_grid(&self, n: usize) -> f64 {
        let (s, k) = (self.side(), self.cutoff as i64);
        let waves = |j: usize| -> Vec<C64> {
            (-k..=k).map(|m| C64::from_polar(1.0, 2.0 * PI * m as f64 * j as f64 / n as f64)).collect()
        };
        let grid: Vec<Vec<C64>> = (0..n).map(waves).collect();
        let mut min = f64::INFINITY;
        for g2 in &grid {
            // Partial sums over k₂ for every k₁.
            let rows: Vec<C64> = (0..s)
                .map(|a| (0..s).map(|b| self.coefficients[a * s + b] * g2[b]).sum())
                .collect();
            for g1 in &grid {
                let v: f64 = rows.iter().zip(g1).map(|(r, w)| (r * w).re).sum();
                min = min.min(v);
            }
        }
        min
    }

    /// `L²` distance to the mean, by Parseval.
    pub fn l2_to_mean(&self) -> f64 {
        let zero = self.index(0, 0);
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != zero)
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient difference; both densities must share the cutoff.
    pub fn coefficient_gap(&self, other: &Self) -> Result<f64> {
        if self.cutoff != other.cutoff {
            return Err(Error::ContractViolation("densities have different cutoffs".into()));
        }
        Ok(self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Push-forward under the translation by lattice coordinates `s`.
    pub fn translate(&self, s: [f64; 2]) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coefficients.iter_mut().enumerate() {
            let (a, b) = self.mode(i);
            *c *= C64::from_polar(1.0, -2.0 * PI * (a as f64 * s[0] + b as f64 * s[1]));
        }
        out
    }

    pub fn heat_step_with(&self, t: f64, exec: Execution) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::ContractViolation(format!("heat time must be positive, got {t}")));
        }
        let coefficients = exec.map_indexed(self.coefficients.len(), |i| {
            let (a, b) = self.mode(i);
            self.coefficients[i] * self.multiplier(a, b, t)
        });
        Ok(Self { coefficients, ..self.clone() })
    }

    /// Smallest `|ξ|²` over nonzero dual vectors inside the cutoff box.
    pub fn min_dual_norm_sq(&self) -> f64 {
        let zero = self.index(0, 0);
        (0..self.coefficients.len())
            .filter(|&i| i != zero)
            .map(|i| {
                let (a, b) = self.mode(i);
                self.dual_norm_sq(a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `P_t`: every coefficient multiplied by `exp(−4π²|ξ|²t)`.
pub fn heat_step(d: &FiberDensity, t: f64) -> Result<FiberDensity> {
    d.heat_step_with(t, Execution::Parallel)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// Least-squares slope of `−log distance` in `t`; absent when fewer than
    /// two distances are positive.
    pub fitted_rate: Option<f64>,
    /// `4π²·min |ξ|²`.
    pub predicted_rate: f64,
    pub relative_error: Option<f64>,
}

/// Distance of `P_t d` to its mean along `t_grid` and the fitted decay rate.
pub fn limit_average_check(d: &FiberDensity, t_grid: &[f64]) -> Result<DecayReport> {
    let mut distances = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let evolved = if t == 0.0 { d.clone() } else { heat_step(d, t)? };
        distances.push(evolved.l2_to_mean());
    }
    let pts: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(&distances)
        .filter(|(_, &x)| x > 0.0 && x.is_finite())
        .map(|(&t, &x)| (t, x.ln()))
        .collect();
    let fitted_rate = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
        (sxx > 0.0).then(|| -sxy / sxx)
    } else {
        None
    };
    let predicted_rate = 4.0 * PI * PI * d.min_dual_norm_sq();
    Ok(DecayReport {
        times: t_grid.to_vec(),
        distances,
        fitted_rate,
        predicted_rate,
        relative_error: fitted_rate.map(|r| (r - predicted_rate).abs() / predicted_rate),
    })
}
