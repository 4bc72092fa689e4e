use super::BackwardFrames;
use crate::cxcore::{RMatrix, RVector};
use crate::zoo::{SystemDescriptor, SystemPoint};
use crate::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Linearization {
    /// `Φₓ(v)`.
    pub point: SystemPoint,
    /// `d(Φ_{f(x)}(Df·v), f(Φₓ(v)))`.
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizationDerivative {
    /// Central differences of `Φₓ` at 0 along the unstable frame.
    pub derivative: RMatrix,
    pub frame: RMatrix,
    /// Largest column deviation from the frame.
    pub deviation: f64,
}

fn coefficients(frames: &BackwardFrames, v: &RVector) -> Result<RVector> {
    let f = frames.unstable();
    let c = f.transpose() * v;
    let off = (v - f * &c).norm();
    if off > 1e-8 * (1.0 + v.norm()) {
        return Err(Error::ContractViolation(format!(
            "vector is {off:.3e} away from the unstable subspace"
        )));
    }
    Ok(c)
}

/// `fⁿ(exp(f⁻ⁿx, Df⁻ⁿ·v))`.
fn truncation(sys: &SystemDescriptor, frames: &BackwardFrames, c: &RVector, n: usize) -> Result<SystemPoint> {
    let w = frames.pull_back(n, c)?;
    let mut q = sys.exp(&frames.points[n], &w)?;
    for _ in 0..n {
        q = sys.evaluate(&q)?;
    }
    Ok(q)
}

/// Iterates truncations until successive points are closer than `tol`.
fn converge(
    sys: &SystemDescriptor,
    frames: &BackwardFrames,
    c: &RVector,
    tol: f64,
    n_max: usize,
) -> Result<(SystemPoint, usize, Vec<f64>)> {
    let mut previous = truncation(sys, frames, c, 0)?;
    let mut history = Vec::new();
    for n in 1..=n_max {
        let next = truncation(sys, frames, c, n)?;
        let gap = sys.distance(&previous, &next)?;
        history.push(gap);
        previous = next;
        if gap < tol {
            return Ok((previous, n, history));
        }
    }
    Err(Error::NonConvergence { iterations: n_max, last: history.last().copied().unwrap_or(f64::NAN), history })
}

/// `Φₓ(v)` for `v ∈ Eᵘ(x)` without the residual, for unstable bundles of
/// any dimension. Points produced this way lie on the unstable leaf of `x`.
pub fn unstable_point(sys: &SystemDescriptor, x: &SystemPoint, v: &RVector, tol: f64, n_max: usize) -> Result<SystemPoint> {
    let frames = BackwardFrames::new(sys, x, n_max)?;
    let c = coefficients(&frames, v)?;
    Ok(converge(sys, &frames, &c, tol, n_max)?.0)
}

fn check_one_dimensional(sys: &SystemDescriptor) -> Result<()> {
    if !sys.has_points() {
        return Err(Error::UnsupportedKind { operation: "linearization", kind: sys.kind_name().into() });
    }
    let u = sys.block_dims().unstable;
    let one = if sys.is_holomorphic() { u == 2 } else { u == 1 };
    if !one {
        return Err(Error::ContractViolation(format!("unstable bundle has real dimension {u}, expected one-dimensional")));
    }
    Ok(())
}

/// The non-stationary linearization `Φₓ(v) = lim fⁿ(exp(f⁻ⁿx, Df⁻ⁿ·v))`.
pub fn nonstationary_linearization(
    sys: &SystemDescriptor,
    x: &SystemPoint,
    v: &RVector,
    tol: f64,
    n_max: usize,
) -> Result<Linearization> {
    check_one_dimensional(sys)?;
    let frames = BackwardFrames::new(sys, x, n_max)?;
    let c = coefficients(&frames, v)?;
    let (point, iterations, history) = converge(sys, &frames, &c, tol, n_max)?;
    let fx = sys.evaluate(x)?;
    let fx_frames = BackwardFrames::new(sys, &fx, iterations)?;
    let dv = sys.tangent_real(x)? * v;
    let c_next = coefficients(&fx_frames, &dv)?;
    let lhs = truncation(sys, &fx_frames, &c_next, iterations)?;
    let rhs = sys.evaluate(&point)?;
    Ok(Linearization { point, residual: sys.distance(&lhs, &rhs)?, iterations, history })
}

/// Finite-difference derivative of `Φₓ` at the origin.
pub fn linearization_derivative(sys: &SystemDescriptor, x: &SystemPoint, h: f64, tol: f64) -> Result<LinearizationDerivative> {
    check_one_dimensional(sys)?;
    let n_max = super::HOLONOMY_MAX_ITER;
    let frames = BackwardFrames::new(sys, x, n_max)?;
    let frame = frames.unstable().clone();
    let mut derivative = RMatrix::zeros(frame.nrows(), frame.ncols());
    for j in 0..frame.ncols() {
        let mut e = RVector::zeros(frame.ncols());
        e[j] = h;
        let plus = converge(sys, &frames, &e, tol, n_max)?.0;
        let minus = converge(sys, &frames, &(-&e), tol, n_max)?.0;
        let column = (sys.displacement(x, &plus)? - sys.displacement(x, &minus)?) / (2.0 * h);
        derivative.set_column(j, &column);
    }
    let deviation = (&derivative - &frame).column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(LinearizationDerivative { derivative, frame, deviation })
}
