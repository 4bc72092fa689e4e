//! The analysis engine: invariant splittings, Lyapunov exponents, limit
//! holonomies, non-stationary linearization, the ∂̄-defect of center
//! holonomy, the isometry/contraction dichotomy, translation maps and
//! fiber-modulus scans.

mod center;
mod dichotomy;
mod holonomy;
mod linearization;
mod lyapunov;
mod splitting;
mod translation;

pub use center::{center_holonomy_closed_form, center_slide, dbar_defect, dbar_defect_sampled, sampled_center_germ};
pub use dichotomy::{center_growth, classify_growth, dichotomy_classify, pair_contraction, DichotomyReport, PairContraction, Verdict, DEFAULT_BOUND, DICHOTOMY_STEPS};
pub use holonomy::{
    unstable_holonomy, BackwardFrames, HolonomyProbe, Relation, HOLONOMY_MAX_ITER, HOLONOMY_TOL, RELATION_STEPS,
    RELATION_TOL,
};
pub use linearization::{
    linearization_derivative, nonstationary_linearization, unstable_point, Linearization, LinearizationDerivative,
};
pub use lyapunov::{lyapunov, LyapunovReport};
pub use splitting::{cone_splitting, SplittingEstimate, DEFAULT_APERTURE, SPLITTING_ITER, SPLITTING_TOL};
pub use translation::{modulus_scan, translation_map, unstable_projection, ModulusScan, TranslationMap};

use crate::cxcore::{complex_frame, orthonormalize, RMatrix};
use crate::zoo::{SystemDescriptor, SystemPoint};
use crate::Result;

/// `f(p)`; left-invariant systems have a single formal point.
pub(crate) fn step(sys: &SystemDescriptor, p: &SystemPoint) -> Result<SystemPoint> {
    if sys.has_points() {
        sys.evaluate(p)
    } else {
        Ok(p.clone())
    }
}

pub(crate) fn step_back(sys: &SystemDescriptor, p: &SystemPoint) -> Result<SystemPoint> {
    if sys.has_points() {
        sys.evaluate_inverse(p)
    } else {
        Ok(p.clone())
    }
}

/// Orthonormal basis of the span of `m`'s columns, leading columns first.
pub(crate) fn qr_frame(m: &RMatrix) -> RMatrix {
    let k = m.ncols();
    m.clone().qr().q().columns(0, k).into_owned()
}

/// Distance between the spans of two orthonormal frames.
pub(crate) fn subspace_gap(a: &RMatrix, b: &RMatrix) -> f64 {
    (a * a.transpose() - b * b.transpose()).norm()
}

/// A frame of the span of `basis` that depends only on the subspace:
/// Gram–Schmidt of its orthogonal projections of the coordinate vectors.
/// With `complex` the frame has the form `(q₁, i·q₁, q₂, i·q₂, …)`.
pub fn canonical_frame(basis: &RMatrix, complex: bool) -> RMatrix {
    let k = basis.ncols();
    let q = orthonormalize(basis, 1e-10);
    let p = &q * q.transpose();
    let keep: Vec<_> = p.column_iter().filter(|c| c.norm() > 1e-3).map(|c| c.into_owned()).collect();
    if keep.is_empty() {
        return RMatrix::zeros(basis.nrows(), 0);
    }
    let candidates = RMatrix::from_columns(&keep);
    let frame = if complex { complex_frame(&candidates, 1e-3) } else { orthonormalize(&candidates, 1e-3) };
    frame.columns(0, k.min(frame.ncols())).into_owned()
}
