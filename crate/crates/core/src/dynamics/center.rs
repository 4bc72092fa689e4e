use super::{canonical_frame, cone_splitting, HolonomyProbe, Relation, DEFAULT_APERTURE, SPLITTING_ITER};
use crate::cxcore::{CVector, RLinearMap, RMatrix, RVector, C64};
use crate::zoo::{SystemDescriptor, SystemKind, SystemPoint};
use crate::{Error, Result};

/// Points closer than this in the relevant coordinates are on the same
/// center leaf.
const LEAF_TOL: f64 = 1e-9;

fn unsupported(sys: &SystemDescriptor, operation: &'static str) -> Error {
    Error::UnsupportedKind { operation, kind: sys.kind_name().into() }
}

fn leaf_error(gap: f64) -> Error {
    Error::Relation(format!("points are {gap:.3e} apart transverse to the center leaf"))
}

/// Offset between the leading `n` coordinates of two points, wrapped by the
/// given lattice.
fn base_gap(lattice: &crate::lattices::Lattice, x: &SystemPoint, y: &SystemPoint, n: usize) -> f64 {
    let dx = CVector::from_iterator(n, (0..n).map(|k| y.coords[k] - x.coords[k]));
    lattice.wrap_difference(&dx).norm()
}

fn same_leaf(sys: &SystemDescriptor, x: &SystemPoint, y: &SystemPoint) -> Result<()> {
    let gap = match &sys.kind {
        SystemKind::HolomorphicSkewProduct(s) => base_gap(&s.base.lattice, x, y, s.base.dim()),
        SystemKind::MobiusFiberSystem(m) => base_gap(&m.base.lattice, x, y, m.base.dim()),
        SystemKind::EllipticQuotient(e) => {
            let d = e.cover.lattice.wrap_difference(&CVector::from_vec(vec![
                y.coords[0] - x.coords[0],
                y.coords[1] - x.coords[1],
                C64::new(0.0, 0.0),
            ]));
            d.norm()
        }
        SystemKind::BlanchardCalabi(b) => {
            let (ax, ay) = (b.fiber_real_coords(x)?, b.fiber_real_coords(y)?);
            ax.iter()
                .zip(&ay)
                .map(|(p, q)| (q - p).map(|t| t - t.round()).norm())
                .fold(0.0, f64::max)
        }
        _ => return Err(unsupported(sys, "center holonomy")),
    };
    if gap > LEAF_TOL {
        return Err(leaf_error(gap));
    }
    Ok(())
}

/// Exact center holonomy between unstable plaques of two points on the
/// same center leaf, in the flat coordinates of each endpoint's chart.
///
/// Translation-fibered kinds slide plaques rigidly, so the map is the
/// identity. For the Blanchard–Calabi kind the map keeps section
/// coordinates fixed and acts on the unstable coordinates `w ∈ ℂ²` (with
/// `Eᵘ = u ⊗ ℂ²` for the unstable eigenvector `u` of the mixing matrix) by
/// the per-copy transport between the fibers.
pub fn center_holonomy_closed_form(sys: &SystemDescriptor, x: &SystemPoint, y: &SystemPoint) -> Result<HolonomyProbe> {
    let k = sys.block_dims().unstable / 2;
    let map = match &sys.kind {
        SystemKind::MobiusFiberSystem(m) if !m.is_constant() => return Err(unsupported(sys, "closed-form center holonomy")),
        SystemKind::HolomorphicSkewProduct(_) | SystemKind::MobiusFiberSystem(_) | SystemKind::EllipticQuotient(_) => {
            same_leaf(sys, x, y)?;
            RLinearMap::identity(k)
        }
        SystemKind::BlanchardCalabi(b) => {
            same_leaf(sys, x, y)?;
            if x == y {
                RLinearMap::identity(2)
            } else {
                b.center_transport((x.chart, x.coords[0]), (y.chart, y.coords[0]))?
            }
        }
        _ => return Err(unsupported(sys, "closed-form center holonomy")),
    };
    Ok(HolonomyProbe {
        source: x.clone(),
        target: y.clone(),
        relation: Relation::Center,
        map,
        history: Vec::new(),
        iterations: 0,
    })
}

/// The point where the center leaf through `p` meets the unstable plaque of
/// `y`, for `p` on the unstable plaque of `x`.
pub fn center_slide(sys: &SystemDescriptor, p: &SystemPoint, x: &SystemPoint, y: &SystemPoint) -> Result<SystemPoint> {
    let mut q = p.clone();
    match &sys.kind {
        SystemKind::HolomorphicSkewProduct(s) => {
            let n = s.base.dim();
            q.coords[n] += y.coords[n] - x.coords[n];
        }
        SystemKind::EllipticQuotient(_) => q.coords[2] += y.coords[2] - x.coords[2],
        SystemKind::MobiusFiberSystem(m) if m.is_constant() => {
            let n = m.base.dim();
            q.chart = y.chart;
            q.coords[n] = y.coords[n];
        }
        SystemKind::BlanchardCalabi(b) => return b.center_point(p, y.chart, y.coords[0]),
        _ => return Err(unsupported(sys, "center slide")),
    }
    // Renormalize into the atlas.
    sys.exp(&q, &RVector::zeros(sys.real_dim()))
}

/// Center holonomy germ by central differences of the point-level slide,
/// in the canonical complex frames of the unstable bundles.
pub fn sampled_center_germ(sys: &SystemDescriptor, x: &SystemPoint, y: &SystemPoint, h: f64) -> Result<RLinearMap> {
    same_leaf(sys, x, y)?;
    let frame = |p: &SystemPoint| -> Result<RMatrix> {
        let split = cone_splitting(sys, p, SPLITTING_ITER, DEFAULT_APERTURE)?;
        Ok(canonical_frame(&split.unstable, true))
    };
    let (fx, fy) = (frame(x)?, frame(y)?);
    let mut jac = RMatrix::zeros(fy.ncols(), fx.ncols());
    for j in 0..fx.ncols() {
        let e = fx.column(j) * h;
        let plus = center_slide(sys, &sys.exp(x, &e)?, x, y)?;
        let minus = center_slide(sys, &sys.exp(x, &(-&e))?, x, y)?;
        let d = (sys.displacement(y, &plus)? - sys.displacement(y, &minus)?) / (2.0 * h);
        jac.set_column(j, &(fy.transpose() * d));
    }
    RLinearMap::from_real_matrix(&jac)
}

/// Operator norm of the ℂ-antilinear part of the closed-form center
/// holonomy; exactly 0 for coincident points.
pub fn dbar_defect(sys: &SystemDescriptor, x: &SystemPoint, y: &SystemPoint) -> Result<f64> {
    if x == y {
        same_leaf(sys, x, y)?;
        return Ok(0.0);
    }
    Ok(center_holonomy_closed_form(sys, x, y)?.map.dbar_norm())
}

/// The ∂̄-defect of the finite-difference germ.
pub fn dbar_defect_sampled(sys: &SystemDescriptor, x: &SystemPoint, y: &SystemPoint, h: f64) -> Result<f64> {
    Ok(sampled_center_germ(sys, x, y, h)?.dbar_norm())
}
