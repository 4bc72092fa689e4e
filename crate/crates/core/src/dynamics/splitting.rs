use super::{qr_frame, step, step_back, subspace_gap};
use crate::cxcore::{null_space, orthonormalize, RMatrix};
use crate::zoo::{SystemDescriptor, SystemPoint};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Successive estimates closer than this end the iteration.
pub const SPLITTING_TOL: f64 = 1e-12;
pub const SPLITTING_ITER: usize = 60;
pub const DEFAULT_APERTURE: f64 = 0.1;

/// Orthonormal bases of the three bundles at a point.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingEstimate {
    pub stable: RMatrix,
    pub center: RMatrix,
    pub unstable: RMatrix,
    /// Largest `‖Df·v − proj(Df·v)‖ / ‖Df·v‖` over the basis vectors, with
    /// the bundles estimated independently at `p` and `f(p)`.
    pub residual: f64,
    pub iterations: usize,
    /// Gap between successive estimates, logged while above the tolerance.
    pub history: Vec<f64>,
}

/// Leading columns of the identity tilted by a fixed generic matrix of size
/// `aperture`, so that the frame is transverse to every fixed subspace.
pub(crate) fn seed_frame(dim: usize, k: usize, aperture: f64, salt: u64) -> RMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ salt);
    let m = RMatrix::from_fn(dim, k, |i, j| if i == j { 1.0 } else { 0.0 } + aperture * rng.gen_range(-1.0..1.0));
    qr_frame(&m)
}

fn push(frame: &RMatrix, maps: &[&RMatrix]) -> RMatrix {
    maps.iter().fold(frame.clone(), |f, m| qr_frame(&(*m * f)))
}

struct Bundles {
    unstable: RMatrix,
    center_unstable: RMatrix,
    stable: RMatrix,
    center_stable: RMatrix,
}

fn intersect(a: &RMatrix, b: &RMatrix, dim: usize) -> RMatrix {
    if dim == 0 {
        return RMatrix::zeros(a.nrows(), 0);
    }
    let mut stacked = RMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    stacked.columns_mut(0, a.ncols()).copy_from(a);
    stacked.columns_mut(a.ncols(), b.ncols()).copy_from(&(-b));
    let kernel = null_space(&stacked, dim);
    orthonormalize(&(a * kernel.rows(0, a.ncols())), 1e-10)
}

fn invariance_residual(df: &RMatrix, here: &RMatrix, there: &RMatrix) -> f64 {
    let image = df * here;
    let projected = there * (there.transpose() * &image);
    image
        .column_iter()
        .zip(projected.column_iter())
        .map(|(v, p)| (v - p).norm() / v.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Splitting at `p` by pushing generic flags forward from `f⁻ⁿ(p)`
/// (unstable and center-unstable) and backward from `fⁿ(p)` (stable and
/// center-stable). The center bundle is the intersection of the two
/// center bundles. Non-convergence is reported through the residual.
pub fn cone_splitting(sys: &SystemDescriptor, p: &SystemPoint, n: usize, aperture: f64) -> Result<SplittingEstimate> {
    if n == 0 {
        return Err(Error::ContractViolation("splitting needs at least one iteration".into()));
    }
    let dims = sys.block_dims();
    let d = sys.real_dim();
    let (s, c, u) = (dims.stable, dims.center, dims.unstable);
    // back_df[j] maps f^{-j}p to f^{-j+1}p; fwd_inv[j] maps f^{j+1}p to f^{j}p.
    let mut back_df = vec![RMatrix::zeros(0, 0)];
    let mut q = p.clone();
    for _ in 0..n {
        q = step_back(sys, &q)?;
        back_df.push(sys.tangent_real(&q)?);
    }
    let mut fwd_df = Vec::with_capacity(n + 1);
    let mut q = p.clone();
    for _ in 0..=n {
        fwd_df.push(sys.tangent_real(&q)?);
        q = step(sys, &q)?;
    }
    let fwd_inv = fwd_df
        .iter()
        .map(|m| m.clone().try_inverse().ok_or_else(|| Error::SingularInput("tangent map is not invertible".into())))
        .collect::<Result<Vec<_>>>()?;
    let cu_seed = seed_frame(d, c + u, aperture, 1);
    let cs_seed = seed_frame(d, s + c, aperture, 2);

    // Bundles estimated from k steps, at p (shift 0) or at f(p) (shift 1).
    let estimate = |k: usize, shift: usize| -> Bundles {
        let mut forward: Vec<&RMatrix> = (1 + shift..=k).rev().map(|j| &back_df[j]).collect();
        if shift == 1 {
            // f^{-k+1}p → … → p → f(p).
            forward = (1..k).rev().map(|j| &back_df[j]).collect();
            forward.push(&fwd_df[0]);
        }
        let backward: Vec<&RMatrix> = (shift..k + shift).rev().map(|j| &fwd_inv[j]).collect();
        let cu = push(&cu_seed, &forward);
        let cs = push(&cs_seed, &backward);
        Bundles {
            unstable: cu.columns(0, u).into_owned(),
            center_unstable: cu,
            stable: cs.columns(0, s).into_owned(),
            center_stable: cs,
        }
    };

    let mut history = Vec::new();
    let mut previous = estimate(1, 0);
    let mut iterations = 1;
    for k in 2..=n {
        let next = estimate(k, 0);
        let gap = [
            subspace_gap(&next.unstable, &previous.unstable),
            subspace_gap(&next.center_unstable, &previous.center_unstable),
            subspace_gap(&next.stable, &previous.stable),
            subspace_gap(&next.center_stable, &previous.center_stable),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        previous = next;
        iterations = k;
        if gap < SPLITTING_TOL {
            break;
        }
        history.push(gap);
    }
    let here = previous;
    let there = estimate(iterations, 1);
    let center_here = intersect(&here.center_stable, &here.center_unstable, c);
    let center_there = intersect(&there.center_stable, &there.center_unstable, c);
    let df = &fwd_df[0];
    let residual = [
        invariance_residual(df, &here.unstable, &there.unstable),
        invariance_residual(df, &here.stable, &there.stable),
        invariance_residual(df, &center_here, &center_there),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(SplittingEstimate {
        stable: here.stable,
        center: center_here,
        unstable: here.unstable,
        residual,
        iterations,
        history,
    })
}
