use super::{cone_splitting, step, step_back, DEFAULT_APERTURE, SPLITTING_ITER};
use crate::cxcore::RMatrix;
use crate::zoo::{SystemDescriptor, SystemPoint};
use crate::{Error, Result};
use serde::Serialize;

/// Exponents grouped by the bundles of the map that was iterated (for the
/// inverse map its unstable bundle is the stable bundle of `f`).
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    pub unstable: Vec<f64>,
    pub center: Vec<f64>,
    pub stable: Vec<f64>,
    /// All exponents, largest first.
    pub exponents: Vec<f64>,
    pub iterations: usize,
    pub inverse: bool,
}

/// Time averages of `log |Rᵢᵢ|` from QR along the orbit, started from the
/// frame `[Eᵘ | Eᶜ | Eˢ]` so that each block sees its own growth.
pub fn lyapunov(sys: &SystemDescriptor, p: &SystemPoint, n: usize, inverse: bool) -> Result<LyapunovReport> {
    if n == 0 {
        return Err(Error::ContractViolation("need at least one iteration".into()));
    }
    let split = cone_splitting(sys, p, SPLITTING_ITER, DEFAULT_APERTURE)?;
    let (first, last) = if inverse { (&split.stable, &split.unstable) } else { (&split.unstable, &split.stable) };
    let (ku, kc, ks) = (first.ncols(), split.center.ncols(), last.ncols());
    let d = sys.real_dim();
    let mut frame = RMatrix::zeros(d, d);
    frame.columns_mut(0, ku).copy_from(first);
    frame.columns_mut(ku, kc).copy_from(&split.center);
    frame.columns_mut(ku + kc, ks).copy_from(last);
    // Orthonormal flag, so that the first QR step measures growth only.
    let mut frame = super::qr_frame(&frame);
    let mut sums = vec![0.0; d];
    let mut q = p.clone();
    for _ in 0..n {
        let df = if inverse { sys.tangent_inverse_real(&q)? } else { sys.tangent_real(&q)? };
        let qr = (df * &frame).qr();
        let r = qr.r();
        for (i, s) in sums.iter_mut().enumerate() {
            *s += r[(i, i)].abs().ln();
        }
        frame = qr.q();
        q = if inverse { step_back(sys, &q)? } else { step(sys, &q)? };
    }
    let all: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let mut exponents = all.clone();
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovReport {
        unstable: all[..ku].to_vec(),
        center: all[ku..ku + kc].to_vec(),
        stable: all[ku + kc..].to_vec(),
        exponents,
        iterations: n,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::build;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CAT: f64 = 0.962_423_650_119_206_9;

    #[test]
    fn cat_map_exponents() {
        let sys = build("cat2c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sys.sample_point(&mut rng).unwrap();
        let r = lyapunov(&sys, &p, 2000, false).unwrap();
        for x in &r.unstable {
            assert!((x - CAT).abs() < 1e-9);
        }
        for x in &r.stable {
            assert!((x + CAT).abs() < 1e-9);
        }
    }

    #[test]
    fn blanchard_calabi_block_multiplicities() {
        let sys = build("bc_n1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = sys.sample_point(&mut rng).unwrap();
        let n = 2000;
        let r = lyapunov(&sys, &p, n, false).unwrap();
        assert_eq!((r.unstable.len(), r.center.len(), r.stable.len()), (4, 2, 4));
        assert!(r.unstable.iter().all(|x| (x - CAT).abs() < 1e-9));
        // The angle between the stable and centre-unstable bundles varies
        // along the orbit, which leaves an O(1/n) bias in the later blocks.
        let bias = 0.5 / n as f64;
        assert!(r.stable.iter().all(|x| (x + CAT).abs() < bias), "{:?}", r.stable);
        assert!(r.center.iter().all(|x| x.abs() < bias), "{:?}", r.center);
    }

    #[test]
    fn unitary_fiber_has_zero_exponent() {
        let sys = build("mobius_elliptic").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sys.sample_point(&mut rng).unwrap();
        let r = lyapunov(&sys, &p, 5000, false).unwrap();
        assert!(r.center.iter().all(|x| x.abs() < 1e-9), "{:?}", r.center);
    }

    #[test]
    fn inverse_exponents_are_negated() {
        let sys = build("skew_l1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = sys.sample_point(&mut rng).unwrap();
        let f = lyapunov(&sys, &p, 1000, false).unwrap();
        let g = lyapunov(&sys, &p, 1000, true).unwrap();
        for (a, b) in f.exponents.iter().zip(g.exponents.iter().rev()) {
            assert!((a + b).abs() < 1e-9);
        }
    }
}
