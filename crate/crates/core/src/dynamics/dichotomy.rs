use super::{canonical_frame, cone_splitting, step, DEFAULT_APERTURE, SPLITTING_ITER};
use crate::cxcore::{degenerate_limit, singular_values, CMatrix, RMatrix, SpherePoint, C64};
use crate::exec::Execution;
use crate::zoo::{MobiusFiberSystem, SystemDescriptor, SystemKind, SystemPoint};
use crate::{Error, Result};
use serde::Serialize;

pub const DICHOTOMY_STEPS: usize = 40;
pub const DEFAULT_BOUND: f64 = 10.0;
/// Growth between the bound and this multiple of it is inconclusive.
const INCONCLUSIVE_FACTOR: f64 = 10.0;
/// Pairs closer than this to the exceptional point are not tested.
const EXCEPTIONAL_MARGIN: f64 = 0.1;
/// Powers `2ᵏ` for constant fiber matrices, orbit steps otherwise.
const SQUARINGS: usize = 64;
const ORBIT_SAMPLES: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Isometry,
    Contraction,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairContraction {
    pub pairs: usize,
    pub steps: usize,
    /// Largest center distance between paired orbits after `steps`.
    pub max_final_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub verdict: Verdict,
    /// `max` over samples of `‖Dfⁿ|Eᶜ‖`, for `n = 0..=N`.
    pub growth_curve: Vec<f64>,
    pub bound: f64,
    /// The point off which fibers contract (contraction case, sphere fibers).
    pub exceptional_point: Option<SpherePoint>,
    pub attractor: Option<SpherePoint>,
    /// Diameter of a test panel under the degenerating sequence.
    pub contraction_curve: Vec<f64>,
    pub pair_check: Option<PairContraction>,
}

/// Operator norms of the center cocycle along the orbit of `p`. Sphere
/// fibers use the unit-determinant fiber matrices, whose norm governs the
/// spherical derivative; other kinds use the center frame in flat charts.
pub fn center_growth(sys: &SystemDescriptor, p: &SystemPoint, n: usize) -> Result<Vec<f64>> {
    if let SystemKind::MobiusFiberSystem(m) = &sys.kind {
        let mut z = m.base_point(p);
        let mut prod = CMatrix::identity(2, 2);
        let mut out = vec![1.0];
        for _ in 0..n {
            prod = m.unit_fiber_matrix(&z) * prod;
            out.push(crate::cxcore::svd2(&prod)?.s1);
            z = m.base.apply(&z);
        }
        return Ok(out);
    }
    let frame = match sys.kind {
        // The fiber is the last complex coordinate and is fixed by Df.
        SystemKind::HolomorphicSkewProduct(_) | SystemKind::EllipticQuotient(_) => {
            let d = sys.real_dim();
            RMatrix::from_fn(d, 2, |i, j| if i == d - 2 + j { 1.0 } else { 0.0 })
        }
        _ => canonical_frame(&cone_splitting(sys, p, SPLITTING_ITER, DEFAULT_APERTURE)?.center, false),
    };
    let mut image = frame.clone();
    let mut q = p.clone();
    let mut out = vec![1.0];
    for _ in 0..n {
        image = sys.tangent_real(&q)? * image;
        out.push(singular_values(&image)[0]);
        q = step(sys, &q)?;
    }
    Ok(out)
}

/// `gᴺ = a(N)·g − a(N − 1)·I` for unit-determinant `g`, where
/// `a(N) = sinh(Nθ)/sinh θ` and `cosh θ = tr g / 2`. Repeated squaring lets
/// the trace drift by `ε·N²`, which turns parabolic powers loxodromic.
fn unit_power(g: &CMatrix, theta: C64, n: f64) -> CMatrix {
    let s = theta.sinh();
    let a = |m: f64| if s.norm() == 0.0 { C64::new(m, 0.0) } else { (theta * m).sinh() / s };
    g * a(n) - CMatrix::identity(2, 2) * a(n - 1.0)
}

fn exceptional(m: &MobiusFiberSystem, p: &SystemPoint) -> Result<crate::cxcore::DegenerateLimit> {
    if m.is_constant() {
        let g = m.unit_fiber_matrix(&m.base_point(p));
        let theta = (g.trace() / 2.0).acosh();
        degenerate_limit(|k| unit_power(&g, theta, 2f64.powi(k as i32)), SQUARINGS)
    } else {
        let mut z = m.base_point(p);
        let mut prod = CMatrix::identity(2, 2);
        degenerate_limit(
            |_| {
                prod = m.unit_fiber_matrix(&z) * &prod;
                z = m.base.apply(&z);
                prod.clone()
            },
            ORBIT_SAMPLES,
        )
    }
}

fn pair_partner(b: &SpherePoint, s: &SpherePoint) -> SpherePoint {
    let far = b.antipode();
    if far.distance(s) > 0.05 {
        return far;
    }
    let (a, bb) = b.coords();
    let (pa, pb) = far.coords();
    SpherePoint::new(pa + C64::new(0.5, 0.0) * a, pb + C64::new(0.5, 0.0) * bb).expect("finite point")
}

/// Iterates each sample off `b` together with a partner point on its fiber
/// and reports the largest final chordal distance.
pub fn pair_contraction(sys: &SystemDescriptor, samples: &[SystemPoint], b: &SpherePoint, steps: usize) -> Result<PairContraction> {
    let SystemKind::MobiusFiberSystem(m) = &sys.kind else {
        return Err(Error::UnsupportedKind { operation: "pair contraction", kind: sys.kind_name().into() });
    };
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for p in samples {
        let s = m.fiber_point(p)?;
        if s.distance(b) < EXCEPTIONAL_MARGIN {
            continue;
        }
        let partner = pair_partner(b, &s);
        let (mut x, mut y) = (p.clone(), m.point(&m.base_point(p), &partner));
        for _ in 0..steps {
            x = sys.evaluate(&x)?;
            y = sys.evaluate(&y)?;
        }
        worst = worst.max(m.fiber_point(&x)?.distance(&m.fiber_point(&y)?));
        pairs += 1;
    }
    Ok(PairContraction { pairs, steps, max_final_distance: worst })
}

/// Isometry when the curve never exceeds `bound`, Contraction when its
/// final value exceeds `INCONCLUSIVE_FACTOR · bound`, Inconclusive between.
pub fn classify_growth(growth_curve: &[f64], bound: f64) -> Verdict {
    let sup = growth_curve.iter().copied().fold(0.0, f64::max);
    let last = growth_curve.last().copied().unwrap_or(0.0);
    if sup <= bound {
        Verdict::Isometry
    } else if last > INCONCLUSIVE_FACTOR * bound {
        Verdict::Contraction
    } else {
        Verdict::Inconclusive
    }
}

/// Isometry if the center cocycle stays below `bound` for `n ≤ N` at all
/// samples, contraction if it exceeds `10·bound` at `N`, inconclusive in
/// between. In the contraction case on sphere fibers the exceptional point
/// comes from the degenerating fiber cocycle and is checked by iterating
/// pairs of points off it.
pub fn dichotomy_classify(
    sys: &SystemDescriptor,
    samples: &[SystemPoint],
    n: usize,
    bound: f64,
    exec: Execution,
) -> Result<DichotomyReport> {
    match &sys.kind {
        SystemKind::MobiusFiberSystem(_)
        | SystemKind::HolomorphicSkewProduct(_)
        | SystemKind::EllipticQuotient(_)
        | SystemKind::BlanchardCalabi(_) => {}
        _ => return Err(Error::UnsupportedKind { operation: "dichotomy", kind: sys.kind_name().into() }),
    }
    if samples.is_empty() {
        return Err(Error::ContractViolation("no sample points".into()));
    }
    let curves = exec.try_map_indexed(samples.len(), |i| center_growth(sys, &samples[i], n))?;
    let growth_curve: Vec<f64> = (0..=n).map(|k| curves.iter().map(|c| c[k]).fold(0.0, f64::max)).collect();
    let verdict = classify_growth(&growth_curve, bound);
    let mut report = DichotomyReport {
        verdict,
        growth_curve,
        bound,
        exceptional_point: None,
        attractor: None,
        contraction_curve: Vec::new(),
        pair_check: None,
    };
    if let (Verdict::Contraction, SystemKind::MobiusFiberSystem(m)) = (verdict, &sys.kind) {
        let limit = exceptional(m, &samples[0])?;
        report.pair_check = Some(if m.is_constant() {
            pair_contraction(sys, samples, &limit.b, n)?
        } else {
            let mut total = PairContraction { pairs: 0, steps: n, max_final_distance: 0.0 };
            for p in samples {
                let own = exceptional(m, p)?;
                let one = pair_contraction(sys, std::slice::from_ref(p), &own.b, n)?;
                total.pairs += one.pairs;
                total.max_final_distance = total.max_final_distance.max(one.max_final_distance);
            }
            total
        });
        report.exceptional_point = Some(limit.b);
        report.attractor = Some(limit.attractor);
        report.contraction_curve = limit.contraction_curve;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::build;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn samples(sys: &SystemDescriptor, k: usize) -> Vec<SystemPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        (0..k).map(|_| sys.sample_point(&mut rng).unwrap()).collect()
    }

    #[test]
    fn unitary_fiber_is_isometry() {
        let sys = build("mobius_elliptic").unwrap();
        let r = dichotomy_classify(&sys, &samples(&sys, 8), DICHOTOMY_STEPS, DEFAULT_BOUND, Execution::Sequential).unwrap();
        assert_eq!(r.verdict, Verdict::Isometry);
        assert!(r.growth_curve.iter().all(|g| (g - 1.0).abs() < 1e-12));
    }

    #[test]
    fn loxodromic_fiber_contracts_off_zero() {
        let sys = build("mobius_loxodromic").unwrap();
        let r = dichotomy_classify(&sys, &samples(&sys, 8), 25, DEFAULT_BOUND, Execution::Sequential).unwrap();
        assert_eq!(r.verdict, Verdict::Contraction);
        assert!(r.exceptional_point.unwrap().distance(&SpherePoint::zero()) < 1e-12);
        assert!(r.attractor.unwrap().distance(&SpherePoint::infinity()) < 1e-12);
        assert!(r.pair_check.unwrap().max_final_distance < 1e-3);
    }

    #[test]
    fn parabolic_fiber_contracts_to_its_fixed_point() {
        let sys = build("mobius_parabolic").unwrap();
        let r = dichotomy_classify(&sys, &samples(&sys, 4), 400, DEFAULT_BOUND, Execution::Sequential).unwrap();
        assert_eq!(r.verdict, Verdict::Contraction);
        let b = r.exceptional_point.unwrap();
        assert!(b.distance(&SpherePoint::infinity()) < 1e-12);
        assert!(b.distance(&r.attractor.unwrap()) < 1e-12);
    }

    #[test]
    fn translation_fibers_are_isometries() {
        for name in ["skew_l1", "skew_l0", "elliptic_quotient"] {
            let sys = build(name).unwrap();
            let r = dichotomy_classify(&sys, &samples(&sys, 4), DICHOTOMY_STEPS, DEFAULT_BOUND, Execution::Sequential).unwrap();
            assert_eq!(r.verdict, Verdict::Isometry, "{name}");
        }
    }

    #[test]
    fn modulated_fiber_is_classified() {
        let sys = build("mobius_modulated").unwrap();
        let r = dichotomy_classify(&sys, &samples(&sys, 3), DICHOTOMY_STEPS, DEFAULT_BOUND, Execution::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Contraction);
        assert!(r.pair_check.unwrap().max_final_distance < 1e-3);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let sys = build("mobius_loxodromic").unwrap();
        let s = samples(&sys, 6);
        let a = dichotomy_classify(&sys, &s, 20, DEFAULT_BOUND, Execution::Sequential).unwrap();
        let b = dichotomy_classify(&sys, &s, 20, DEFAULT_BOUND, Execution::Parallel).unwrap();
        assert_eq!(a.growth_curve, b.growth_curve);
    }
}
