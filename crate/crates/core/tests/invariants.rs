//! Cross-module invariants on the registry systems.

use holodyn::cxcore::{c, cmat, CMatrix, RVector, C64};
use holodyn::dynamics::{
    center_growth, cone_splitting, lyapunov, unstable_holonomy, unstable_point, BackwardFrames, DEFAULT_APERTURE,
    HOLONOMY_MAX_ITER, HOLONOMY_TOL, SPLITTING_ITER,
};
use holodyn::lattices::{modulus_reduce, Lattice};
use holodyn::measures::{gibbs_u_estimate, FiberDensity};
use holodyn::zoo::{build, registry_names, MobiusFiberSystem, SystemDescriptor, SystemKind, TorusAutomorphism};
use holodyn::Execution;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn registry_systems_build_and_serialize() {
    for name in registry_names() {
        let sys = build(name).unwrap();
        assert_eq!(sys.name, name);
        let json = serde_json::to_string(&sys).unwrap();
        assert!(json.contains(name));
        if sys.has_points() {
            let a = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let b = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            assert_eq!(a, b, "{name}: sampling is a function of the seed");
        }
    }
}

#[test]
fn splitting_dimensions_add_up() {
    for name in registry_names() {
        let sys = build(name).unwrap();
        if !sys.has_points() || name == "mobius_loxodromic" || name == "mobius_modulated" {
            continue;
        }
        let p = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let s = cone_splitting(&sys, &p, SPLITTING_ITER, DEFAULT_APERTURE).unwrap();
        assert_eq!(s.stable.ncols() + s.center.ncols() + s.unstable.ncols(), sys.real_dim(), "{name}");
        assert!(s.residual < 1e-8, "{name}: {}", s.residual);
    }
}

/// Volume-preserving maps have exponents summing to zero.
#[test]
fn exponents_sum_to_zero_on_unimodular_systems() {
    for name in ["cat2c", "skew_l0", "skew_l1", "elliptic_quotient"] {
        let sys = build(name).unwrap();
        let p = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let r = lyapunov(&sys, &p, 2000, false).unwrap();
        let total: f64 = r.exponents.iter().sum();
        assert!(total.abs() < 1e-9, "{name}: {total}");
    }
}

#[test]
fn forward_and_inverse_exponents_mirror() {
    let sys = build("cat2c").unwrap();
    let p = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let f = lyapunov(&sys, &p, 3000, false).unwrap();
    let b = lyapunov(&sys, &p, 3000, true).unwrap();
    for (x, y) in f.exponents.iter().zip(b.exponents.iter().rev()) {
        assert!((x + y).abs() < 1e-6);
    }
}

#[test]
fn gibbs_estimate_is_seed_deterministic_across_execution() {
    let sys = build("skew_l1").unwrap();
    let x = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let a = gibbs_u_estimate(&sys, &x, 0.3, 30, 200, 17, Execution::Sequential).unwrap();
    let b = gibbs_u_estimate(&sys, &x, 0.3, 30, 200, 17, Execution::Parallel).unwrap();
    let c2 = gibbs_u_estimate(&sys, &x, 0.3, 30, 200, 18, Execution::Parallel).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c2).unwrap());
}

fn elliptic_fiber(theta: f64, e: [f64; 4]) -> (SystemDescriptor, f64) {
    let p = cmat(&[&[c(1.0 + e[0], e[1]), c(e[2], 0.0)], &[c(0.0, e[3]), c(1.0, 0.0)]]);
    let d = cmat(&[&[C64::from_polar(1.0, theta), c(0.0, 0.0)], &[c(0.0, 0.0), C64::from_polar(1.0, -theta)]]);
    let g: CMatrix = &p * d * p.clone().try_inverse().unwrap();
    let s = p.clone().svd(false, false).singular_values;
    let kappa = s[0] / s[1];
    let m = MobiusFiberSystem::new(TorusAutomorphism::cat_map(), g, None).unwrap();
    (SystemDescriptor::new("conjugated_rotation", SystemKind::MobiusFiberSystem(m)), kappa)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// A conjugated rotation `P R P⁻¹` has all powers bounded by `κ(P)²`.
    #[test]
    fn conjugated_rotations_stay_bounded(theta in 0.1f64..3.0, e in prop::array::uniform4(-0.3f64..0.3), seed in 0u64..1000) {
        let (sys, kappa) = elliptic_fiber(theta, e);
        let p = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let curve = center_growth(&sys, &p, 200).unwrap();
        prop_assert!(curve.iter().all(|g| *g <= kappa * kappa * (1.0 + 1e-9)));
    }

    /// Holonomies compose along unstable triples of the cat map.
    #[test]
    fn holonomy_cocycle(seed in 0u64..500) {
        let sys = build("cat2c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sys.sample_point(&mut rng).unwrap();
        let near = |p, rng: &mut ChaCha8Rng| {
            let e = BackwardFrames::new(&sys, p, 0).unwrap().unstable().clone();
            let v = &e * RVector::from_fn(e.ncols(), |_, _| 0.05 * rng.gen_range(-1.0..1.0));
            unstable_point(&sys, p, &v, 1e-13, 200).unwrap()
        };
        let y = near(&x, &mut rng);
        let z = near(&y, &mut rng);
        let h = |a, b| unstable_holonomy(&sys, a, b, HOLONOMY_TOL, HOLONOMY_MAX_ITER).unwrap().map;
        let lhs = h(&y, &z).compose(&h(&x, &y)).to_real_matrix();
        prop_assert!((lhs - h(&x, &z).to_real_matrix()).norm() < 1e-8);
    }

    /// The reduced modulus depends only on the lattice, not on its basis.
    #[test]
    fn modulus_is_a_lattice_invariant(re in -2.0f64..2.0, im in 0.2f64..3.0, a in -3i64..4, b in -3i64..4) {
        let (w1, w2) = (c(1.0, 0.0), c(re, im));
        // Unimodular change of basis [[1, a], [b, 1 + ab]].
        let (v1, v2) = (w1 + w2 * a as f64, w1 * b as f64 + w2 * (1 + a * b) as f64);
        let t1 = modulus_reduce(w1, w2).unwrap().0.tau;
        let t2 = modulus_reduce(v1, v2).unwrap().0.tau;
        prop_assert!((t1 - t2).norm() < 1e-9, "{t1} vs {t2}");
    }

    /// Heat flow never increases the distance to the mean.
    #[test]
    fn heat_is_contracting(t in 1e-4f64..0.1, k1 in -3i64..4, k2 in -3i64..4) {
        prop_assume!((k1, k2) != (0, 0));
        let lattice = Lattice::planar(c(1.0, 0.0), c(0.3, 1.1)).unwrap();
        let d = FiberDensity::single_mode(&lattice, 6, (k1, k2), 0.5).unwrap();
        let e = d.heat_step_with(t, Execution::Parallel).unwrap();
        prop_assert!(e.l2_to_mean() < d.l2_to_mean());
        prop_assert!((e.mass() - d.mass()).abs() < 1e-12);
    }
}
