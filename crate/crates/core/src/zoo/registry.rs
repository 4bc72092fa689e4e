use super::{
    BlanchardCalabi, EllipticQuotient, MobiusFiberSystem, Nilmanifold, SkewProduct, SystemDescriptor, SystemKind,
    TorusAutomorphism,
};
use crate::cxcore::{c, cmat, C64};
use crate::lattices::Lattice;
use crate::{Error, Result};

const NAMES: [&str; 11] = [
    "cat2c",
    "skew_l1",
    "skew_l0",
    "bc_n1",
    "iwasawa",
    "h5acc",
    "elliptic_quotient",
    "mobius_elliptic",
    "mobius_loxodromic",
    "mobius_parabolic",
    "mobius_modulated",
];

pub fn registry_names() -> Vec<&'static str> {
    NAMES.to_vec()
}

fn skew(twist: [f64; 2]) -> Result<SkewProduct> {
    SkewProduct::new(
        TorusAutomorphism::cat_map(),
        Lattice::gaussian(1),
        twist.iter().map(|&t| c(t, 0.0)).collect(),
    )
}

fn mobius(g: &[&[C64]], modulation: Option<f64>) -> Result<MobiusFiberSystem> {
    MobiusFiberSystem::new(TorusAutomorphism::cat_map(), cmat(g), modulation)
}

pub fn build(name: &str) -> Result<SystemDescriptor> {
    let zero = c(0.0, 0.0);
    let kind = match name {
        "cat2c" => SystemKind::TorusAutomorphism(TorusAutomorphism::cat_map()),
        "skew_l1" => SystemKind::HolomorphicSkewProduct(skew([1.0, 1.0])?),
        "skew_l0" => SystemKind::HolomorphicSkewProduct(skew([0.0, 0.0])?),
        "bc_n1" => SystemKind::BlanchardCalabi(BlanchardCalabi::standard()),
        "iwasawa" => SystemKind::NilmanifoldAutomorphism(Nilmanifold::from_catalog("h3_complex")?),
        "h5acc" => SystemKind::NilmanifoldAutomorphism(Nilmanifold::from_catalog("h5_plus_center")?),
        "elliptic_quotient" => SystemKind::EllipticQuotient(EllipticQuotient::new(c(0.0, 2.0))?),
        "mobius_elliptic" => {
            let r = C64::from_polar(1.0, 0.7);
            SystemKind::MobiusFiberSystem(mobius(&[&[r, zero], &[zero, r.conj()]], None)?)
        }
        "mobius_loxodromic" => SystemKind::MobiusFiberSystem(mobius(&[&[c(2.0, 0.0), zero], &[zero, c(0.5, 0.0)]], None)?),
        "mobius_parabolic" => {
            SystemKind::MobiusFiberSystem(mobius(&[&[c(1.0, 0.0), c(1.0, 0.0)], &[zero, c(1.0, 0.0)]], None)?)
        }
        "mobius_modulated" => {
            SystemKind::MobiusFiberSystem(mobius(&[&[c(2.0, 0.0), zero], &[zero, c(0.5, 0.0)]], Some(0.3))?)
        }
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(SystemDescriptor::new(name, kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds_and_serializes() {
        for name in registry_names() {
            let sys = build(name).unwrap();
            let json = serde_json::to_value(&sys).unwrap();
            assert_eq!(json["name"], name);
            assert_eq!(sys.block_dims().total(), sys.real_dim(), "{name}");
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(build("nope"), Err(Error::UnknownSystem(_))));
    }
}
