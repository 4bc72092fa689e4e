use super::BlockDims;
use crate::cxcore::{complex_structure, RMatrix};
use crate::liecx::{hyperbolic_splitting, load, CatalogEntry};
use crate::Result;
use serde::Serialize;

/// A linear map of a nilpotent Lie algebra from the catalog, acting as a
/// left-invariant map. Point dynamics are not modeled; the tangent map is
/// the same matrix everywhere.
#[derive(Debug, Clone, Serialize)]
pub struct Nilmanifold {
    pub catalog: String,
    pub description: String,
    pub map: RMatrix,
    pub j: RMatrix,
    /// The map commutes with `J` and `J` is integrable.
    pub is_holomorphic: bool,
    dims: BlockDims,
    #[serde(skip)]
    entry: CatalogEntry,
}

impl Nilmanifold {
    pub fn from_catalog(name: &str) -> Result<Self> {
        let entry = load(name)?;
        let map = entry.map.to_f64();
        let j = match entry.algebra.complex_structure() {
            Some(j) => j.to_f64(),
            None => complex_structure(map.nrows() / 2),
        };
        let integrable = match entry.algebra.complex_structure() {
            Some(_) => entry.algebra.nijenhuis_support()?.is_empty(),
            None => false,
        };
        let commutes = entry.algebra.automorphism_check(&entry.map)?.commutes_with_j;
        let (s, c, u) = hyperbolic_splitting(&entry.algebra, &entry.map)?.spectral.dims();
        Ok(Self {
            catalog: entry.name.clone(),
            description: entry.description.clone(),
            map,
            j,
            is_holomorphic: integrable && commutes,
            dims: BlockDims { stable: s, center: c, unstable: u },
            entry,
        })
    }

    pub fn entry(&self) -> &CatalogEntry {
        &self.entry
    }

    pub fn block_dims(&self) -> BlockDims {
        self.dims
    }
}
