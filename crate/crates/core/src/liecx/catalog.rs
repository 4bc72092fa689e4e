use super::algebra::StructureAlgebra;
use super::rational::{parse_rational, QMatrix, Rational};
use crate::{Error, Result};
use serde_json::Value;

/// An algebra together with the endomorphism shipped alongside it.
/// Matrices are stored by rows: entry `(i, j)` is the coefficient of `eᵢ`
/// in the image of `eⱼ`.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub algebra: StructureAlgebra,
    pub map: QMatrix,
}

const SHIPPED: &[(&str, &str)] = &[
    ("h3_complex", include_str!("../../data/h3_complex.json")),
    ("h5_plus_center", include_str!("../../data/h5_plus_center.json")),
];

pub fn catalog_names() -> Vec<&'static str> {
    SHIPPED.iter().map(|(n, _)| *n).collect()
}

pub fn load(name: &str) -> Result<CatalogEntry> {
    let text = SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Catalog(format!("no algebra named {name:?}")))?;
    parse_entry(text)
}

fn parse_matrix(v: &Value, dim: usize, what: &str) -> Result<QMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Catalog(format!("{what} must be an array of rows")))?;
    let parsed = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Catalog(format!("{what} row is not an array")))?
                .iter()
                .map(parse_rational)
                .collect::<Result<Vec<Rational>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m = QMatrix::from_rows(&parsed)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Catalog(format!("{what} is not {dim}×{dim}")));
    }
    Ok(m)
}

/// Parses `{dim, brackets: [[i, j, [coeffs]]], J: rows, f: rows}`.
pub fn parse_entry(text: &str) -> Result<CatalogEntry> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
    let dim = v["dim"]
        .as_u64()
        .ok_or_else(|| Error::Catalog("missing dim".into()))? as usize;
    let brackets = v["brackets"]
        .as_array()
        .ok_or_else(|| Error::Catalog("missing brackets".into()))?
        .iter()
        .map(|b| {
            let idx = |k: usize| {
                b[k].as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Catalog(format!("bracket entry {b} lacks index {k}")))
            };
            let coeffs = b[2]
                .as_array()
                .ok_or_else(|| Error::Catalog(format!("bracket entry {b} lacks coefficients")))?
                .iter()
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            Ok((idx(0)?, idx(1)?, coeffs))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut algebra = StructureAlgebra::new(dim, &brackets)?;
    if !v["J"].is_null() {
        algebra = algebra.with_complex_structure(parse_matrix(&v["J"], dim, "J")?)?;
    }
    let map = parse_matrix(&v["f"], dim, "f")?;
    Ok(CatalogEntry {
        name: v["name"].as_str().unwrap_or("unnamed").to_string(),
        description: v["description"].as_str().unwrap_or("").to_string(),
        algebra,
        map,
    })
}
