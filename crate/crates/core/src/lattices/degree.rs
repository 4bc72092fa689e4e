use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    /// Degree of the determinant bundle: the sum of the summand degrees.
    pub degree: i64,
    /// Only a trivial bundle is compatible with a Kähler total space.
    pub kahler: bool,
}

/// Degree of the determinant of a direct sum of line bundles on a curve.
pub fn det_degree(degrees: &[i64]) -> DegreeReport {
    let degree = degrees.iter().sum();
    DegreeReport {
        degree,
        kahler: degree == 0 && degrees.iter().all(|&d| d == 0),
    }
}

/// Number of fibers with nontrivial stabilizer for the involution that
/// negates `negated` elliptic factors and, optionally, half-translates one
/// further factor.
pub fn involution_fixed_fibers(negated: u32, half_translation_axis: Option<usize>) -> Result<u64> {
    if negated == 0 {
        return match half_translation_axis {
            Some(_) => Ok(0),
            None => Err(Error::NotFreeAndNotIsolated),
        };
    }
    4u64.checked_pow(negated)
        .ok_or_else(|| Error::ContractViolation(format!("{negated} negated factors overflow the count")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degree_examples() {
        assert_eq!(det_degree(&[0, 0]), DegreeReport { degree: 0, kahler: true });
        assert_eq!(det_degree(&[1, 1]), DegreeReport { degree: 2, kahler: false });
        assert_eq!(det_degree(&[1; 6]).degree, 6);
        assert!(!det_degree(&[1, -1]).kahler);
    }

    #[test]
    fn fixed_fiber_examples() {
        assert_eq!(involution_fixed_fibers(2, Some(2)).unwrap(), 16);
        assert_eq!(involution_fixed_fibers(1, Some(1)).unwrap(), 4);
        assert_eq!(involution_fixed_fibers(0, Some(0)).unwrap(), 0);
        assert_eq!(involution_fixed_fibers(0, None), Err(Error::NotFreeAndNotIsolated));
    }

    proptest! {
        #[test]
        fn degree_is_additive(a in proptest::collection::vec(0i64..5, 0..6),
                              b in proptest::collection::vec(0i64..5, 0..6)) {
            let joined: Vec<i64> = a.iter().chain(&b).copied().collect();
            let (da, db, dj) = (det_degree(&a), det_degree(&b), det_degree(&joined));
            prop_assert_eq!(dj.degree, da.degree + db.degree);
            prop_assert_eq!(dj.kahler, da.kahler && db.kahler);
            if dj.degree > 0 { prop_assert!(!dj.kahler); }
        }
    }
}
