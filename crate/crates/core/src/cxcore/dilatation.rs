use super::C64;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const CIRCLE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DilatationEstimate {
    /// Ratio at the finest radius.
    pub value: f64,
    pub per_radius: Vec<(f64, f64)>,
    /// `dK/dr` between the two finest radii (zero for a single radius).
    pub richardson_slope: f64,
    /// Linear extrapolation of the ratio to radius zero.
    pub extrapolated: f64,
}

/// Ratio of largest to smallest image displacement over circles of the given
/// decreasing radii around `center`.
pub fn dilatation<F>(germ: F, center: C64, radii: &[f64]) -> Result<DilatationEstimate>
where
    F: Fn(C64) -> C64,
{
    if radii.is_empty() {
        return Err(Error::ContractViolation("at least one radius is required".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ContractViolation(format!(
            "radii must be positive and strictly decreasing, got {radii:?}"
        )));
    }
    let origin = germ(center);
    let mut per_radius = Vec::with_capacity(radii.len());
    for &r in radii {
        let images: Vec<C64> = (0..CIRCLE_SAMPLES)
            .map(|j| germ(center + C64::from_polar(r, 2.0 * PI * j as f64 / CIRCLE_SAMPLES as f64)))
            .collect();
        let d: Vec<f64> = images.iter().map(|w| (w - origin).norm()).collect();
        let max = d.iter().fold(0.0f64, |a, &b| a.max(b));
        let min = d.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if !max.is_finite() || !(min > 0.0) {
            return Err(Error::DistortionUndefined(format!(
                "image of the circle of radius {r} meets the image of the center"
            )));
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if (images[i] - images[j]).norm() <= 1e-14 * max {
                    return Err(Error::DistortionUndefined(format!(
                        "germ is not injective on the circle of radius {r}"
                    )));
                }
            }
        }
        per_radius.push((r, max / min));
    }
    let (r_n, k_n) = per_radius[per_radius.len() - 1];
    let slope = if per_radius.len() >= 2 {
        let (r_p, k_p) = per_radius[per_radius.len() - 2];
        (k_p - k_n) / (r_p - r_n)
    } else {
        0.0
    };
    Ok(DilatationEstimate {
        value: k_n,
        per_radius,
        richardson_slope: slope,
        extrapolated: (k_n - slope * r_n).max(1.0),
    })
}
