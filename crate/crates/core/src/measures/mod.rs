//! Empirical measures on the example systems and the heat semigroup on flat
//! torus fibers.

mod heat;
mod hybrid;
mod particles;

pub use heat::{heat_step, limit_average_check, DecayReport, FiberDensity, ALIASING_LEVEL, CUTOFF, MOLLIFIER_TIME};
pub use hybrid::{center_growth_statistics, mu_t, FiberSlice, GrowthStatistics, HybridMeasure};
pub use particles::{
    gibbs_u_estimate, panel_integrals, panel_names, panel_values, torus_coordinates, GibbsEstimate, PanelEstimate,
    ParticleMeasure, MASS_TOL, PANEL_SIZE,
};
