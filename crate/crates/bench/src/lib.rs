//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use hyperband_core::discretization::{build_spatial_grid, build_spectral_grid_split};
use hyperband_core::transform::{BandLimit, BandSpace, HftPlan, DEFAULT_CONCENTRATION};
use hyperband_core::Result;

/// Grid sizes for one benchmark scale.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub radius: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    pub cap: f64,
    pub n_t: usize,
    pub n_phi: usize,
    pub omega: f64,
}

pub const SMALL: Scale = Scale { radius: 4.0, n_rho: 64, n_theta: 64, cap: 4.0, n_t: 48, n_phi: 64, omega: 1.0 };
pub const DEFAULT: Scale = Scale { radius: 6.0, n_rho: 200, n_theta: 256, cap: 4.0, n_t: 128, n_phi: 256, omega: 1.0 };

pub fn plan(s: Scale) -> Result<Arc<HftPlan>> {
    let sp = build_spatial_grid(s.radius, s.n_rho, s.n_theta)?;
    let sg = build_spectral_grid_split(s.cap, s.n_t, s.n_phi, Some(s.omega))?;
    Ok(Arc::new(HftPlan::new(sp, sg)?))
}

pub fn band_space(s: Scale) -> Result<Arc<BandSpace>> {
    let band = BandLimit::new(s.omega, s.cap)?;
    Ok(Arc::new(BandSpace::new(plan(s)?, band, DEFAULT_CONCENTRATION)?))
}
