//! Discretized Helgason-Fourier analysis on the truncated ball.

mod band;
mod plan;
mod sinch;

use num_complex::Complex64;

pub use band::{BandSpace, DEFAULT_CONCENTRATION};
pub use plan::HftPlan;
pub use sinch::{ConvolutionProjector, SinchKernel};

use crate::discretization::{Field, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::{rotated_height, Point};

/// The plane wave `Im(k_φ z)^{1/2 + it}`.
pub fn helgason_kernel(t: f64, phi: f64, z: &Point) -> Result<Complex64> {
    let y = rotated_height(phi, z);
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Internal(format!("Im(k_φ z) = {y} at φ = {phi}")));
    }
    Ok(Complex64::from_polar(y.sqrt(), t * y.ln()))
}

/// Pointwise inverse transform `Σ w_k F(t_k, φ_j) Im(k_φ z)^{1/2 + it}` at an arbitrary point.
pub fn evaluate_at(spectrum: &Spectrum, z: &Point) -> Result<Complex64> {
    let sg = spectrum.grid();
    let mut acc = Complex64::default();
    for (idx, c) in spectrum.coefficients().iter().enumerate() {
        if *c == Complex64::default() {
            continue;
        }
        let k = idx / sg.n_phi();
        acc += c * helgason_kernel(sg.t()[k], sg.phi()[idx % sg.n_phi()], z)? * sg.node_weight(k);
    }
    Ok(acc)
}

/// A spectral radius `ω` that fits under the grid cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandLimit {
    omega: f64,
}

impl BandLimit {
    pub fn new(omega: f64, cap: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Config(format!("band limit ω = {omega} must be positive")));
        }
        if omega > cap {
            return Err(Error::Config(format!("band limit ω = {omega} exceeds the spectral cap T = {cap}")));
        }
        Ok(Self { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Requires `T ≥ 2ω`, the headroom the experiments assume.
    pub fn check_headroom(&self, cap: f64) -> Result<()> {
        if cap < 2.0 * self.omega {
            return Err(Error::Config(format!("spectral cap T = {cap} is below 2ω = {}", 2.0 * self.omega)));
        }
        Ok(())
    }

    /// `(ω² + 1/4)^σ`, the Bernstein constant.
    pub fn bernstein_constant(&self, sigma: f64) -> f64 {
        (self.omega * self.omega + 0.25).powf(sigma)
    }
}

/// Multiplies by `(−(t² + 1/4))^σ` for integer `σ`, and by `(t² + 1/4)^σ` otherwise.
pub fn spectral_laplacian(spectrum: &Spectrum, sigma: f64) -> Spectrum {
    let integer = sigma.fract() == 0.0;
    spectrum.map_by_t(|t| {
        let base = t * t + 0.25;
        if integer {
            let sign = if (sigma as i64).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            Complex64::new(sign * base.powi(sigma as i32), 0.0)
        } else {
            Complex64::new(base.powf(sigma), 0.0)
        }
    })
}

/// Zeroes every coefficient with `t > ω`.
pub fn mask_band(spectrum: &Spectrum, band: BandLimit) -> Spectrum {
    let omega = band.omega();
    spectrum.map_by_t(|t| Complex64::new(if t <= omega { 1.0 } else { 0.0 }, 0.0))
}

/// Band-limiting projection in spectral form: forward transform, mask, inverse transform.
///
/// On a truncated ball this operator is only approximately idempotent; the exact
/// orthogonal projector onto the discrete band space is [`BandSpace::project`].
pub fn project_bandlimit(plan: &HftPlan, f: &Field, band: BandLimit) -> Result<Field> {
    plan.inverse(&mask_band(&plan.forward(f)?, band))
}

/// Spectral Sobolev norm `‖(1/4 + t²)^{σ/2} F‖`.
pub fn sobolev_norm(spectrum: &Spectrum, sigma: f64) -> f64 {
    spectrum.map_by_t(|t| Complex64::new((t * t + 0.25).powf(0.5 * sigma), 0.0)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `‖Δ^σ f‖ ≤ (ω² + 1/4)^σ ‖f‖` with both norms taken through the Plancherel
/// identity from the coefficients `f̂` that define `f` on the whole plane.
pub fn bernstein_check(spectrum: &Spectrum, band: BandLimit, sigma: f64) -> BernsteinReport {
    let lhs = spectral_laplacian(spectrum, sigma).norm();
    let rhs = band.bernstein_constant(sigma) * spectrum.norm();
    BernsteinReport { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-6) }
}
