use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::BandLimit;
use crate::discretization::{frequency_bin, Field, SpatialGrid};
use crate::error::{Error, Result};
use crate::geometry::{hyperbolic_distance, Point};
use crate::quadrature::{gauss_legendre, spherical_functions};

/// Table intervals per unit of geodesic radius.
const TABLE_DENSITY: f64 = 256.0;
/// Gauss-Legendre nodes for the `t` integral over `[0, ω]`.
const T_NODES: usize = 96;

/// The radial kernel whose transform is the indicator of `|t| ≤ ω`:
/// `sinch_ω(ρ) = (2π)⁻¹ ∫₀^ω φ_t(ρ) t tanh(πt) dt`.
///
/// Tabulated on `[0, 2R]` and multiplied by a cosine taper on `[1.8R, 2R]`.
#[derive(Debug, Clone)]
pub struct SinchKernel {
    band: BandLimit,
    reach: f64,
    step: f64,
    table: Vec<f64>,
}

impl SinchKernel {
    /// Builds the table out to `2 · radius`.
    pub fn build(band: BandLimit, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("kernel radius {radius} must be positive")));
        }
        let reach = 2.0 * radius;
        let intervals = (TABLE_DENSITY * reach).ceil() as usize;
        let step = reach / intervals as f64;
        let rule = gauss_legendre(T_NODES, 0.0, band.omega())?;
        let density: Vec<f64> =
            rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| w * t * (PI * t).tanh() / (2.0 * PI)).collect();
        let table = (0..=intervals)
            .into_par_iter()
            .map(|i| {
                let rho = i as f64 * step;
                let phi = spherical_functions(&rule.nodes, rho);
                let raw: f64 = phi.iter().zip(&density).map(|(p, d)| p * d).sum();
                raw * taper(rho, reach)
            })
            .collect();
        Ok(Self { band, reach, step, table })
    }

    pub fn band(&self) -> BandLimit {
        self.band
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Tabulated `(ρ, value)` pairs.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.table.iter().enumerate().map(|(i, &v)| (i as f64 * self.step, v))
    }

    /// Four-point cubic interpolation in the table; zero beyond the reach.
    pub fn value(&self, rho: f64) -> f64 {
        if rho >= self.reach {
            return 0.0;
        }
        let n = self.table.len();
        let x = rho.abs() / self.step;
        let i = (x.floor() as usize).clamp(1, n - 3);
        let s = x - i as f64;
        let (p0, p1, p2, p3) = (self.table[i - 1], self.table[i], self.table[i + 1], self.table[i + 2]);
        // Lagrange weights at offsets −1, 0, 1, 2.
        let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
    }

    /// The kernel centred at `center`, sampled on a grid.
    pub fn to_field(&self, grid: Arc<SpatialGrid>, center: &Point) -> Field {
        Field::from_fn(grid, |z| Complex64::new(self.value(hyperbolic_distance(z, center)), 0.0))
    }
}

fn taper(rho: f64, reach: f64) -> f64 {
    let start = 0.9 * reach;
    if rho <= start {
        1.0
    } else if rho >= reach {
        0.0
    } else {
        0.5 * (1.0 + (PI * (rho - start) / (reach - start)).cos())
    }
}

/// Band-limiting by direct convolution `∫ f(w) sinch_ω(d(z, w)) dμ(w)`.
///
/// For a radial kernel the convolution is diagonal in the angular harmonics: between
/// rings `a` and `b` it acts through `K_q(a, b) = (2π)⁻¹ ∫ sinch(d(ρ_a, ρ_b, α)) e^{−iqα} dα`,
/// which is computed once per ring pair with an oversampled FFT.
#[derive(Debug, Clone)]
pub struct ConvolutionProjector {
    grid: Arc<SpatialGrid>,
    max_harmonic: usize,
    /// `K_q(a, b)` at `(q·n_ρ + a)·n_ρ + b`; real and even in `q`.
    kernel: Vec<f64>,
}

impl ConvolutionProjector {
    pub fn new(kernel: &SinchKernel, grid: Arc<SpatialGrid>) -> Result<Self> {
        if kernel.reach() < 2.0 * grid.radius() - 1e-12 {
            return Err(Error::Config("sinch table does not reach across the grid".into()));
        }
        let n_rho = grid.n_rho();
        let n_theta = grid.n_theta();
        let max_harmonic = (n_theta - 1) / 2;
        let n_q = max_harmonic + 1;
        let rho = grid.rho().to_vec();
        let pairs: Vec<(usize, usize)> = (0..n_rho).flat_map(|a| (a..n_rho).map(move |b| (a, b))).collect();
        let rows: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let (ra, rb) = (rho[a], rho[b]);
                let target = (2 * n_theta).max((32.0 * (0.5 * (ra + rb)).exp()).ceil() as usize);
                let m = target.next_power_of_two();
                let fft = FftPlanner::new().plan_fft_forward(m);
                let base = (0.5 * (ra - rb)).sinh().powi(2);
                let cross = ra.sinh() * rb.sinh();
                let mut buf: Vec<Complex64> = (0..m)
                    .map(|i| {
                        let half = PI * i as f64 / m as f64;
                        let s2 = base + cross * half.sin().powi(2);
                        Complex64::new(kernel.value(2.0 * s2.sqrt().asinh()), 0.0)
                    })
                    .collect();
                fft.process(&mut buf);
                (0..n_q).map(|q| buf[q].re / m as f64).collect()
            })
            .collect();
        let mut table = vec![0.0; n_q * n_rho * n_rho];
        for (&(a, b), row) in pairs.iter().zip(&rows) {
            for q in 0..n_q {
                table[(q * n_rho + a) * n_rho + b] = row[q];
                table[(q * n_rho + b) * n_rho + a] = row[q];
            }
        }
        Ok(Self { grid, max_harmonic, kernel: table })
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if **f.grid() != *self.grid {
            return Err(Error::Shape("field is not on the convolution grid".into()));
        }
        let n_rho = self.grid.n_rho();
        let n_theta = self.grid.n_theta();
        let w = self.grid.ring_weights();
        let h = f.ring_harmonics();
        let qmax = self.max_harmonic as i64;
        let cols: Vec<(usize, Vec<Complex64>)> = (-qmax..=qmax)
            .into_par_iter()
            .map(|q| {
                let bin = frequency_bin(q, n_theta);
                let src: Vec<Complex64> = (0..n_rho).map(|b| h[b * n_theta + bin] * (2.0 * PI * w[b])).collect();
                let base = q.unsigned_abs() as usize * n_rho * n_rho;
                let col = (0..n_rho)
                    .map(|a| {
                        let row = &self.kernel[base + a * n_rho..base + (a + 1) * n_rho];
                        row.iter().zip(&src).map(|(k, s)| s * *k).sum()
                    })
                    .collect();
                (bin, col)
            })
            .collect();
        let mut out = vec![Complex64::default(); n_rho * n_theta];
        for (bin, col) in cols {
            for (a, v) in col.into_iter().enumerate() {
                out[a * n_theta + bin] = v;
            }
        }
        Field::from_ring_harmonics(self.grid.clone(), out)
    }
}
