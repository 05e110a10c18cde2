use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{evaluate_at, helgason_kernel};
use crate::discretization::{frequency_bin, Field, SpatialGrid, Spectrum, SpectralGrid};
use crate::error::{Error, Result};

/// Precomputed forward/inverse Helgason-Fourier transform between a spatial and a
/// spectral grid.
///
/// On a ring of radius `ρ` the plane wave is a function of `φ − θ` only,
/// `h_t(ρ, α) = (cosh ρ − sinh ρ cos α)^{−(1/2+it)}`, with Fourier coefficients
/// `c_q(t, ρ)`. Sampled fields and spectra are treated as trigonometric polynomials in
/// their angle, so the angular integrals reduce to products of harmonics:
///
/// * forward: `F_q(t) = 2π Σ_a W_a f_q(ρ_a) conj(c_q(t, ρ_a))`
/// * inverse: `f_q(ρ_a) = 2π Σ_t P_t F_q(t) c_q(t, ρ_a)`
///
/// where `W_a = sinh(ρ_a) w_a` and `P_t` is the folded Plancherel weight. The two maps
/// are exact adjoints. The coefficients `c_q` come from an FFT of `h_t` oversampled far
/// beyond `n_θ`, since its peak near `α = 0` narrows like `e^{−ρ}`. Harmonics with
/// `|q| > max_harmonic` (including any Nyquist bin) are not represented.
#[derive(Debug)]
pub struct HftPlan {
    spatial: Arc<SpatialGrid>,
    spectral: Arc<SpectralGrid>,
    max_harmonic: usize,
    /// `c_q(t_k, ρ_a)` at `(q·n_t + k)·n_ρ + a` for `q = 0..=max_harmonic`.
    kernel: Vec<Complex64>,
}

/// Oversampling used for the ring FFTs: points per unit of `e^ρ`.
const OVERSAMPLE: f64 = 40.0;

impl HftPlan {
    pub fn new(spatial: Arc<SpatialGrid>, spectral: Arc<SpectralGrid>) -> Result<Self> {
        let n_min = spatial.n_theta().min(spectral.n_phi());
        let n_max = spatial.n_theta().max(spectral.n_phi());
        let max_harmonic = (n_min - 1) / 2;
        let n_q = max_harmonic + 1;
        let n_t = spectral.n_t();
        let n_rho = spatial.n_rho();
        let t = spectral.t().to_vec();

        let rings: Vec<Vec<Complex64>> = spatial
            .rho()
            .par_iter()
            .map(|&rho| {
                let target = (2 * n_max).max((OVERSAMPLE * rho.exp()).ceil() as usize);
                let m = target.next_power_of_two();
                let fft = FftPlanner::new().plan_fft_forward(m);
                let log_base: Vec<f64> = (0..m)
                    .map(|i| {
                        let half = PI * i as f64 / m as f64;
                        ((-rho).exp() + 2.0 * rho.sinh() * half.sin().powi(2)).ln()
                    })
                    .collect();
                let mut out = vec![Complex64::default(); n_t * n_q];
                let mut buf = vec![Complex64::default(); m];
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                for (k, &tk) in t.iter().enumerate() {
                    for (b, &l) in buf.iter_mut().zip(&log_base) {
                        *b = Complex64::from_polar((-0.5 * l).exp(), -tk * l);
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    let s = 1.0 / m as f64;
                    for q in 0..n_q {
                        out[k * n_q + q] = buf[q] * s;
                    }
                }
                out
            })
            .collect();

        let mut kernel = vec![Complex64::default(); n_q * n_t * n_rho];
        for (a, ring) in rings.iter().enumerate() {
            for k in 0..n_t {
                for q in 0..n_q {
                    kernel[(q * n_t + k) * n_rho + a] = ring[k * n_q + q];
                }
            }
        }
        Ok(Self { spatial, spectral, max_harmonic, kernel })
    }

    pub fn spatial(&self) -> &Arc<SpatialGrid> {
        &self.spatial
    }

    pub fn spectral(&self) -> &Arc<SpectralGrid> {
        &self.spectral
    }

    /// Largest `|q|` carried by the transform.
    pub fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    /// The row `c_q(t_k, ·)` over rings.
    pub fn kernel_row(&self, q: i64, k: usize) -> &[Complex64] {
        let n_rho = self.spatial.n_rho();
        let start = (q.unsigned_abs() as usize * self.spectral.n_t() + k) * n_rho;
        &self.kernel[start..start + n_rho]
    }

    pub fn harmonics(&self) -> impl Iterator<Item = i64> + Clone {
        let qmax = self.max_harmonic as i64;
        -qmax..=qmax
    }

    fn check_field(&self, f: &Field) -> Result<()> {
        if **f.grid() != *self.spatial {
            return Err(Error::Shape("field is not on the plan's spatial grid".into()));
        }
        Ok(())
    }

    /// Spectral harmonics from ring harmonics (both in FFT bin order).
    pub fn forward_harmonics(&self, field_harmonics: &[Complex64]) -> Vec<Complex64> {
        let (n_theta, n_phi, n_t) = (self.spatial.n_theta(), self.spectral.n_phi(), self.spectral.n_t());
        let w = self.spatial.ring_weights();
        let columns: Vec<(usize, Vec<Complex64>)> = self
            .harmonics()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|q| {
                let bt = frequency_bin(q, n_theta);
                let fq: Vec<Complex64> =
                    w.iter().enumerate().map(|(a, &wa)| field_harmonics[a * n_theta + bt] * wa).collect();
                let col = (0..n_t)
                    .map(|k| {
                        let row = self.kernel_row(q, k);
                        2.0 * PI * fq.iter().zip(row).map(|(f, c)| f * c.conj()).sum::<Complex64>()
                    })
                    .collect();
                (frequency_bin(q, n_phi), col)
            })
            .collect();
        let mut out = vec![Complex64::default(); n_t * n_phi];
        for (bin, col) in columns {
            for (k, v) in col.into_iter().enumerate() {
                out[k * n_phi + bin] = v;
            }
        }
        out
    }

    /// Ring harmonics from spectral harmonics (both in FFT bin order).
    pub fn inverse_harmonics(&self, spectral_harmonics: &[Complex64]) -> Vec<Complex64> {
        let (n_theta, n_phi, n_t, n_rho) =
            (self.spatial.n_theta(), self.spectral.n_phi(), self.spectral.n_t(), self.spatial.n_rho());
        let p = self.spectral.plancherel();
        let columns: Vec<(usize, Vec<Complex64>)> = self
            .harmonics()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|q| {
                let bp = frequency_bin(q, n_phi);
                let mut col = vec![Complex64::default(); n_rho];
                for k in 0..n_t {
                    let coef = spectral_harmonics[k * n_phi + bp] * (2.0 * PI * p[k]);
                    if coef == Complex64::default() {
                        continue;
                    }
                    for (o, c) in col.iter_mut().zip(self.kernel_row(q, k)) {
                        *o += coef * c;
                    }
                }
                (frequency_bin(q, n_theta), col)
            })
            .collect();
        let mut out = vec![Complex64::default(); n_rho * n_theta];
        for (bin, col) in columns {
            for (a, v) in col.into_iter().enumerate() {
                out[a * n_theta + bin] = v;
            }
        }
        out
    }

    pub fn forward(&self, f: &Field) -> Result<Spectrum> {
        self.check_field(f)?;
        let h = self.forward_harmonics(&f.ring_harmonics());
        Spectrum::from_angular_harmonics(self.spectral.clone(), h)
    }

    pub fn inverse(&self, spectrum: &Spectrum) -> Result<Field> {
        if **spectrum.grid() != *self.spectral {
            return Err(Error::Shape("spectrum is not on the plan's spectral grid".into()));
        }
        let h = self.inverse_harmonics(&spectrum.angular_harmonics());
        Field::from_ring_harmonics(self.spatial.clone(), h)
    }

    /// Literal node-by-node sum `Σᵢ wᵢ f(zᵢ) conj(h(t, φ, zᵢ))`.
    ///
    /// Cost is `O(N_spatial · N_spectral)` and the angular sum aliases once `n_θ`
    /// no longer resolves the kernel peak; use only on small grids as a reference.
    pub fn forward_nodal(&self, f: &Field) -> Result<Spectrum> {
        self.check_field(f)?;
        let sg = &self.spectral;
        let nodes = self.spatial.nodes();
        let weights = self.spatial.weights();
        let coefficients = (0..sg.len())
            .into_par_iter()
            .map(|idx| {
                let (t, phi) = (sg.t()[idx / sg.n_phi()], sg.phi()[idx % sg.n_phi()]);
                let mut acc = Complex64::default();
                for ((z, w), v) in nodes.iter().zip(weights).zip(f.values()) {
                    acc += v * helgason_kernel(t, phi, z)?.conj() * w;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Spectrum::new(sg.clone(), coefficients)
    }

    /// Literal node-by-node inverse sum; see [`HftPlan::forward_nodal`].
    pub fn inverse_nodal(&self, spectrum: &Spectrum) -> Result<Field> {
        if **spectrum.grid() != *self.spectral {
            return Err(Error::Shape("spectrum is not on the plan's spectral grid".into()));
        }
        let values = self.spatial.nodes().par_iter().map(|z| evaluate_at(spectrum, z)).collect::<Result<Vec<_>>>()?;
        Field::new(self.spatial.clone(), values)
    }
}
