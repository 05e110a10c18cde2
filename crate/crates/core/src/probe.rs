//! Reproducible random band-limited test functions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::discretization::{frequency_bin, Field, Spectrum, SpectralGrid};
use crate::error::{Error, Result};
use crate::transform::{BandLimit, BandSpace, HftPlan};

/// Angular harmonics `|q| ≤ MAX_HARMONIC` carry probe energy.
pub const MAX_HARMONIC: i64 = 4;
/// Degree of the random Chebyshev profile in `t`.
pub const PROFILE_DEGREE: usize = 4;

/// A smooth random spectrum supported on `lo ≤ t ≤ hi`.
///
/// Each harmonic `|q| ≤ 4` gets a profile `sin²(π s) · p(s)` in `s = (t − lo)/(hi − lo)`
/// with `p` a Chebyshev series with standard normal complex coefficients. The window
/// vanishes to second order at both ends, so the spectrum is continuous across the
/// band edge.
pub fn windowed_spectrum(grid: &Arc<SpectralGrid>, lo: f64, hi: f64, seed: u64) -> Result<Spectrum> {
    if !(hi > lo) || lo < 0.0 {
        return Err(Error::Config(format!("invalid probe band [{lo}, {hi}]")));
    }
    let n_phi = grid.n_phi();
    let qmax = MAX_HARMONIC.min(((n_phi - 1) / 2) as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![Complex64::default(); grid.len()];
    for q in -qmax..=qmax {
        let coef: Vec<Complex64> = (0..PROFILE_DEGREE)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let bin = frequency_bin(q, n_phi);
        for (k, &t) in grid.t().iter().enumerate() {
            if t < lo || t > hi {
                continue;
            }
            let s = (t - lo) / (hi - lo);
            h[k * n_phi + bin] = (PI * s).sin().powi(2) * chebyshev(&coef, 2.0 * s - 1.0);
        }
    }
    Spectrum::from_angular_harmonics(grid.clone(), h)
}

fn chebyshev(coef: &[Complex64], x: f64) -> Complex64 {
    let (mut t0, mut t1) = (1.0, x);
    let mut acc = Complex64::default();
    for (n, c) in coef.iter().enumerate() {
        let tn = match n {
            0 => 1.0,
            1 => x,
            _ => {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
                t2
            }
        };
        acc += c * tn;
    }
    acc
}

/// Inverse transform of a random spectrum supported in `|t| ≤ ω`.
pub fn masked_probe(plan: &HftPlan, band: BandLimit, seed: u64) -> Result<(Field, Spectrum)> {
    let s = windowed_spectrum(plan.spectral(), 0.0, band.omega(), seed)?;
    Ok((plan.inverse(&s)?, s))
}

/// A masked probe projected onto the band space, with the in-band spectrum that
/// synthesizes the projection.
pub fn band_probe(space: &BandSpace, seed: u64) -> Result<(Field, Spectrum)> {
    let (raw, _) = masked_probe(space.plan(), space.band(), seed)?;
    space.project_with_spectrum(&raw)
}

/// A probe whose spectrum sits in `center ± halfwidth`.
pub fn shifted_probe(plan: &HftPlan, center: f64, halfwidth: f64, seed: u64) -> Result<(Field, Spectrum)> {
    let s = windowed_spectrum(plan.spectral(), center - halfwidth, center + halfwidth, seed)?;
    Ok((plan.inverse(&s)?, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_spectral_grid;

    #[test]
    fn spectrum_is_supported_in_window() {
        let g = build_spectral_grid(4.0, 64, 32).unwrap();
        let s = windowed_spectrum(&g, 0.5, 1.5, 3).unwrap();
        for (k, &t) in g.t().iter().enumerate() {
            let row = &s.coefficients()[k * 32..(k + 1) * 32];
            if !(0.5..=1.5).contains(&t) {
                assert!(row.iter().all(|c| *c == Complex64::default()));
            }
        }
        assert!(s.norm() > 0.0);
        assert_eq!(s.coefficients(), windowed_spectrum(&g, 0.5, 1.5, 3).unwrap().coefficients());
        assert!(windowed_spectrum(&g, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn chebyshev_recurrence() {
        let c: Vec<Complex64> = [0.0, 0.0, 0.0, 1.0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let x: f64 = 0.3;
        assert!((chebyshev(&c, x).re - (4.0 * x.powi(3) - 3.0 * x)).abs() < 1e-15);
    }
}
