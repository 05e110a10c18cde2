use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{BandLimit, HftPlan};
use crate::discretization::{frequency_bin, Field, Spectrum};
use crate::error::{Error, Result};

/// One angular harmonic's share of the band space.
#[derive(Debug, Clone)]
struct Block {
    q: i64,
    eigenvalues: Vec<f64>,
    /// Ring profiles of the unit-norm basis functions, `n_ρ × m`.
    spatial: DMatrix<Complex64>,
    /// Their defining spectral harmonics over the in-band `t` nodes, `n_in × m`.
    spectral: DMatrix<Complex64>,
}

/// The discrete band space `E_ω` on the truncated ball.
///
/// A band-limited function synthesized from coefficients `F(t, φ)`, `t ≤ ω`, keeps only
/// a fraction `λ` of its energy inside `B(i, R)`. Per harmonic, `λ` ranges over the
/// eigenvalues of the concentration operator
/// `G_q = (2π)² P^{1/2} C_qᴴ W C_q P^{1/2}` on the in-band nodes. Functions with
/// `λ` near zero are numerically invisible on the grid, so the space is spanned by the
/// eigenfunctions with `λ ≥ threshold`. [`BandSpace::project`] is the exact orthogonal
/// projector onto that span in the grid inner product.
#[derive(Debug, Clone)]
pub struct BandSpace {
    plan: Arc<HftPlan>,
    band: BandLimit,
    threshold: f64,
    in_band: Vec<usize>,
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

pub const DEFAULT_CONCENTRATION: f64 = 0.5;

impl BandSpace {
    pub fn new(plan: Arc<HftPlan>, band: BandLimit, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Config(format!("concentration threshold {threshold} must lie in (0, 1)")));
        }
        if band.omega() > plan.spectral().cap() {
            return Err(Error::Config("band limit exceeds the spectral cap".into()));
        }
        let sg = plan.spectral().clone();
        let in_band: Vec<usize> = (0..sg.n_t()).filter(|&k| sg.t()[k] <= band.omega()).collect();
        if in_band.is_empty() {
            return Err(Error::Config(format!("no spectral nodes with t ≤ {}", band.omega())));
        }
        let w = plan.spatial().ring_weights().to_vec();
        let n_rho = w.len();
        let sqrt_p: Vec<f64> = in_band.iter().map(|&k| sg.plancherel()[k].sqrt()).collect();
        let n_in = in_band.len();

        let qs: Vec<i64> = plan.harmonics().collect();
        let blocks: Vec<Block> = qs
            .into_par_iter()
            .filter_map(|q| {
                // Columns 2π C_q P^{1/2}: ring profile of each in-band node.
                let c = DMatrix::from_fn(n_rho, n_in, |a, i| plan.kernel_row(q, in_band[i])[a] * (2.0 * PI * sqrt_p[i]));
                let wc = DMatrix::from_fn(n_rho, n_in, |a, i| c[(a, i)] * w[a]);
                let gram = c.adjoint() * &wc;
                let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
                let eig = gram.symmetric_eigen();
                let mut order: Vec<usize> = (0..n_in).filter(|&i| eig.eigenvalues[i] >= threshold).collect();
                if order.is_empty() {
                    return None;
                }
                order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
                let m = order.len();
                let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let mut spatial = DMatrix::zeros(n_rho, m);
                let mut spectral = DMatrix::zeros(n_in, m);
                for (col, &i) in order.iter().enumerate() {
                    let u = eig.eigenvectors.column(i);
                    let scale = 1.0 / (2.0 * PI * eigenvalues[col]).sqrt();
                    spatial.set_column(col, &((&c * u) * Complex64::new(scale, 0.0)));
                    let s = DVector::from_fn(n_in, |r, _| u[r] * (scale / sqrt_p[r]));
                    spectral.set_column(col, &s);
                }
                Some(Block { q, eigenvalues, spatial, spectral })
            })
            .collect();
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.eigenvalues.len());
        }
        Ok(Self { plan, band, threshold, in_band, blocks, offsets })
    }

    pub fn plan(&self) -> &Arc<HftPlan> {
        &self.plan
    }
    pub fn band(&self) -> BandLimit {
        self.band
    }
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Concentration eigenvalues of the basis, grouped by harmonic.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect()
    }

    /// Angular harmonic of each basis function.
    pub fn basis_harmonics(&self) -> Vec<i64> {
        self.blocks.iter().flat_map(|b| std::iter::repeat_n(b.q, b.eigenvalues.len())).collect()
    }

    fn check(&self, f: &Field) -> Result<()> {
        if **f.grid() != **self.plan.spatial() {
            return Err(Error::Shape("field is not on the band space grid".into()));
        }
        Ok(())
    }

    /// Coordinates `⟨f, e_k⟩` from ring harmonics.
    pub fn coordinates_from_harmonics(&self, harmonics: &[Complex64]) -> Vec<Complex64> {
        let n_theta = self.plan.spatial().n_theta();
        let w = self.plan.spatial().ring_weights();
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            let bin = frequency_bin(b.q, n_theta);
            for col in b.spatial.column_iter() {
                let s: Complex64 =
                    col.iter().enumerate().map(|(a, e)| harmonics[a * n_theta + bin] * e.conj() * w[a]).sum();
                out.push(s * (2.0 * PI));
            }
        }
        out
    }

    /// Coordinates `⟨f, e_k⟩` in the orthonormal basis.
    pub fn coordinates(&self, f: &Field) -> Result<Vec<Complex64>> {
        self.check(f)?;
        Ok(self.coordinates_from_harmonics(&f.ring_harmonics()))
    }

    /// Ring harmonics of `Σ_k x_k e_k`.
    pub fn harmonics_from_coordinates(&self, x: &[Complex64]) -> Vec<Complex64> {
        let sp = self.plan.spatial();
        let n_theta = sp.n_theta();
        let mut out = vec![Complex64::default(); sp.len()];
        for (b, off) in self.blocks.iter().zip(&self.offsets) {
            let bin = frequency_bin(b.q, n_theta);
            for (c, col) in b.spatial.column_iter().enumerate() {
                let xc = x[off + c];
                for (a, e) in col.iter().enumerate() {
                    out[a * n_theta + bin] += xc * e;
                }
            }
        }
        out
    }

    pub fn synthesize(&self, x: &[Complex64]) -> Result<Field> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!("{} coordinates for a space of dimension {}", x.len(), self.dim())));
        }
        Field::from_ring_harmonics(self.plan.spatial().clone(), self.harmonics_from_coordinates(x))
    }

    /// The in-band coefficients whose inverse transform is `Σ_k x_k e_k`.
    pub fn synthesis_spectrum(&self, x: &[Complex64]) -> Result<Spectrum> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!("{} coordinates for a space of dimension {}", x.len(), self.dim())));
        }
        let sg = self.plan.spectral();
        let n_phi = sg.n_phi();
        let mut h = vec![Complex64::default(); sg.len()];
        for (b, off) in self.blocks.iter().zip(&self.offsets) {
            let bin = frequency_bin(b.q, n_phi);
            for (c, col) in b.spectral.column_iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    h[self.in_band[i] * n_phi + bin] += x[off + c] * v;
                }
            }
        }
        Spectrum::from_angular_harmonics(sg.clone(), h)
    }

    /// Orthogonal projection onto the band space.
    pub fn project(&self, f: &Field) -> Result<Field> {
        let x = self.coordinates(f)?;
        self.synthesize(&x)
    }

    /// Projection together with the in-band spectrum that synthesizes it.
    pub fn project_with_spectrum(&self, f: &Field) -> Result<(Field, Spectrum)> {
        let x = self.coordinates(f)?;
        Ok((self.synthesize(&x)?, self.synthesis_spectrum(&x)?))
    }
}
