//! Quadrature grids on the truncated ball `B(i, R)` and on the spectral domain,
//! together with the sampled functions that live on them.
//!
//! Spatial nodes are geodesic-polar points `(ρ_a, θ_j)` about `i` with Gauss-Legendre
//! radii and uniform angles `θ_j = 2πj/n_θ`; node `(a, j)` is stored at `a·n_θ + j`.
//! Spectral nodes are `(t_k, φ_j)` with Gauss-Legendre `t_k ∈ [0, T]` and
//! `φ_j = 2π(j+1)/n_φ ∈ (0, 2π]`; node `(k, j)` is stored at `k·n_φ + j`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::gauss_legendre;

pub const MIN_RESOLUTION: usize = 8;

/// Forward and inverse FFT plans of one length, shareable across threads.
#[derive(Clone)]
pub struct FftPair {
    pub len: usize,
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }
}

impl fmt::Debug for FftPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FftPair({})", self.len)
    }
}

/// Signed frequency of FFT bin `idx` for transform length `n`.
pub fn signed_frequency(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// FFT bin holding frequency `q` for transform length `n`.
pub fn frequency_bin(q: i64, n: usize) -> usize {
    q.rem_euclid(n as i64) as usize
}

#[derive(Debug)]
pub struct SpatialGrid {
    radius: f64,
    n_rho: usize,
    n_theta: usize,
    rho: Vec<f64>,
    ring_weights: Vec<f64>,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    fft: FftPair,
}

impl PartialEq for SpatialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.n_rho == other.n_rho && self.n_theta == other.n_theta
    }
}

/// Geodesic-polar grid over `B(i, R)`; node weight `sinh ρ · w_ρ · 2π/n_θ`.
pub fn build_spatial_grid(radius: f64, n_rho: usize, n_theta: usize) -> Result<Arc<SpatialGrid>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Config(format!("truncation radius R = {radius} must be positive")));
    }
    if n_rho < MIN_RESOLUTION || n_theta < MIN_RESOLUTION {
        return Err(Error::Config(format!(
            "spatial resolution ({n_rho}, {n_theta}) below minimum {MIN_RESOLUTION}"
        )));
    }
    let rule = gauss_legendre(n_rho, 0.0, radius)?;
    let rho = rule.nodes;
    let ring_weights: Vec<f64> = rho.iter().zip(&rule.weights).map(|(r, w)| r.sinh() * w).collect();
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_rho * n_theta);
    let mut weights = Vec::with_capacity(n_rho * n_theta);
    for (&r, &w) in rho.iter().zip(&ring_weights) {
        for j in 0..n_theta {
            nodes.push(Point::from_polar(r, dtheta * j as f64));
            weights.push(w * dtheta);
        }
    }
    Ok(Arc::new(SpatialGrid { radius, n_rho, n_theta, rho, ring_weights, nodes, weights, fft: FftPair::new(n_theta) }))
}

impl SpatialGrid {
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn n_rho(&self) -> usize {
        self.n_rho
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Ring radii `ρ_a`, increasing.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }
    /// Radial weights `sinh(ρ_a) w_a` (without the angular factor).
    pub fn ring_weights(&self) -> &[f64] {
        &self.ring_weights
    }
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }
    /// Radius of the outermost ring; the grid carries no information beyond it.
    pub fn outer_ring(&self) -> f64 {
        *self.rho.last().expect("non-empty grid")
    }
    pub fn polar(&self, idx: usize) -> (f64, f64) {
        (self.rho[idx / self.n_theta], self.theta(idx % self.n_theta))
    }
    pub fn fft(&self) -> &FftPair {
        &self.fft
    }
    /// Nodes at least `margin` away from the truncation boundary.
    pub fn interior_mask(&self, margin: f64) -> Vec<bool> {
        let limit = self.radius - margin;
        self.rho.iter().flat_map(|&r| std::iter::repeat_n(r <= limit, self.n_theta)).collect()
    }
}

#[derive(Debug)]
pub struct SpectralGrid {
    cap: f64,
    n_t: usize,
    n_phi: usize,
    split: Option<f64>,
    t: Vec<f64>,
    t_weights: Vec<f64>,
    plancherel: Vec<f64>,
    phi: Vec<f64>,
    fft: FftPair,
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.cap == other.cap && self.n_t == other.n_t && self.n_phi == other.n_phi && self.split == other.split
    }
}

/// Plancherel density `(8π²)⁻¹ t tanh(πt)` for one sign of `t`.
pub fn plancherel_density(t: f64) -> f64 {
    t * (PI * t).tanh() / (8.0 * PI * PI)
}

/// Gauss-Legendre nodes on `[0, T]`; the weights are doubled to account for `t < 0`.
pub fn build_spectral_grid(cap: f64, n_t: usize, n_phi: usize) -> Result<Arc<SpectralGrid>> {
    build_spectral_grid_split(cap, n_t, n_phi, None)
}

/// Like [`build_spectral_grid`], optionally with a composite rule that has a panel
/// boundary at `split` (typically the band limit `ω`).
///
/// Sums over `t ≤ ω` are then Gauss rules of their own, so masking the spectrum at `ω`
/// introduces no quadrature error from the discontinuity. Nodes are shared between the
/// panels in proportion to their lengths.
pub fn build_spectral_grid_split(cap: f64, n_t: usize, n_phi: usize, split: Option<f64>) -> Result<Arc<SpectralGrid>> {
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(Error::Config(format!("spectral cap T = {cap} must be positive")));
    }
    if n_t < MIN_RESOLUTION || n_phi < MIN_RESOLUTION {
        return Err(Error::Config(format!("spectral resolution ({n_t}, {n_phi}) below minimum {MIN_RESOLUTION}")));
    }
    let (t, t_weights, split) = match split {
        Some(s) if s > 0.0 && s < cap => {
            let n_lo = ((n_t as f64 * s / cap).round() as usize).clamp(1, n_t - 1);
            let lo = gauss_legendre(n_lo, 0.0, s)?;
            let hi = gauss_legendre(n_t - n_lo, s, cap)?;
            let t = lo.nodes.iter().chain(&hi.nodes).copied().collect::<Vec<_>>();
            let w = lo.weights.iter().chain(&hi.weights).copied().collect::<Vec<_>>();
            (t, w, Some(s))
        }
        Some(s) if s != cap => return Err(Error::Config(format!("panel split {s} outside (0, {cap})"))),
        _ => {
            let rule = gauss_legendre(n_t, 0.0, cap)?;
            (rule.nodes, rule.weights, None)
        }
    };
    let plancherel = t.iter().zip(&t_weights).map(|(&t, &w)| 2.0 * w * plancherel_density(t)).collect();
    let phi = (0..n_phi).map(|j| 2.0 * PI * (j + 1) as f64 / n_phi as f64).collect();
    Ok(Arc::new(SpectralGrid {
        cap,
        n_t,
        n_phi,
        split,
        t,
        t_weights,
        plancherel,
        phi,
        fft: FftPair::new(n_phi),
    }))
}

impl SpectralGrid {
    pub fn cap(&self) -> f64 {
        self.cap
    }
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    /// Panel boundary of a composite rule, if any.
    pub fn split(&self) -> Option<f64> {
        self.split
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn len(&self) -> usize {
        self.n_t * self.n_phi
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn t(&self) -> &[f64] {
        &self.t
    }
    /// Raw Gauss-Legendre weights in `t`.
    pub fn t_weights(&self) -> &[f64] {
        &self.t_weights
    }
    /// Folded Plancherel weight per `t` node, before the angular factor `2π/n_φ`.
    pub fn plancherel(&self) -> &[f64] {
        &self.plancherel
    }
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
    /// Full weight of node `(k, j)`.
    pub fn node_weight(&self, k: usize) -> f64 {
        self.plancherel[k] * 2.0 * PI / self.n_phi as f64
    }
    pub fn fft(&self) -> &FftPair {
        &self.fft
    }
}

fn same_grid<G: PartialEq>(a: &Arc<G>, b: &Arc<G>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Complex samples on a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<SpatialGrid>,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::default(); n] }
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(&Point) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::Shape("fields live on different spatial grids".into()))
        }
    }

    /// `⟨f, h⟩ = Σ wᵢ fᵢ conj(hᵢ)`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).zip(self.grid.weights()).map(|((a, b), w)| a * b.conj() * w).sum())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm restricted to nodes where `mask` is set.
    pub fn masked_norm(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|((v, w), _)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(Field { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    /// Angular Fourier coefficients per ring, `f_q(ρ_a) = n_θ⁻¹ Σ_j f(ρ_a, θ_j) e^{−iqθ_j}`,
    /// laid out like the values with `q` in FFT bin order.
    pub fn ring_harmonics(&self) -> Vec<Complex64> {
        let n = self.grid.n_theta;
        let mut out = self.values.clone();
        let fft = &self.grid.fft.forward;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for ring in out.chunks_exact_mut(n) {
            fft.process_with_scratch(ring, &mut scratch);
        }
        let s = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Inverse of [`Field::ring_harmonics`].
    pub fn from_ring_harmonics(grid: Arc<SpatialGrid>, mut harmonics: Vec<Complex64>) -> Result<Self> {
        if harmonics.len() != grid.len() {
            return Err(Error::Shape("harmonic table does not match the grid".into()));
        }
        let n = grid.n_theta;
        let fft = &grid.fft.inverse;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for ring in harmonics.chunks_exact_mut(n) {
            fft.process_with_scratch(ring, &mut scratch);
        }
        Ok(Self { grid, values: harmonics })
    }
}

pub fn field_norm(f: &Field) -> f64 {
    f.norm()
}

pub fn field_inner(f: &Field, h: &Field) -> Result<Complex64> {
    f.inner(h)
}

/// Helgason-Fourier coefficients on a [`SpectralGrid`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<SpectralGrid>,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Arc<SpectralGrid>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for a spectral grid of {} nodes",
                coefficients.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let n = grid.len();
        Self { grid, coefficients: vec![Complex64::default(); n] }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn check_same_grid(&self, other: &Spectrum) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::Shape("spectra live on different spectral grids".into()))
        }
    }

    fn weighted_sum(&self, mut term: impl FnMut(usize, usize) -> f64) -> f64 {
        let n_phi = self.grid.n_phi;
        (0..self.grid.n_t).map(|k| self.grid.node_weight(k) * (0..n_phi).map(|j| term(k, j)).sum::<f64>()).sum()
    }

    /// Plancherel norm `sqrt(Σ w_{t,φ} |F(t,φ)|²)`.
    pub fn norm(&self) -> f64 {
        let n_phi = self.grid.n_phi;
        self.weighted_sum(|k, j| self.coefficients[k * n_phi + j].norm_sqr()).sqrt()
    }

    pub fn inner(&self, other: &Spectrum) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let n_phi = self.grid.n_phi;
        let mut acc = Complex64::default();
        for k in 0..self.grid.n_t {
            let w = self.grid.node_weight(k);
            for j in 0..n_phi {
                let i = k * n_phi + j;
                acc += w * self.coefficients[i] * other.coefficients[i].conj();
            }
        }
        Ok(acc)
    }

    /// Norm of the part with `t > omega`.
    pub fn out_of_band_norm(&self, omega: f64) -> f64 {
        let n_phi = self.grid.n_phi;
        let t = &self.grid.t;
        self.weighted_sum(|k, j| if t[k] > omega { self.coefficients[k * n_phi + j].norm_sqr() } else { 0.0 }).sqrt()
    }

    pub fn map_by_t(&self, mut multiplier: impl FnMut(f64) -> Complex64) -> Spectrum {
        let n_phi = self.grid.n_phi;
        let mut coefficients = self.coefficients.clone();
        for (k, &t) in self.grid.t.iter().enumerate() {
            let m = multiplier(t);
            coefficients[k * n_phi..(k + 1) * n_phi].iter_mut().for_each(|c| *c *= m);
        }
        Spectrum { grid: self.grid.clone(), coefficients }
    }

    pub fn sub(&self, other: &Spectrum) -> Result<Spectrum> {
        self.check_same_grid(other)?;
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a - b).collect();
        Ok(Spectrum { grid: self.grid.clone(), coefficients })
    }

    /// Angular harmonics per `t` row, `F_q(t) = n_φ⁻¹ Σ_j F(t, φ_j) e^{−iqφ_j}`, FFT bin order.
    pub fn angular_harmonics(&self) -> Vec<Complex64> {
        let n = self.grid.n_phi;
        let mut out = self.coefficients.clone();
        let fft = &self.grid.fft.forward;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let phases: Vec<Complex64> = (0..n)
            .map(|b| Complex64::from_polar(1.0 / n as f64, -2.0 * PI * signed_frequency(b, n) as f64 / n as f64))
            .collect();
        for row in out.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
            row.iter_mut().zip(&phases).for_each(|(v, p)| *v *= p);
        }
        out
    }

    /// Inverse of [`Spectrum::angular_harmonics`].
    pub fn from_angular_harmonics(grid: Arc<SpectralGrid>, mut harmonics: Vec<Complex64>) -> Result<Self> {
        if harmonics.len() != grid.len() {
            return Err(Error::Shape("harmonic table does not match the spectral grid".into()));
        }
        let n = grid.n_phi;
        let fft = &grid.fft.inverse;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let phases: Vec<Complex64> =
            (0..n).map(|b| Complex64::from_polar(1.0, 2.0 * PI * signed_frequency(b, n) as f64 / n as f64)).collect();
        for row in harmonics.chunks_exact_mut(n) {
            row.iter_mut().zip(&phases).for_each(|(v, p)| *v *= p);
            fft.process_with_scratch(row, &mut scratch);
        }
        Ok(Self { grid, coefficients: harmonics })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ball_volume, hyperbolic_distance};
    use crate::quadrature::gauss_legendre;
    use approx::assert_relative_eq;

    #[test]
    fn weights_integrate_constant_to_ball_volume() {
        let g = build_spatial_grid(4.0, 200, 256).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert_relative_eq!(total, ball_volume(4.0).unwrap(), max_relative = 1e-8);
        let tiny = build_spatial_grid(1e-6, 8, 8).unwrap();
        assert!(tiny.weights().iter().sum::<f64>() < 1e-11);
    }

    #[test]
    fn nodes_stay_inside_the_ball() {
        let g = build_spatial_grid(3.0, 16, 32).unwrap();
        assert!(g.nodes().iter().all(|z| hyperbolic_distance(z, &Point::I) <= 3.0 + 1e-12));
    }

    #[test]
    fn radial_gaussian_matches_one_dimensional_oracle() {
        let g = build_spatial_grid(6.0, 200, 256).unwrap();
        let f = Field::from_fn(g.clone(), |z| Complex64::new((-hyperbolic_distance(z, &Point::I).powi(2)).exp(), 0.0));
        let grid_integral: f64 = f.values().iter().zip(g.weights()).map(|(v, w)| v.re * w).sum();
        let oracle = 2.0 * PI * gauss_legendre(400, 0.0, 6.0).unwrap().integrate(|r| (-r * r).exp() * r.sinh());
        assert_relative_eq!(grid_integral, oracle, max_relative = 1e-6);
    }

    #[test]
    fn rejects_coarse_resolutions() {
        assert!(matches!(build_spatial_grid(4.0, 7, 64), Err(Error::Config(_))));
        assert!(matches!(build_spatial_grid(0.0, 64, 64), Err(Error::Config(_))));
        assert!(matches!(build_spectral_grid(4.0, 64, 4), Err(Error::Config(_))));
    }

    #[test]
    fn spectral_weights() {
        assert_eq!(plancherel_density(0.0), 0.0);
        assert_relative_eq!(plancherel_density(1.0), 0.0126179, epsilon = 1e-7);
        let sg = build_spectral_grid(2.0, 64, 16).unwrap();
        assert!(sg.plancherel().iter().all(|&w| w >= 0.0));
        let grid_value: f64 = sg.t().iter().zip(sg.t_weights()).map(|(t, w)| w * t * (PI * t).tanh()).sum();
        // Independent oracle: composite Simpson rule on a very fine mesh.
        let n = 200_000;
        let h = 2.0 / n as f64;
        let f = |t: f64| t * (PI * t).tanh();
        let simpson: f64 = (0..n / 2)
            .map(|i| {
                let a = 2.0 * i as f64 * h;
                h / 3.0 * (f(a) + 4.0 * f(a + h) + f(a + 2.0 * h))
            })
            .sum();
        assert_relative_eq!(grid_value, simpson, max_relative = 1e-10);
        assert!(sg.phi().iter().all(|&p| p > 0.0 && p <= 2.0 * PI + 1e-15));
    }

    #[test]
    fn field_norm_examples() {
        let g = build_spatial_grid(2.0, 32, 32).unwrap();
        assert_eq!(Field::zeros(g.clone()).norm(), 0.0);
        let one = Field::from_fn(g.clone(), |_| Complex64::new(1.0, 0.0));
        assert_relative_eq!(one.norm(), ball_volume(2.0).unwrap().sqrt(), max_relative = 1e-10);
        let f = Field::from_fn(g.clone(), |z| Complex64::new(z.x(), z.y()));
        assert_eq!(f.scale(Complex64::new(2.0, 0.0)).norm(), 2.0 * f.norm());
        let other = Field::zeros(build_spatial_grid(2.0, 32, 16).unwrap());
        assert!(matches!(f.inner(&other), Err(Error::Shape(_))));
    }

    #[test]
    fn harmonic_round_trips() {
        let g = build_spatial_grid(2.0, 8, 16).unwrap();
        let f = Field::from_fn(g.clone(), |z| Complex64::new(z.x().sin(), z.y()));
        let back = Field::from_ring_harmonics(g, f.ring_harmonics()).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let sg = build_spectral_grid(2.0, 8, 16).unwrap();
        let coeffs: Vec<Complex64> = (0..sg.len()).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let s = Spectrum::new(sg.clone(), coeffs).unwrap();
        let h = s.angular_harmonics();
        // A pure harmonic q = 3 is picked out with the node phase convention.
        let pure: Vec<Complex64> = (0..sg.len()).map(|i| Complex64::from_polar(1.0, 3.0 * sg.phi()[i % 16])).collect();
        let ph = Spectrum::new(sg.clone(), pure).unwrap().angular_harmonics();
        assert!((ph[3] - 1.0).norm() < 1e-14 && ph[4].norm() < 1e-14);
        let back = Spectrum::from_angular_harmonics(sg, h).unwrap();
        for (a, b) in s.coefficients().iter().zip(back.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
