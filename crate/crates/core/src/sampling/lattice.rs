use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{polar_distance, PolarIndex};
use crate::discretization::SpatialGrid;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::gauss_legendre;

/// Loose multiplicity constant `12² e³` valid for `r ≤ 1`.
pub fn multiplicity_bound() -> f64 {
    144.0 * 3f64.exp()
}

#[derive(Debug, Clone, Copy)]
pub struct LatticeOptions {
    /// Candidate spacing as a fraction of `r`.
    pub candidate_spacing: f64,
    /// Probe density relative to the grid, per axis.
    pub probe_refinement: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self { candidate_spacing: 1.0 / 6.0, probe_refinement: 4 }
    }
}

/// A metric lattice: `r/2`-separated centers whose `r/2`-balls cover the probe set.
#[derive(Debug, Clone)]
pub struct Lattice {
    r: f64,
    domain_radius: f64,
    centers: Vec<Point>,
    polar: Vec<(f64, f64)>,
    separation: f64,
    covering: f64,
    multiplicity: usize,
}

impl Lattice {
    /// Wraps precomputed centers and measures their properties against `probes`.
    pub fn from_centers(r: f64, domain_radius: f64, centers: Vec<Point>, probes: &[(f64, f64)]) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Generation("lattice has no centers".into()));
        }
        let polar: Vec<(f64, f64)> = centers.iter().map(|z| z.to_polar()).collect();
        let index = build_index(&polar, r, domain_radius);
        let (separation, covering, multiplicity) = measure(&index, &polar, probes, r);
        Ok(Self { r, domain_radius, centers, polar, separation, covering, multiplicity })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    /// Radius of the ball the lattice was generated in.
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }
    pub fn centers(&self) -> &[Point] {
        &self.centers
    }
    /// Centers in geodesic polar coordinates about `i`.
    pub fn polar(&self) -> &[(f64, f64)] {
        &self.polar
    }
    pub fn len(&self) -> usize {
        self.centers.len()
    }
    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
    /// Smallest pairwise distance (infinite for a single center).
    pub fn separation(&self) -> f64 {
        self.separation
    }
    /// Largest probe-to-nearest-center distance.
    pub fn covering(&self) -> f64 {
        self.covering
    }
    /// Largest number of balls `B(x_j, r)` containing one probe.
    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// A neighbour index over the centers with buckets sized for queries of radius `~h`.
    pub fn index(&self, h: f64) -> PolarIndex {
        build_index(&self.polar, h, self.domain_radius)
    }
}

fn build_index(polar: &[(f64, f64)], h: f64, max_rho: f64) -> PolarIndex {
    let reach = polar.iter().map(|p| p.0).fold(max_rho, f64::max);
    let mut index = PolarIndex::new(h, reach);
    for &(r, t) in polar {
        index.insert(r, t);
    }
    index
}

fn measure(index: &PolarIndex, polar: &[(f64, f64)], probes: &[(f64, f64)], r: f64) -> (f64, f64, usize) {
    let separation = polar
        .par_iter()
        .enumerate()
        .map(|(i, &(rho, theta))| {
            let mut best = f64::INFINITY;
            index.for_each_within(rho, theta, r, |j, v| {
                if j != i {
                    best = best.min(2.0 * v.sqrt().asinh());
                }
            });
            if best.is_infinite() && polar.len() > 1 {
                // No neighbour within r: fall back to a scan.
                best = polar
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &(r2, t2))| polar_distance(rho, theta, r2, t2))
                    .fold(f64::INFINITY, f64::min);
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    let (covering, multiplicity) = probes
        .par_iter()
        .map(|&(rho, theta)| {
            let mut count = 0usize;
            let mut best = f64::INFINITY;
            index.for_each_within(rho, theta, r, |_, v| {
                count += 1;
                best = best.min(v);
            });
            let nearest = if best.is_finite() {
                2.0 * best.sqrt().asinh()
            } else {
                polar.iter().map(|&(r2, t2)| polar_distance(rho, theta, r2, t2)).fold(f64::INFINITY, f64::min)
            };
            (nearest, count)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    (separation, covering, multiplicity)
}

/// The verification probe set: a polar grid `k` times denser than `grid` along each
/// axis, restricted to radii up to the grid's outer ring.
pub fn probe_set(grid: &SpatialGrid, refinement: usize) -> Result<Vec<(f64, f64)>> {
    let n_rho = refinement * grid.n_rho();
    let n_theta = refinement * grid.n_theta();
    let rule = gauss_legendre(n_rho, 0.0, grid.radius())?;
    let outer = grid.outer_ring();
    let mut out = Vec::with_capacity(n_rho * n_theta);
    for &rho in rule.nodes.iter().filter(|&&r| r <= outer) {
        for j in 0..n_theta {
            out.push((rho, 2.0 * PI * j as f64 / n_theta as f64));
        }
    }
    Ok(out)
}

/// Greedy random maximal `r/2`-packing of the ball out to the grid's outer ring.
///
/// Candidates are a jittered ring-by-ring fill with spacing `r · candidate_spacing` in
/// seeded random order, then the probe set, then the grid nodes. A candidate is
/// accepted when no accepted center lies at distance `< r/2`. One pass is maximal: a
/// rejected candidate can never become acceptable later. Every probe and every grid
/// node is a candidate, so each ends within `r/2` of some center. Probes and nodes go
/// last so that centers do not line up with the grid.
pub fn generate_lattice(grid: &SpatialGrid, r: f64, seed: u64) -> Result<Lattice> {
    generate_lattice_with(grid, r, seed, LatticeOptions::default())
}

pub fn generate_lattice_with(grid: &SpatialGrid, r: f64, seed: u64, options: LatticeOptions) -> Result<Lattice> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Config(format!("lattice spacing r = {r} must lie in (0, 1]")));
    }
    let domain = grid.outer_ring();
    let probes = probe_set(grid, options.probe_refinement)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Jittered fill: candidates on exact rings would give every center on a ring the
    // same radial offset from the grid rings, a coherent error that does not average out.
    let delta = r * options.candidate_spacing;
    let n_rings = (domain / delta).ceil() as usize;
    let mut candidates: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for k in 0..n_rings {
        let mid = ((k as f64 + 0.5) * delta).min(domain);
        let count = (2.0 * PI * mid.sinh() / delta).ceil().max(1.0) as usize;
        for m in 0..count {
            let rho = ((k as f64 + rng.random_range(0.0..1.0)) * delta).min(domain);
            let theta = 2.0 * PI * (m as f64 + rng.random_range(0.0..1.0)) / count as f64;
            candidates.push((rho, theta));
        }
    }
    candidates.shuffle(&mut rng);
    let mut tail = probes.clone();
    tail.shuffle(&mut rng);
    candidates.extend(tail);
    let mut nodes: Vec<(f64, f64)> = (0..grid.len()).map(|i| grid.polar(i)).collect();
    nodes.shuffle(&mut rng);
    candidates.extend(nodes);

    let half = 0.5 * r;
    let mut index = PolarIndex::new(half, domain);
    let mut polar = Vec::new();
    for (rho, theta) in candidates {
        if !index.any_within(rho, theta, half) {
            index.insert(rho, theta);
            polar.push((rho, theta));
        }
    }
    let centers: Vec<Point> = polar.iter().map(|&(rho, theta)| Point::from_polar(rho, theta)).collect();
    let (separation, covering, multiplicity) = measure(&build_index(&polar, r, domain), &polar, &probes, r);
    if covering > half * (1.0 + 1e-12) {
        return Err(Error::Generation(format!(
            "covering radius {covering:.6} exceeds r/2 = {half:.6}; the candidate set is too sparse"
        )));
    }
    Ok(Lattice { r, domain_radius: domain, centers, polar, separation, covering, multiplicity })
}
