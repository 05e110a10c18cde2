use std::f64::consts::PI;

use super::wrap_angle;

/// A bucket grid in geodesic polar coordinates for fixed-radius neighbour queries.
///
/// Rings have width `h`; ring `k` is split into roughly `2π sinh(ρ_k)/h` angular
/// buckets so every bucket has diameter about `h`.
#[derive(Debug, Clone)]
pub struct PolarIndex {
    h: f64,
    /// Per ring: number of angular buckets and the buckets themselves.
    rings: Vec<(usize, Vec<Vec<u32>>)>,
    rho: Vec<f64>,
    theta: Vec<f64>,
    sinh_rho: Vec<f64>,
}

impl PolarIndex {
    /// An empty index covering radii up to `max_rho`.
    pub fn new(h: f64, max_rho: f64) -> Self {
        let n_rings = (max_rho / h).floor() as usize + 1;
        let rings = (0..n_rings)
            .map(|k| {
                let outer = (k + 1) as f64 * h;
                let n = ((2.0 * PI * outer.sinh() / h).floor() as usize).max(1);
                (n, vec![Vec::new(); n])
            })
            .collect();
        Self { h, rings, rho: Vec::new(), theta: Vec::new(), sinh_rho: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn polar(&self, id: usize) -> (f64, f64) {
        (self.rho[id], self.theta[id])
    }

    fn ring_of(&self, rho: f64) -> usize {
        ((rho / self.h).floor() as usize).min(self.rings.len() - 1)
    }

    fn bucket_of(n: usize, theta: f64) -> usize {
        ((theta / (2.0 * PI) * n as f64).floor() as usize).min(n - 1)
    }

    /// Inserts a point and returns its id.
    pub fn insert(&mut self, rho: f64, theta: f64) -> usize {
        let theta = wrap_angle(theta);
        let id = self.rho.len();
        let k = self.ring_of(rho);
        let (n, buckets) = &mut self.rings[k];
        buckets[Self::bucket_of(*n, theta)].push(id as u32);
        self.rho.push(rho);
        self.theta.push(theta);
        self.sinh_rho.push(rho.sinh());
        id
    }

    /// Calls `visit(id, sinh²(d/2))` for every stored point with `d < radius`.
    pub fn for_each_within(&self, rho: f64, theta: f64, radius: f64, mut visit: impl FnMut(usize, f64)) {
        let limit = (0.5 * radius).sinh().powi(2);
        let sinh_q = rho.sinh();
        let lo = self.ring_of((rho - radius).max(0.0));
        let hi = self.ring_of(rho + radius);
        for k in lo..=hi {
            let (n, buckets) = &self.rings[k];
            let inner = k as f64 * self.h;
            // Points on this ring are at least `inner` from i, which bounds the angular
            // offset that can still lie within `radius`.
            let denom = (sinh_q * inner.sinh()).sqrt();
            let half_window = if denom > 0.0 { (0.5 * radius).sinh() / denom } else { f64::INFINITY };
            let window = if half_window >= 1.0 { PI } else { 2.0 * half_window.asin() };
            let width = 2.0 * PI / *n as f64;
            let span = ((window / width).ceil() as usize + 1).min(*n);
            let centre = Self::bucket_of(*n, wrap_angle(theta));
            let buckets_to_scan = (2 * span + 1).min(*n);
            for off in 0..buckets_to_scan {
                let b = (centre + *n + off - span.min(*n)) % *n;
                for &id in &buckets[b] {
                    let id = id as usize;
                    let a = (0.5 * (rho - self.rho[id])).sinh();
                    let s = (0.5 * (theta - self.theta[id])).sin();
                    let v = a * a + sinh_q * self.sinh_rho[id] * s * s;
                    if v < limit {
                        visit(id, v);
                    }
                }
            }
        }
    }

    /// Whether any stored point lies at distance `< radius`.
    pub fn any_within(&self, rho: f64, theta: f64, radius: f64) -> bool {
        let mut found = false;
        // Early exit is not worth a separate traversal at these bucket sizes.
        self.for_each_within(rho, theta, radius, |_, _| found = true);
        found
    }

    /// Distance to the nearest stored point, if one lies within `radius`.
    pub fn nearest_within(&self, rho: f64, theta: f64, radius: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.for_each_within(rho, theta, radius, |id, v| {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((id, v));
            }
        });
        best.map(|(id, v)| (id, 2.0 * v.sqrt().asinh()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::polar_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut index = PolarIndex::new(0.2, 5.0);
        let pts: Vec<(f64, f64)> =
            (0..3000).map(|_| (rng.random_range(0.0..5.0), rng.random_range(0.0..2.0 * PI))).collect();
        for &(r, t) in &pts {
            index.insert(r, t);
        }
        for _ in 0..200 {
            let (r, t) = (rng.random_range(0.0..5.0), rng.random_range(0.0..2.0 * PI));
            let radius = rng.random_range(0.05..0.8);
            let mut got = Vec::new();
            index.for_each_within(r, t, radius, |id, _| got.push(id));
            got.sort();
            let expected: Vec<usize> = pts
                .iter()
                .enumerate()
                .filter(|(_, &(r2, t2))| polar_distance(r, t, r2, t2) < radius)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(got, expected, "query ({r}, {t}) radius {radius}");
        }
    }
}
