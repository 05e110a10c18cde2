//! Gauss-Legendre rules and the zonal spherical function.

use std::f64::consts::{PI, SQRT_2};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Number of nodes used by [`spherical_function`].
pub const SPHERICAL_NODES: usize = 160;

/// A Gauss-Legendre rule mapped to `[a, b]`, nodes in increasing order.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Rule> {
    let degree = NonZeroUsize::new(n).ok_or_else(|| Error::Config("quadrature needs at least one node".into()))?;
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::Domain(format!("invalid quadrature interval [{a}, {b}]")));
    }
    let rule = GaussLegendre::new(degree);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Ok(Rule {
        nodes: pairs.iter().map(|&(x, _)| mid + half * x).collect(),
        weights: pairs.iter().map(|&(_, w)| half * w).collect(),
    })
}

/// Unit-interval rule used by the spherical function, built once.
fn mehler_rule() -> &'static Rule {
    use std::sync::OnceLock;
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(SPHERICAL_NODES, 0.0, 1.0).expect("valid rule"))
}

/// The zonal spherical function `φ_t(ρ) = P_{−1/2+it}(cosh ρ)`.
///
/// Evaluated from the Mehler-Dirichlet integral
/// `(√2/π) ∫₀^ρ cos(tu) / sqrt(cosh ρ − cosh u) du` after the substitution
/// `u = ρ(1 − s²)`, which removes the endpoint singularity. The difference of
/// hyperbolic cosines is formed as a product of sines to avoid cancellation.
pub fn spherical_function(t: f64, rho: f64) -> f64 {
    spherical_functions(&[t], rho)[0]
}

/// [`spherical_function`] for several `t` at one radius, sharing the radial work.
pub fn spherical_functions(ts: &[f64], rho: f64) -> Vec<f64> {
    let rho = rho.abs();
    if rho < 1e-12 {
        return vec![1.0; ts.len()];
    }
    let rule = mehler_rule();
    let mut u = Vec::with_capacity(rule.nodes.len());
    let mut g = Vec::with_capacity(rule.nodes.len());
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let ui = rho * (1.0 - s * s);
        let den = (2.0 * (0.5 * (rho + ui)).sinh() * (0.5 * rho * s * s).sinh()).sqrt();
        u.push(ui);
        g.push(w * 2.0 * rho * s / den);
    }
    ts.iter().map(|&t| SQRT_2 / PI * u.iter().zip(&g).map(|(&ui, &gi)| gi * (t * ui).cos()).sum::<f64>()).collect()
}

/// The defining angular average `(2π)⁻¹ ∫ (cosh ρ − sinh ρ cos θ)^{−(1/2+it)} dθ`
/// by the `n`-point trapezoid rule.
///
/// Spectrally accurate while `n` resolves the `e^{−ρ}`-wide peak of the integrand;
/// it loses accuracy quickly beyond `ρ ≈ ln(n) − 1`.
pub fn spherical_function_trapezoid(t: f64, rho: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    for m in 0..n {
        let theta = 2.0 * PI * m as f64 / n as f64;
        let base = (-rho).exp() + 2.0 * rho.sinh() * (0.5 * theta).sin().powi(2);
        let l = base.ln();
        // Real part of exp(−(1/2 + it) l); the imaginary parts cancel by symmetry.
        acc += (-0.5 * l).exp() * (t * l).cos();
    }
    acc / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre(10, 0.0, 2.0).unwrap();
        assert_relative_eq!(rule.integrate(|x| x.powi(19)), 2f64.powi(20) / 20.0, max_relative = 1e-13);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn spherical_function_at_origin_is_one() {
        for &t in &[0.0, 0.5, 3.0] {
            assert_eq!(spherical_function(t, 0.0), 1.0);
            assert_relative_eq!(spherical_function(t, 1e-6), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn spherical_function_reference_value() {
        // P_{-1/2+i}(cosh 2), evaluated with an arbitrary-precision library.
        assert_relative_eq!(spherical_function(1.0, 2.0), 0.19728188, epsilon = 1e-7);
    }

    #[test]
    fn spherical_function_is_even_in_t() {
        for &(t, rho) in &[(0.7, 1.0), (2.5, 4.0)] {
            assert_eq!(spherical_function(t, rho), spherical_function(-t, rho));
        }
    }

    #[test]
    fn mehler_matches_trapezoid_where_trapezoid_is_accurate() {
        for &rho in &[0.1, 0.8, 2.0, 3.5] {
            for &t in &[0.0, 0.4, 1.0, 2.7] {
                let a = spherical_function(t, rho);
                let b = spherical_function_trapezoid(t, rho, 4096);
                assert!((a - b).abs() < 1e-10, "t={t} rho={rho}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn trapezoid_256_degrades_at_large_radius() {
        let a = spherical_function(0.5, 6.0);
        let b = spherical_function_trapezoid(0.5, 6.0, 256);
        assert!((a - b).abs() > 1e-6 * a.abs());
    }

    #[test]
    fn t_zero_large_radius_asymptotics() {
        // φ_0(ρ) = (2/π) sech(ρ/2) K(tanh(ρ/2)) ~ (2/π) e^{−ρ/2} (ρ + 2 ln 2).
        let rho = 12.0;
        let approx = 2.0 / PI * (rho + 2.0 * 2f64.ln()) * (-0.5 * rho).exp();
        let exact = spherical_function(0.0, rho);
        assert!((exact / approx - 1.0).abs() < 1e-3, "{exact} vs {approx}");
    }
}
