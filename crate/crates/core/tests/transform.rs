use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use hyperband_core::discretization::{build_spatial_grid, build_spectral_grid, build_spectral_grid_split, Field, Spectrum};
use hyperband_core::geometry::{hyperbolic_distance, Point};
use hyperband_core::probe::{band_probe, masked_probe};
use hyperband_core::quadrature::{gauss_legendre, spherical_function};
use hyperband_core::transform::{
    bernstein_check, evaluate_at, mask_band, project_bandlimit, BandLimit, BandSpace, HftPlan, SinchKernel,
    DEFAULT_CONCENTRATION,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn default_plan() -> Arc<HftPlan> {
    static PLAN: OnceLock<Arc<HftPlan>> = OnceLock::new();
    PLAN.get_or_init(|| {
        let sp = build_spatial_grid(6.0, 200, 256).unwrap();
        let sg = build_spectral_grid_split(4.0, 128, 256, Some(1.0)).unwrap();
        Arc::new(HftPlan::new(sp, sg).unwrap())
    })
    .clone()
}

fn small_plan() -> HftPlan {
    let sp = build_spatial_grid(1.5, 24, 64).unwrap();
    let sg = build_spectral_grid(3.0, 16, 64).unwrap();
    HftPlan::new(sp, sg).unwrap()
}

fn random_values(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn forward_and_inverse_are_adjoint() {
    let plan = small_plan();
    let sp = plan.spatial().clone();
    let sg = plan.spectral().clone();
    // Smooth inputs so that no energy sits in the dropped Nyquist bins.
    let f = Field::from_fn(sp.clone(), |z| Complex64::new((-z.x() * z.x()).exp(), z.y().ln().sin()));
    let g = plan.inverse(&Spectrum::new(sg.clone(), random_values(sg.len(), 2)).unwrap()).unwrap();
    let big_g = plan.forward(&g).unwrap();
    let lhs = plan.forward(&f).unwrap().inner(&big_g).unwrap();
    let rhs = f.inner(&plan.inverse(&big_g).unwrap()).unwrap();
    assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm(), "{lhs} vs {rhs}");
}

#[test]
fn harmonic_transform_matches_nodal_sums_on_a_small_grid() {
    let plan = small_plan();
    let sp = plan.spatial().clone();
    let f = Field::from_fn(sp, |z| {
        let (rho, theta) = z.to_polar();
        Complex64::from_polar((-rho * rho).exp(), 2.0 * theta) + (-0.5 * rho).exp()
    });
    let fast = plan.forward(&f).unwrap();
    let slow = plan.forward_nodal(&f).unwrap();
    assert!(rel(fast.coefficients(), slow.coefficients()) < 1e-8);

    let spectrum = mask_band(&fast, BandLimit::new(2.0, 3.0).unwrap());
    let fast_inv = plan.inverse(&spectrum).unwrap();
    let slow_inv = plan.inverse_nodal(&spectrum).unwrap();
    assert!(rel(fast_inv.values(), slow_inv.values()) < 1e-8);
}

#[test]
fn radial_field_transform_is_the_spherical_transform() {
    let sp = build_spatial_grid(5.0, 120, 128).unwrap();
    let sg = build_spectral_grid(3.0, 24, 32).unwrap();
    let plan = HftPlan::new(sp.clone(), sg.clone()).unwrap();
    let f = Field::from_fn(sp, |z| Complex64::new((-hyperbolic_distance(z, &Point::I).powi(2)).exp(), 0.0));
    let big_f = plan.forward(&f).unwrap();
    let radial = gauss_legendre(200, 0.0, 5.0).unwrap();
    for (k, &t) in sg.t().iter().enumerate() {
        let oracle = 2.0 * PI * radial.integrate(|r| (-r * r).exp() * spherical_function(t, r) * r.sinh());
        for j in 0..sg.n_phi() {
            let c = big_f.coefficients()[k * sg.n_phi() + j];
            assert!((c.re - oracle).abs() < 1e-8 * oracle.abs().max(1e-3), "t = {t}: {c} vs {oracle}");
            assert!(c.im.abs() < 1e-8);
        }
    }
}

#[test]
fn pointwise_evaluation_matches_the_grid_inverse() {
    let plan = small_plan();
    let (f, spectrum) = masked_probe(&plan, BandLimit::new(1.0, 3.0).unwrap(), 4).unwrap();
    for i in (0..f.grid().len()).step_by(97) {
        let z = f.grid().nodes()[i];
        let direct = evaluate_at(&spectrum, &z).unwrap();
        assert!((direct - f.values()[i]).norm() < 1e-8, "node {i}");
    }
}

#[test]
fn plancherel_identity_for_band_limited_probes() {
    let plan = default_plan();
    let band = BandLimit::new(1.0, 4.0).unwrap();
    let space = BandSpace::new(plan.clone(), band, DEFAULT_CONCENTRATION).unwrap();
    for seed in 0..2 {
        let (f, _) = band_probe(&space, seed).unwrap();
        let lhs = f.norm().powi(2);
        let rhs = plan.forward(&f).unwrap().norm().powi(2);
        assert!((lhs - rhs).abs() / lhs < 1e-2, "seed {seed}: {lhs} vs {rhs}");
    }
}

#[test]
fn band_space_is_orthonormal_and_its_projector_idempotent() {
    let plan = default_plan();
    let band = BandLimit::new(1.0, 4.0).unwrap();
    let space = BandSpace::new(plan.clone(), band, DEFAULT_CONCENTRATION).unwrap();
    assert!(space.dim() > 10);
    assert!(space.eigenvalues().iter().all(|&l| (DEFAULT_CONCENTRATION..1.0 + 1e-9).contains(&l)));
    for k in [0, space.dim() / 2, space.dim() - 1] {
        let mut e = vec![Complex64::default(); space.dim()];
        e[k] = Complex64::new(1.0, 0.0);
        let basis = space.synthesize(&e).unwrap();
        assert!((basis.norm() - 1.0).abs() < 1e-10);
        let back = space.coordinates(&basis).unwrap();
        assert!(rel(&back, &e) < 1e-10);
        let via_spectrum = plan.inverse(&space.synthesis_spectrum(&e).unwrap()).unwrap();
        assert!(rel(via_spectrum.values(), basis.values()) < 1e-10);
    }
    let raw = Field::new(plan.spatial().clone(), random_values(plan.spatial().len(), 8)).unwrap();
    let once = space.project(&raw).unwrap();
    let twice = space.project(&once).unwrap();
    assert!(rel(twice.values(), once.values()) < 1e-12);
    // The residual is orthogonal to the space.
    let residual = raw.sub(&once).unwrap();
    let c = space.coordinates(&residual).unwrap();
    assert!(c.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-10 * raw.norm());
}

#[test]
fn spectral_projector_does_not_amplify() {
    let plan = default_plan();
    let band = BandLimit::new(1.0, 4.0).unwrap();
    let (f, _) = masked_probe(&plan, band, 11).unwrap();
    let p = project_bandlimit(&plan, &f, band).unwrap();
    assert!(p.norm() <= f.norm() * 1.01);
    // Truncation to the ball spreads the spectrum, so some energy is removed.
    assert!(p.norm() > 0.5 * f.norm());
    let noise = Field::new(plan.spatial().clone(), random_values(plan.spatial().len(), 5)).unwrap();
    assert!(project_bandlimit(&plan, &noise, band).unwrap().norm() < 0.2 * noise.norm());
}

#[test]
fn bernstein_holds_on_band_probes_and_fails_above_the_band() {
    let plan = default_plan();
    let band = BandLimit::new(1.0, 4.0).unwrap();
    let space = BandSpace::new(plan.clone(), band, DEFAULT_CONCENTRATION).unwrap();
    let (_, spectrum) = band_probe(&space, 3).unwrap();
    for sigma in [1.0, 2.0] {
        assert!(bernstein_check(&spectrum, band, sigma).pass);
    }
    let (_, high) = hyperband_core::probe::shifted_probe(&plan, 1.5, 0.2, 3).unwrap();
    assert!(!bernstein_check(&high, band, 8.0).pass);
}

#[test]
fn sinch_kernel_matches_inverse_of_the_indicator() {
    let plan = default_plan();
    let band = BandLimit::new(1.0, 4.0).unwrap();
    let kernel = SinchKernel::build(band, 6.0).unwrap();
    // At the origin the kernel is the Plancherel mass of the band.
    let simpson = {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |t: f64| t * (PI * t).tanh() / (2.0 * PI);
        (0..n / 2).map(|i| {
            let a = 2.0 * i as f64 * h;
            h / 3.0 * (f(a) + 4.0 * f(a + h) + f(a + 2.0 * h))
        }).sum::<f64>()
    };
    assert!((kernel.value(0.0) - simpson).abs() < 1e-9, "{} vs {simpson}", kernel.value(0.0));
    assert!(kernel.value(12.5) == 0.0);

    let sg = plan.spectral().clone();
    let indicator = Spectrum::new(
        sg.clone(),
        (0..sg.len()).map(|i| Complex64::new(if sg.t()[i / sg.n_phi()] <= 1.0 { 1.0 } else { 0.0 }, 0.0)).collect(),
    )
    .unwrap();
    let via_transform = plan.inverse(&indicator).unwrap();
    let direct = kernel.to_field(plan.spatial().clone(), &Point::I);
    let interior = plan.spatial().interior_mask(2.0);
    let diff = via_transform.sub(&direct).unwrap().masked_norm(&interior) / direct.masked_norm(&interior);
    assert!(diff < 1e-2, "{diff}");
}
