//! Points, group elements and invariant metric quantities on the upper half-plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on `ad - bc = 1` accepted without renormalization.
pub const DET_TOLERANCE: f64 = 1e-12;

/// A point `x + iy` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    x: f64,
    y: f64,
}

impl Point {
    /// The point `i`, fixed by every rotation.
    pub const I: Point = Point { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!("non-finite point ({x}, {y})")));
        }
        if y <= 0.0 {
            return Err(Error::Domain(format!("y = {y} is not in the upper half-plane")));
        }
        Ok(Self { x, y })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    /// Geodesic polar coordinates about `i`: the point at distance `rho` from `i`
    /// in direction `theta`.
    ///
    /// The direction convention matches the rotation `k_φ`: the Helgason kernel at
    /// this point satisfies `Im(k_φ z) = 1 / (cosh ρ − sinh ρ cos(φ − θ))`.
    pub fn from_polar(rho: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let denom = rho.cosh() - rho.sinh() * c;
        Self { x: rho.sinh() * s / denom, y: 1.0 / denom }
    }

    /// Inverse of [`Point::from_polar`]; `theta` is returned in `[0, 2π)`.
    pub fn to_polar(&self) -> (f64, f64) {
        let rho = hyperbolic_distance(self, &Point::I);
        let theta = (2.0 * self.x).atan2(self.x * self.x + self.y * self.y - 1.0);
        (rho, theta.rem_euclid(2.0 * PI))
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// An element of `SL(2, R)` acting by fractional linear transformations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl GroupElement {
    /// Builds `[[a, b], [c, d]]`, rescaling by `1/sqrt(det)` when the determinant is
    /// positive but not 1. Non-positive determinants are rejected.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || det <= 0.0 {
            return Err(Error::Domain(format!("determinant {det} cannot be normalized to 1")));
        }
        if (det - 1.0).abs() <= DET_TOLERANCE {
            return Ok(Self { a, b, c, d });
        }
        let s = det.sqrt().recip();
        Ok(Self { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `z ↦ z + b`.
    pub fn translation(b: f64) -> Self {
        Self { a: 1.0, b, c: 0.0, d: 1.0 }
    }

    /// `z ↦ λ z` for `λ > 0`.
    pub fn dilation(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("dilation factor {lambda} must be positive")));
        }
        let s = lambda.sqrt();
        Ok(Self { a: s, b: 0.0, c: 0.0, d: 1.0 / s })
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self · other`; acting with it equals acting with `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn apply(&self, z: &Point) -> Result<Point> {
        mobius_apply(self, z)
    }
}

/// The stabilizer rotation `k_φ`, written with half angles so that `φ ∈ (0, 2π]`
/// runs once around the projective orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    angle: f64,
}

impl Rotation {
    /// The angle is reduced into `(0, 2π]`.
    pub fn new(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::Domain(format!("rotation angle {angle} is not finite")));
        }
        let two_pi = 2.0 * PI;
        let mut reduced = angle.rem_euclid(two_pi);
        if reduced == 0.0 {
            reduced = two_pi;
        }
        Ok(Self { angle: reduced })
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn to_group_element(&self) -> GroupElement {
        let (s, c) = (0.5 * self.angle).sin_cos();
        GroupElement { a: c, b: s, c: -s, d: c }
    }
}

/// `Im(k_φ z)` without forming the matrix: `y / |d − s z|²` with half-angle entries.
pub fn rotated_height(phi: f64, z: &Point) -> f64 {
    let (s, c) = (0.5 * phi).sin_cos();
    let re = c - s * z.x;
    let im = -s * z.y;
    z.y / (re * re + im * im)
}

/// `(az + b) / (cz + d)`.
pub fn mobius_apply(g: &GroupElement, z: &Point) -> Result<Point> {
    let zc = z.as_complex();
    let num = zc * g.a + g.b;
    let den = zc * g.c + g.d;
    let den_norm_sq = den.norm_sqr();
    if den.norm() < 1e-300 || den_norm_sq == 0.0 {
        return Err(Error::NumericRange(format!("|cz + d| = {} underflows", den.norm())));
    }
    // Im((az+b)/(cz+d)) = det · y / |cz+d|²; using it directly keeps y > 0 exact.
    let w = num * den.conj() / den_norm_sq;
    let y = g.determinant() * z.y / den_norm_sq;
    Point::new(w.re, y).map_err(|_| Error::NumericRange(format!("image of {z:?} left the half-plane")))
}

/// Hyperbolic distance for the metric `y⁻²(dx² + dy²)`.
///
/// Uses `2 asinh(|z − w| / (2 sqrt(y_z y_w)))`, which equals the arccosh closed form
/// and stays accurate for nearby points.
pub fn hyperbolic_distance(z: &Point, w: &Point) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (z.y * w.y).sqrt())).asinh()
}

/// Invariant area of a ball of radius `rho`: `2π(cosh ρ − 1)`.
pub fn ball_volume(rho: f64) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("ball radius {rho} must be a finite non-negative number")));
    }
    let s = (0.5 * rho).sinh();
    Ok(4.0 * PI * s * s)
}

/// A reproducible group element `n_x a_λ k_φ` drawn from a bounded region of `SL(2,R)`.
pub fn random_group_element(seed: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: f64 = rng.random_range(-2.0..2.0);
    let log_scale: f64 = rng.random_range(-1.5..1.5);
    let angle: f64 = rng.random_range(0.0..2.0 * PI);
    let n = GroupElement::translation(shift);
    let a = GroupElement::dilation(log_scale.exp()).expect("exp is positive");
    let k = Rotation::new(angle).expect("finite angle").to_group_element();
    let g = n.compose(&a).compose(&k);
    // Products drift off det = 1 by a few ulps; renormalize.
    GroupElement::new(g.a, g.b, g.c, g.d).expect("positive determinant")
}
