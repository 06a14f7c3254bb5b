//! Closed-form densities and Stieltjes transforms on the Marchenko-Pastur
//! support `[a, b] = [(1 - sqrt(alpha))^2, (1 + sqrt(alpha))^2]`.
//!
//! Stieltjes transforms use the convention `m(z) = int dmu(x) / (x - z)`, so
//! `m(x + i0) = PV + i pi rho(x)` and the density is `(1/pi) Im m(x + i0)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{CompensatedSum, GaussLegendre};

/// Default Gauss-Legendre order for the arcsine-substituted quadrature.
pub const QUADRATURE_ORDER: usize = 256;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")))
    }
}

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Stieltjes transform needs Im z > 0, got {z}"
        )))
    }
}

/// Support endpoints `(a, b)`.
pub fn mp_edges(alpha: f64) -> (f64, f64) {
    let r = alpha.sqrt();
    ((1.0 - r).powi(2), (1.0 + r).powi(2))
}

/// `sqrt((z - a)(z - b))` as the product of principal roots.
///
/// The branch cut is exactly `[a, b]`, the value behaves like `z` at
/// infinity, and it has positive imaginary part on the upper half-plane.
pub fn sqrt_discriminant(z: Complex64, alpha: f64) -> Complex64 {
    let (a, b) = mp_edges(alpha);
    (z - a).sqrt() * (z - b).sqrt()
}

/// Continuous part of the Marchenko-Pastur density.
pub fn mp_density(x: f64, alpha: f64) -> f64 {
    let (a, b) = mp_edges(alpha);
    if x <= a || x >= b {
        return 0.0;
    }
    ((b - x) * (x - a)).sqrt() / (2.0 * PI * x)
}

/// Mass of the atom at zero, `max(0, 1 - alpha)`.
pub fn mp_atom(alpha: f64) -> f64 {
    (1.0 - alpha).max(0.0)
}

/// `S(z) = (alpha - z - 1 + sqrt((z-a)(z-b))) / (2z)` without the domain check.
pub fn mp_stieltjes_continued(z: Complex64, alpha: f64) -> Complex64 {
    (alpha - z - 1.0 + sqrt_discriminant(z, alpha)) / (2.0 * z)
}

/// Stieltjes transform of the Marchenko-Pastur law on the upper half-plane.
pub fn mp_stieltjes(z: Complex64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_upper(z)?;
    Ok(mp_stieltjes_continued(z, alpha))
}

/// Density of the first-order correction measure:
/// `(x^2 - 2x(alpha+1) + alpha^2 + 1) / (2 alpha pi sqrt((b-x)(x-a)))` on `(a, b)`.
pub fn perturb_density(x: f64, alpha: f64) -> f64 {
    let (a, b) = mp_edges(alpha);
    if x <= a || x >= b {
        return 0.0;
    }
    perturb_numerator(x, alpha) / (2.0 * alpha * PI * ((b - x) * (x - a)).sqrt())
}

fn perturb_numerator<T>(x: T, alpha: f64) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T> + std::ops::Add<f64, Output = T>,
{
    x * x - x * (2.0 * (alpha + 1.0)) + (alpha * alpha + 1.0)
}

/// `S1(z) = -(z^2 - 2z(alpha+1) + alpha^2 + 1) / (2 alpha sqrt((z-a)(z-b))) + (z - alpha - 1)/(2 alpha)`,
/// analytic off the cut `[a, b]`. Used for contour integrals.
pub fn perturb_stieltjes_continued(z: Complex64, alpha: f64) -> Complex64 {
    let num = perturb_numerator(z, alpha);
    -num / (2.0 * alpha * sqrt_discriminant(z, alpha)) + (z - alpha - 1.0) / (2.0 * alpha)
}

/// Stieltjes transform of the correction measure on the upper half-plane.
pub fn perturb_stieltjes(z: Complex64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_upper(z)?;
    Ok(perturb_stieltjes_continued(z, alpha))
}

/// An evaluable (possibly signed) density on `[a, b]` with an optional atom at 0.
pub trait DensityModel {
    fn alpha(&self) -> f64;

    fn support(&self) -> (f64, f64) {
        mp_edges(self.alpha())
    }

    /// Mass of the atom at zero (not part of [`DensityModel::density`]).
    fn atom_at_zero(&self) -> f64;

    fn density(&self, x: f64) -> f64;

    fn stieltjes(&self, z: Complex64) -> Result<Complex64>;

    /// `density(x(theta)) * x'(theta)` for `x(theta) = mid + half * sin(theta)`,
    /// computed without forming `sqrt((b-x)(x-a))`, so endpoint singularities
    /// of the density cancel analytically.
    fn arcsine_kernel(&self, theta: f64) -> f64;
}

/// Marchenko-Pastur law with aspect ratio `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarchenkoPastur {
    pub alpha: f64,
}

/// Signed, mass-zero first-order correction measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub alpha: f64,
}

/// `mu_alpha + (1/c) mu_alpha^(1)`: the first-order approximation of the
/// Bernoulli limit law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrder {
    pub alpha: f64,
    pub c: f64,
}

impl MarchenkoPastur {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }
}

impl Perturbation {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }
}

impl FirstOrder {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        Ok(Self { alpha, c })
    }
}

fn arcsine_map(alpha: f64, theta: f64) -> (f64, f64, f64) {
    let (a, b) = mp_edges(alpha);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (mid + half * theta.sin(), half, theta.cos())
}

impl DensityModel for MarchenkoPastur {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn atom_at_zero(&self) -> f64 {
        mp_atom(self.alpha)
    }

    fn density(&self, x: f64) -> f64 {
        mp_density(x, self.alpha)
    }

    fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        mp_stieltjes(z, self.alpha)
    }

    fn arcsine_kernel(&self, theta: f64) -> f64 {
        // sqrt((b-x)(x-a)) = half * cos(theta), dx = half * cos(theta) dtheta.
        let (x, half, cos) = arcsine_map(self.alpha, theta);
        (half * cos).powi(2) / (2.0 * PI * x)
    }
}

impl DensityModel for Perturbation {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn atom_at_zero(&self) -> f64 {
        0.0
    }

    fn density(&self, x: f64) -> f64 {
        perturb_density(x, self.alpha)
    }

    fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        perturb_stieltjes(z, self.alpha)
    }

    fn arcsine_kernel(&self, theta: f64) -> f64 {
        let (x, _, _) = arcsine_map(self.alpha, theta);
        perturb_numerator(x, self.alpha) / (2.0 * self.alpha * PI)
    }
}

impl DensityModel for FirstOrder {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn atom_at_zero(&self) -> f64 {
        mp_atom(self.alpha)
    }

    fn density(&self, x: f64) -> f64 {
        mp_density(x, self.alpha) + perturb_density(x, self.alpha) / self.c
    }

    fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        Ok(mp_stieltjes(z, self.alpha)? + perturb_stieltjes(z, self.alpha)? / self.c)
    }

    fn arcsine_kernel(&self, theta: f64) -> f64 {
        MarchenkoPastur { alpha: self.alpha }.arcsine_kernel(theta)
            + Perturbation { alpha: self.alpha }.arcsine_kernel(theta) / self.c
    }
}

/// `int_a^b f(x) density(x) dx` (the atom at zero is excluded), via the
/// substitution `x = mid + half * sin(theta)` and Gauss-Legendre in `theta`.
pub fn signed_quadrature(f: impl Fn(f64) -> f64, model: &dyn DensityModel) -> Result<f64> {
    signed_quadrature_with(&GaussLegendre::new(QUADRATURE_ORDER), f, model)
}

/// [`signed_quadrature`] with a caller-supplied rule.
pub fn signed_quadrature_with(
    rule: &GaussLegendre,
    f: impl Fn(f64) -> f64,
    model: &dyn DensityModel,
) -> Result<f64> {
    let (a, b) = model.support();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let h = 0.5 * PI;
    let mut acc = CompensatedSum::default();
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let theta = h * t;
        let x = mid + half * theta.sin();
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Numeric(format!("integrand is not finite at x = {x}")));
        }
        acc.add(w * fx * model.arcsine_kernel(theta));
    }
    Ok(h * acc.value())
}

/// `int x^k dmu` over the continuous part, for `k = 0..=kmax`.
pub fn continuous_moments(model: &dyn DensityModel, kmax: usize) -> Result<Vec<f64>> {
    let rule = GaussLegendre::new(QUADRATURE_ORDER);
    (0..=kmax)
        .map(|k| signed_quadrature_with(&rule, |x| x.powi(k as i32), model))
        .collect()
}
