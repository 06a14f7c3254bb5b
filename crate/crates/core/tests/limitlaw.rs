use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wishart_core::limitlaw::*;
use wishart_core::treewords::{count_table, DEFAULT_GUARD};

#[test]
fn contour_words_generate_the_mp_series() {
    let s = mp_series(DEFAULT_GUARD as usize);
    for k in 1..=DEFAULT_GUARD {
        let t = count_table(k, DEFAULT_GUARD).unwrap();
        assert_eq!(t.alpha_polynomial(|key| key.all_twos()), s.a[k as usize], "k={k}");
    }
}

#[test]
fn quadruple_words_generate_the_correction_series() {
    let s = perturb_series(DEFAULT_GUARD as usize);
    for k in 2..=DEFAULT_GUARD {
        let t = count_table(k, DEFAULT_GUARD).unwrap();
        assert_eq!(t.alpha_polynomial(|key| key.one_quadruple()), s.a1[k as usize], "k={k}");
    }
}

#[test]
fn correction_polynomials() {
    let s = perturb_series(4);
    assert_eq!(s.a1[3].to_string(), "3a^2 + 3a");
    assert_eq!(s.a1[4].to_string(), "6a^3 + 16a^2 + 6a");
}

#[test]
fn mp_quadrature_moments() {
    for alpha in [0.5, 1.0, 2.0, 4.0] {
        let q = continuous_moments(&MarchenkoPastur::new(alpha).unwrap(), 10).unwrap();
        let m = mp_moments(alpha, 10).unwrap();
        assert!((q[0] - alpha.min(1.0)).abs() < 1e-10);
        assert!((q[1] - alpha).abs() < 1e-9);
        for (k, &qk) in q.iter().enumerate().skip(1) {
            let exact = m.get(k).unwrap();
            assert!((qk - exact).abs() <= 1e-8 * exact.max(1.0), "alpha={alpha} k={k}: {qk} vs {exact}");
        }
    }
}

#[test]
fn correction_quadrature_moments() {
    for alpha in [1.0, 2.0, 4.0] {
        let q = continuous_moments(&Perturbation::new(alpha).unwrap(), 8).unwrap();
        let a1 = perturb_moments(alpha, 8).unwrap();
        assert!(q[0].abs() < 1e-10, "mass {}", q[0]);
        for k in 1..=8 {
            let exact = a1[k - 1];
            assert!((q[k] - exact).abs() <= 1e-8 * exact.abs().max(1.0), "alpha={alpha} k={k}: {} vs {exact}", q[k]);
        }
    }
    // Fixes the 1/pi normalisation of the density.
    let q = signed_quadrature(|x| x * x, &Perturbation::new(1.0).unwrap()).unwrap();
    assert!((q - 1.0).abs() < 1e-10);
}

#[test]
fn mp_stieltjes_quadratic_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let alpha = rng.random_range(0.1..5.0);
        let z = Complex64::new(rng.random_range(-5.0..15.0), rng.random_range(1e-3..5.0));
        let s = mp_stieltjes(z, alpha).unwrap();
        let r = z * s * s - (alpha - z - 1.0) * s + 1.0;
        assert!(r.norm() < 1e-12, "alpha={alpha} z={z} residual={}", r.norm());
        assert!(s.im > 0.0);
    }
}

#[test]
fn mp_stieltjes_matches_quadrature() {
    let alpha = 2.0;
    let z = Complex64::new(2.0, 0.5);
    let s = mp_stieltjes(z, alpha).unwrap();
    let m = MarchenkoPastur::new(alpha).unwrap();
    let re = signed_quadrature(|x| (1.0 / (x - z)).re, &m).unwrap();
    let im = signed_quadrature(|x| (1.0 / (x - z)).im, &m).unwrap();
    assert!((s - Complex64::new(re, im)).norm() < 1e-6);

    // With an atom at zero the transform picks up -atom/z.
    let alpha = 0.5;
    let m = MarchenkoPastur::new(alpha).unwrap();
    let re = signed_quadrature(|x| (1.0 / (x - z)).re, &m).unwrap();
    let im = signed_quadrature(|x| (1.0 / (x - z)).im, &m).unwrap();
    let total = Complex64::new(re, im) - mp_atom(alpha) / z;
    assert!((mp_stieltjes(z, alpha).unwrap() - total).norm() < 1e-6);
}

#[test]
fn inversion_recovers_densities() {
    for alpha in [0.5, 2.0] {
        let (a, b) = mp_edges(alpha);
        for i in 1..10 {
            let x = a + (b - a) * i as f64 / 10.0;
            let z = Complex64::new(x, 1e-6);
            let mp = mp_stieltjes(z, alpha).unwrap().im / PI;
            assert!((mp - mp_density(x, alpha)).abs() < 1e-4);
            let p = perturb_stieltjes(z, alpha).unwrap().im / PI;
            assert!((p - perturb_density(x, alpha)).abs() < 1e-4, "x={x}: {p} vs {}", perturb_density(x, alpha));
        }
    }
    let z = Complex64::new(4.0, 1e-6);
    let p = perturb_stieltjes(z, 2.0).unwrap().im / PI;
    assert!((p - perturb_density(4.0, 2.0)).abs() < 1e-4);
}

#[test]
fn correction_transform_decays_like_z_squared() {
    for alpha in [1.0, 3.0] {
        let z = Complex64::new(0.3, 1e3);
        let s = perturb_stieltjes(z, alpha).unwrap();
        assert!((s * z).norm() < 1e-5);
        // Leading term is -a_2^(1) / z^3 since a_1^(1) = 0; the next one is
        // smaller by about a_3^(1) / (a_2^(1) |z|).
        let lead = -alpha / (z * z * z);
        assert!((s - lead).norm() < 2e-2 * lead.norm());
    }
}

/// `M_k = -(1 / 2 pi i) \oint z^k S(z) dz` on an ellipse around the support.
fn contour_moment(alpha: f64, k: i32) -> f64 {
    let (a, b) = mp_edges(alpha);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let rho = 1.5;
    let n = 256;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let z = mid + 0.5 * half * (rho * w + 1.0 / (rho * w));
        let dz = 0.5 * half * (rho * w - 1.0 / (rho * w)) * Complex64::i();
        acc += z.powi(k) * perturb_stieltjes_continued(z, alpha) * dz;
    }
    let integral = acc * (2.0 * PI / n as f64);
    (-integral / (2.0 * PI * Complex64::i())).re
}

#[test]
fn correction_transform_laurent_coefficients() {
    for alpha in [1.0, 2.0] {
        let a1 = perturb_moments(alpha, 6).unwrap();
        for k in 0..=6 {
            let exact = if k == 0 { 0.0 } else { a1[k - 1] };
            let m = contour_moment(alpha, k as i32);
            assert!((m - exact).abs() < 1e-8 * exact.abs().max(1.0), "alpha={alpha} k={k}: {m} vs {exact}");
        }
    }
}

#[test]
fn first_order_model_mass() {
    let m = FirstOrder::new(2.0, 20.0).unwrap();
    let mass = signed_quadrature(|_| 1.0, &m).unwrap();
    assert!((mass - 1.0).abs() < 1e-10);
    let m2 = signed_quadrature(|x| x * x, &m).unwrap();
    assert!((m2 - (6.0 + 2.0 / 20.0)).abs() < 1e-9);
}
