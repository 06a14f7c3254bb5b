use num_complex::Complex64;
use wishart_core::bernoulli::popdyn::run_population;
use wishart_core::bernoulli::*;
use wishart_core::limitlaw::{mp_density, mp_moments, perturb_moments};
use wishart_core::treewords::TableCache;

fn cfg(pool_size: usize, sweeps: usize, seed: u64) -> PopdynConfig {
    PopdynConfig {
        pool_size,
        sweeps,
        seed,
        damping: 0.5,
    }
}

#[test]
fn second_moment_for_several_parameters() {
    let cache = TableCache::default();
    for (alpha, c) in [(0.5, 1.0), (1.0, 3.0), (2.0, 20.0), (4.0, 0.7), (3.3, 1e3)] {
        let p = BernoulliParams::new(alpha, c, false).unwrap();
        let m = bernoulli_moments(&p, 2, &cache).unwrap();
        let exact = alpha * alpha + alpha + alpha / c;
        assert!((m.moments[1] - exact).abs() <= 1e-14 * exact, "alpha={alpha} c={c}");
    }
}

#[test]
fn expansion_residual_has_first_order_rate() {
    let cache = TableCache::default();
    for k in [3, 4, 5, 6] {
        let r = |c: f64| expansion_residual(&BernoulliParams::new(2.0, c, false).unwrap(), k, &cache).unwrap();
        let ratio = r(100.0) / r(1000.0);
        assert!((5.0..=20.0).contains(&ratio), "k={k}: ratio {ratio}");
    }
}

#[test]
fn expansion_residual_matches_direct_difference() {
    let cache = TableCache::default();
    let p = BernoulliParams::new(2.0, 50.0, false).unwrap();
    let m = bernoulli_moments(&p, 6, &cache).unwrap();
    let mp = mp_moments(2.0, 6).unwrap();
    let a1 = perturb_moments(2.0, 6).unwrap();
    for k in 1..=6u32 {
        let i = k as usize - 1;
        let direct = p.c * (m.moments[i] - mp.moments[i]) - a1[i];
        let r = expansion_residual(&p, k, &cache).unwrap();
        assert!((direct - r).abs() < 1e-8 * mp.moments[i].max(1.0), "k={k}: {direct} vs {r}");
    }
}

#[test]
fn popdyn_tail_is_minus_one_over_z() {
    for (alpha, c) in [(2.0, 20.0), (0.5, 3.0)] {
        let p = BernoulliParams::new(alpha, c, false).unwrap();
        let z = Complex64::new(0.0, 50.0);
        let r = popdyn_resolvent(&p, z, &cfg(5000, 20, 1)).unwrap();
        let target = -1.0 / z;
        assert!((r.m - target).norm() < 0.02 * target.norm(), "{}", r.m);
    }
}

#[test]
fn popdyn_respects_the_symmetry_of_mu_prime() {
    let p = BernoulliParams::new(2.0, 5.0, false).unwrap();
    for (re, im) in [(0.5, 0.3), (1.5, 0.2), (2.5, 0.4), (3.0, 0.5), (4.0, 0.3)] {
        let z = Complex64::new(re, im);
        let a = popdyn_resolvent(&p, z, &cfg(20_000, 60, 11)).unwrap();
        let b = popdyn_resolvent(&p, -z.conj(), &cfg(20_000, 60, 12)).unwrap();
        let gap = (b.m + a.m.conj()).norm();
        assert!(gap < 6.0 * (a.stderr + b.stderr), "z={z}: gap {gap}, se {}", a.stderr);
    }
}

#[test]
fn popdyn_reaches_a_fixed_point() {
    let p = BernoulliParams::new(2.0, 20.0, false).unwrap();
    let z = Complex64::new(6.0, 0.2);
    let (mut pool, r) = run_population(&p, z, &cfg(20_000, 120, 5)).unwrap();
    assert!(r.converged, "{r:?}");
    let (before, se) = pool.mixture(p.alpha);
    pool.sweep(&p, 99).unwrap();
    let (after, _) = pool.mixture(p.alpha);
    assert!((after - before).norm() < 3.0 * se * 2f64.sqrt(), "change {} se {se}", (after - before).norm());
    assert!(pool.pool1.iter().chain(&pool.pool2).all(|x| x.im > 0.0));
}

#[test]
fn density_approaches_mp_for_large_c() {
    // Near the bulk the pool mean spirals in slowly when c is large.
    let p = BernoulliParams::new(2.0, 300.0, false).unwrap();
    let curve = popdyn_wishart_density_curve(&p, &[2.0, 9.0], None, &cfg(2000, 200, 3)).unwrap();
    assert!((curve.density[0] - mp_density(2.0, 2.0)).abs() < 0.02, "{:?}", curve.density);
    assert!(curve.density[1].abs() < 0.01, "{:?}", curve.density);
    assert!(curve.atom.abs() < 0.02, "atom {}", curve.atom);
}

#[test]
fn reconstructed_density_has_unit_mass() {
    let p = BernoulliParams::new(2.0, 20.0, false).unwrap();
    let t_max = (p.c * 10.0f64).sqrt();
    let n = 80;
    let ts: Vec<f64> = (1..=n).map(|i| t_max * i as f64 / n as f64).collect();
    let xs: Vec<f64> = ts.iter().map(|t| t * t / p.c).collect();
    let curve = popdyn_wishart_density_curve(&p, &xs, None, &cfg(10_000, 40, 8)).unwrap();
    // rho(x) dx = rho(t^2 / c) (2 t / c) dt; the integrand vanishes at t = 0.
    let f: Vec<f64> = ts.iter().zip(&curve.density).map(|(t, d)| d * 2.0 * t / p.c).collect();
    let h = t_max / n as f64;
    let mut mass = 0.5 * h * f[0];
    for w in f.windows(2) {
        mass += 0.5 * h * (w[0] + w[1]);
    }
    assert!((mass + curve.atom - 1.0).abs() < 0.05, "mass {mass} atom {}", curve.atom);
}
