use num_complex::Complex64;
use wishart_core::bernoulli::BernoulliParams;
use wishart_core::heavytail::{truncated_moment, HeavyTailParams};
use wishart_core::spectra::*;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, (sample_variance(xs) / n).sqrt())
}

/// `E[(1/n) tr W^2]` for i.i.d. centred entries with moments `m2`, `m4`,
/// normalised by `n m2`: `(m/n) m4/(n m2^2) + m(m-1)/n^2 + m(n-1)/n^2`.
fn expected_m2(n: usize, m: usize, m2: f64, m4: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    mf / nf * m4 / (nf * m2 * m2) + mf * (mf - 1.0) / (nf * nf) + mf * (nf - 1.0) / (nf * nf)
}

#[test]
fn trace_identities() {
    let models = [
        MatrixModel::Bernoulli(BernoulliParams::new(2.0, 5.0, false).unwrap()),
        MatrixModel::Bernoulli(BernoulliParams::new(2.0, 5.0, true).unwrap()),
        MatrixModel::HeavyTail(HeavyTailParams::new(2.0, 1.0, 2.0).unwrap()),
    ];
    for model in &models {
        let w = model_matrix(50, model, 3).unwrap();
        let s = sample_wishart(50, model, 3).unwrap();
        assert_eq!(s.m, 100);
        let trace: f64 = (0..50).map(|i| w[(i, i)]).sum();
        let frob: f64 = (0..50).flat_map(|i| (0..50).map(move |j| (i, j))).map(|(i, j)| w[(i, j)].powi(2)).sum();
        let m = empirical_moments(&s, 2).unwrap();
        assert!((m.moments[0] * 50.0 / trace - 1.0).abs() < 1e-10, "{model:?}");
        assert!((m.moments[1] * 50.0 / frob - 1.0).abs() < 1e-10, "{model:?}");
        let top = *s.eigenvalues.last().unwrap();
        assert!(s.eigenvalues[0] >= -PSD_TOL * top.max(1.0));
        assert!(s.eigenvalues.windows(2).all(|p| p[0] <= p[1]));
    }
}

#[test]
fn centred_matrix_is_the_rank_corrected_raw_one() {
    let (n, c) = (40usize, 4.0);
    let raw = bernoulli_matrix(n, &BernoulliParams::new(1.5, c, false).unwrap(), 8).unwrap();
    let cen = bernoulli_matrix(n, &BernoulliParams::new(1.5, c, true).unwrap(), 8).unwrap();
    let p = c / n as f64;
    let m = 60.0;
    for i in 0..n {
        for j in 0..n {
            let a = raw[(i, j)] * c;
            assert_eq!(a, a.round());
            // The diagonal of A A^T holds the row sums.
            let (ri, rj) = (raw[(i, i)] * c, raw[(j, j)] * c);
            let expected = (a - p * (ri + rj) + p * p * m) / (c * (1.0 - p));
            assert!((cen[(i, j)] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn samples_are_reproducible_and_thread_independent() {
    let model = MatrixModel::Bernoulli(BernoulliParams::new(2.0, 5.0, false).unwrap());
    let a = sample_wishart(200, &model, 17).unwrap();
    assert_eq!(a, sample_wishart(200, &model, 17).unwrap());
    assert_ne!(a, sample_wishart(200, &model, 18).unwrap());
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_trials(100, &model, 4, 5).unwrap())
    };
    assert_eq!(run(1), run(2));
}

#[test]
fn bernoulli_first_two_moments() {
    let (n, c, alpha) = (1000usize, 20.0, 2.0);
    let p = BernoulliParams::new(alpha, c, true).unwrap();
    let samples = run_trials(n, &MatrixModel::Bernoulli(p), 8, 1).unwrap();
    let m: Vec<Vec<f64>> = samples.iter().map(|s| empirical_moments(s, 2).unwrap().moments).collect();
    let (m1, se1) = mean_and_se(&m.iter().map(|v| v[0]).collect::<Vec<_>>());
    let (m2, se2) = mean_and_se(&m.iter().map(|v| v[1]).collect::<Vec<_>>());
    assert!((m1 - alpha).abs() < 3.0 * se1, "{m1} +- {se1}");
    let q = c / n as f64;
    let mom2 = q * (1.0 - q);
    let mom4 = q * (1.0 - q) * ((1.0 - q).powi(3) + q.powi(3));
    let e2 = expected_m2(n, 2000, mom2, mom4);
    assert!((m2 - e2).abs() < 3.0 * se2, "{m2} +- {se2} vs {e2}");
}

#[test]
fn uncentred_first_moment_binomial_variance() {
    let (n, c, alpha) = (100usize, 5.0, 2.0);
    let model = MatrixModel::Bernoulli(BernoulliParams::new(alpha, c, false).unwrap());
    let samples = run_trials(n, &model, 200, 3).unwrap();
    let m1: Vec<f64> = samples.iter().map(|s| empirical_moments(s, 1).unwrap().moments[0]).collect();
    let (mean, se) = mean_and_se(&m1);
    assert!((mean - alpha).abs() < 3.0 * se);
    // M_1 = (number of ones) / (c n), a scaled binomial.
    let q = c / n as f64;
    let predicted = (n * 200) as f64 * q * (1.0 - q) / (c * n as f64).powi(2);
    let ratio = sample_variance(&m1) / predicted;
    assert!((0.7..1.4).contains(&ratio), "variance ratio {ratio}");
}

#[test]
fn heavy_tail_first_two_moments() {
    let n = 500;
    let p = HeavyTailParams::new(2.0, 1.0, 2.0).unwrap();
    let samples = run_trials(n, &MatrixModel::HeavyTail(p), 10, 2).unwrap();
    let m: Vec<Vec<f64>> = samples.iter().map(|s| empirical_moments(s, 2).unwrap().moments).collect();
    let (m1, se1) = mean_and_se(&m.iter().map(|v| v[0]).collect::<Vec<_>>());
    let (m2, se2) = mean_and_se(&m.iter().map(|v| v[1]).collect::<Vec<_>>());
    assert!((m1 - 2.0).abs() < 3.0 * se1, "{m1} +- {se1}");
    let e2 = expected_m2(n, 1000, truncated_moment(&p, n, 2).unwrap(), truncated_moment(&p, n, 4).unwrap());
    assert!((m2 - e2).abs() < 3.0 * se2, "{m2} +- {se2} vs {e2}");
}

#[test]
fn centred_and_raw_spectra_agree() {
    let n = 2000;
    let raw = sample_wishart_bernoulli(n, &BernoulliParams::new(2.0, 20.0, false).unwrap(), 4).unwrap();
    let cen = sample_wishart_bernoulli(n, &BernoulliParams::new(2.0, 20.0, true).unwrap(), 4).unwrap();
    let gap = EmpiricalMeasure::new(&raw.eigenvalues).sup_distance(&EmpiricalMeasure::new(&cen.eigenvalues));
    assert!(gap < 0.05, "{gap}");
}

#[test]
fn stieltjes_matches_histogram() {
    let s = sample_wishart_bernoulli(500, &BernoulliParams::new(2.0, 10.0, true).unwrap(), 6).unwrap();
    let top = *s.eigenvalues.last().unwrap();
    let h = histogram(&s, 400, (0.0, top + 1e-9)).unwrap();
    assert!((h.total_mass() - 1.0).abs() < 1e-12);
    let z = Complex64::new(3.0, 1.0);
    let from_hist: Complex64 = h.centers.iter().zip(&h.density).map(|(&x, &d)| d * h.width() / (x - z)).sum();
    let direct = empirical_stieltjes(&s, z).unwrap();
    assert!((from_hist - direct).norm() < 1e-3, "{from_hist} vs {direct}");
}

#[test]
fn variance_decay_of_deterministic_model_is_zero() {
    let model = MatrixModel::Bernoulli(BernoulliParams::new(2.0, 0.0, false).unwrap());
    let v = variance_decay_test(&model, &[10, 20], 30, 2, 1).unwrap();
    assert!(v.points.iter().all(|&(_, var)| var == 0.0));
    assert_eq!(v.slope, None);
    assert!(variance_decay_test(&model, &[10, 20], 10, 2, 1).is_err());
}

#[test]
fn dump_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eig.csv");
    let s = sample_wishart_bernoulli(60, &BernoulliParams::new(1.5, 3.0, true).unwrap(), 2).unwrap();
    write_sample(&s, &path).unwrap();
    assert!(sidecar_path(&path).exists());
    let back = read_sample(&path).unwrap();
    assert_eq!(back, s);
}
