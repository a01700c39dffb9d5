//! Monte Carlo agreement with closed-form quantities.

use onebit_core::nets::{vc_entropy_check, SetClass};
use onebit_core::onebit::{linear_l1_distance, one_bit_map, sign_product_statistic};
use onebit_core::processes::{
    estimate_gaussian_width, estimate_hemisphere_width_cholesky, estimate_hemisphere_width_empirical,
    sample_hemisphere_process, sudakov_check, symmetrized_process_sup, ProcessMetric,
};
use onebit_core::rng::stream;
use onebit_core::sphere::{
    geodesic_distance, in_convex_sparse, in_wedge, sample_convex_sparse, sample_sparse_unit,
    sample_uniform_sphere, transversal_probability, transversal_separation,
};
use onebit_core::stats::{binomial_sigma, Running};
use onebit_core::verify::{margin_separation_count, metric_ratio_check};
use onebit_core::{EnsembleKind, MeasurementEnsemble, PointSet, SparseSpec, UnitVector, LAMBDA};

/// Unit vector at geodesic distance `d` from `e₀`, in the `(e₀, e₁)` plane.
fn at_distance(dim: usize, d: f64) -> (UnitVector, UnitVector) {
    let a = d * std::f64::consts::PI;
    let mut y = vec![0.0; dim];
    y[0] = a.cos();
    y[1] = a.sin();
    (UnitVector::basis(dim, 0).unwrap(), UnitVector::normalized(y).unwrap())
}

#[test]
fn wedge_frequency_matches_distance() {
    let mut rng = stream(11, 0, 0);
    let m = 20_000;
    for _ in 0..10 {
        let x = sample_uniform_sphere(3, &mut rng).unwrap();
        let y = sample_uniform_sphere(3, &mut rng).unwrap();
        let d = geodesic_distance(&x, &y).unwrap();
        let hits = (0..m)
            .filter(|_| in_wedge(&sample_uniform_sphere(3, &mut rng).unwrap(), &x, &y).unwrap())
            .count();
        let freq = hits as f64 / m as f64;
        assert!((freq - d).abs() <= 4.0 * binomial_sigma(d, m), "{freq} vs {d}");
    }
}

#[test]
fn transversal_frequency_matches_formula() {
    let mut rng = stream(12, 0, 0);
    let m = 100_000;
    for (n, d) in [(3, 0.4), (5, 0.3), (2, 0.6)] {
        let (x, y) = at_distance(n + 1, d);
        let hits = (0..m)
            .filter(|_| {
                let t = sample_uniform_sphere(n, &mut rng).unwrap();
                in_wedge(&t, &x, &y).unwrap() && transversal_separation(&t, &x, &y).unwrap()
            })
            .count();
        let p = transversal_probability(n, d);
        let freq = hits as f64 / m as f64;
        assert!((freq - p).abs() <= 4.0 * binomial_sigma(p, m), "n={n}: {freq} vs {p}");
    }
    assert!((transversal_probability(3, 0.4) - 0.1).abs() < 1e-15);
}

#[test]
fn uniform_sampler_second_moments() {
    let mut rng = stream(13, 0, 0);
    let n = 4;
    let mut acc: Vec<Running> = (0..=n).map(|_| Running::new()).collect();
    let mut mean: Vec<Running> = (0..=n).map(|_| Running::new()).collect();
    for _ in 0..40_000 {
        let x = sample_uniform_sphere(n, &mut rng).unwrap();
        for (i, &c) in x.coords().iter().enumerate() {
            acc[i].push(c * c);
            mean[i].push(c);
        }
    }
    for i in 0..=n {
        assert!((acc[i].mean() - 0.2).abs() < 4.0 * acc[i].std_error());
        assert!(mean[i].mean().abs() < 4.0 * mean[i].std_error());
    }
}

#[test]
fn sparse_support_is_uniform() {
    let mut rng = stream(14, 0, 0);
    let spec = SparseSpec::new(10, 3).unwrap();
    let draws = 20_000;
    let mut counts = [0usize; 11];
    for _ in 0..draws {
        let x = sample_sparse_unit(spec, &mut rng).unwrap();
        assert_eq!(x.nonzeros(), 3);
        for (i, &c) in x.coords().iter().enumerate() {
            if c != 0.0 {
                counts[i] += 1;
            }
        }
    }
    let expected = draws as f64 * 3.0 / 11.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 10 degrees of freedom, upper 0.1% point.
    assert!(chi2 < 29.59, "chi2 = {chi2}");
}

#[test]
fn convex_sparse_samples_stay_in_the_set() {
    let mut rng = stream(15, 0, 0);
    let spec = SparseSpec::new(20, 4).unwrap();
    for _ in 0..2_000 {
        let x = sample_convex_sparse(spec, &mut rng).unwrap();
        assert!(in_convex_sparse(&x, 4));
    }
}

#[test]
fn half_normal_mean_is_lambda() {
    let ens = MeasurementEnsemble::draw(EnsembleKind::Gaussian, 5, 100_000, 16).unwrap();
    let x = UnitVector::normalized(vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0]).unwrap();
    let r = sign_product_statistic(&ens, &x, &x).unwrap();
    assert!((r.raw_mean() - LAMBDA).abs() <= 0.01);
    let y = UnitVector::basis(6, 3).unwrap();
    let z = UnitVector::basis(6, 1).unwrap();
    let r = sign_product_statistic(&ens, &y, &z).unwrap();
    assert!(r.statistic.abs() < 4.0 / (ens.m() as f64).sqrt());
}

#[test]
fn linear_l1_is_unbiased() {
    let ens = MeasurementEnsemble::draw(EnsembleKind::Gaussian, 3, 20_000, 17).unwrap();
    let (x, y) = at_distance(4, 0.35);
    let chord = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let est = linear_l1_distance(&ens, &x, &y).unwrap();
    let se = chord * (1.0 - LAMBDA * LAMBDA).sqrt() / LAMBDA / (ens.m() as f64).sqrt();
    assert!((est - chord).abs() < 4.0 * se, "{est} vs {chord}");
}

#[test]
fn two_point_widths() {
    let mut rng = stream(18, 0, 0);
    let (x, y) = at_distance(4, 0.3);
    let set = PointSet::explicit(vec![x, y]).unwrap();
    let chord = (2.0 - 2.0 * (0.3 * std::f64::consts::PI).cos()).sqrt();

    let w = estimate_gaussian_width(&set, 20_000, &mut rng).unwrap();
    assert!((w.value - LAMBDA * chord).abs() < 4.0 * w.std_error);

    let h = estimate_hemisphere_width_cholesky(&set, 20_000, &mut rng).unwrap();
    assert!((h.value - LAMBDA * 0.3f64.sqrt()).abs() < 4.0 * h.std_error);

    let he = estimate_hemisphere_width_empirical(&set, 10_000, 400, &mut rng).unwrap();
    assert!(h.z_score(&he) < 4.0, "{h:?} vs {he:?}");
}

#[test]
fn hemisphere_process_moments() {
    let mut rng = stream(19, 0, 0);
    let (x, y) = at_distance(3, 0.25);
    let set = PointSet::explicit(vec![x, y]).unwrap();
    let mut var = Running::new();
    let mut cov = Running::new();
    for _ in 0..600 {
        let g = sample_hemisphere_process(&set, 10_000, &mut rng).unwrap();
        var.push(g[0] * g[0]);
        cov.push(g[0] * g[1]);
    }
    assert!((var.mean() - 0.25).abs() < 4.0 * var.std_error());
    assert!((cov.mean() - (0.25 - 0.125)).abs() < 4.0 * cov.std_error());
}

#[test]
fn symmetrized_pair_matches_half_normal() {
    let mut rng = stream(20, 0, 0);
    let (x, y) = at_distance(3, 0.4);
    let set = PointSet::explicit(vec![x, y]).unwrap();
    let mut acc = Running::new();
    for t in 0..400u64 {
        let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 2, 2_000, 1_000 + t).unwrap();
        acc.push(symmetrized_process_sup(&set, &ens, &mut rng).unwrap());
    }
    let target = LAMBDA * 0.4f64.sqrt();
    assert!((acc.mean() - target).abs() < 4.0 * acc.std_error() + 0.01);
}

#[test]
fn cholesky_and_empirical_agree() {
    let mut rng = stream(21, 0, 0);
    let set = PointSet::uniform(2, 30, &mut rng).unwrap();
    let a = estimate_hemisphere_width_cholesky(&set, 2_000, &mut rng).unwrap();
    let b = estimate_hemisphere_width_empirical(&set, 10_000, 200, &mut rng).unwrap();
    assert!(a.z_score(&b) < 3.0, "{a:?} vs {b:?}");
}

#[test]
fn sudakov_ratio_is_moderate() {
    let mut rng = stream(22, 0, 0);
    let set = PointSet::uniform(3, 300, &mut rng).unwrap();
    let w = estimate_gaussian_width(&set, 500, &mut rng).unwrap();
    let deltas: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let r = sudakov_check(&set, ProcessMetric::Gaussian, &deltas, &w).unwrap();
    assert!(r.max_ratio <= 3.0, "{r:?}");
    let counts: Vec<usize> = r.rows.iter().map(|row| row.covering_number).collect();
    assert!(counts.windows(2).all(|p| p[0] >= p[1]));
}

#[test]
fn margin_frequency_matches_direct_estimate() {
    let mut rng = stream(23, 0, 0);
    let (x, y) = at_distance(4, 0.4);
    let margin = 0.04 * 0.4;
    let m = 10_000;
    let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 3, m, 24).unwrap();
    let freq = margin_separation_count(&x, &y, &ens, margin).unwrap() as f64 / m as f64;
    let oracle_m = 200_000;
    let hits = (0..oracle_m)
        .filter(|_| {
            let t = sample_uniform_sphere(3, &mut rng).unwrap();
            let (a, b) = (t.dot(&x), t.dot(&y));
            (a < -margin && b > margin) || (b < -margin && a > margin)
        })
        .count();
    let p = hits as f64 / oracle_m as f64;
    let sigma = (binomial_sigma(p, m).powi(2) + binomial_sigma(p, oracle_m).powi(2)).sqrt();
    assert!((freq - p).abs() <= 3.0 * sigma, "{freq} vs {p}");
    assert!(p < 0.4);
}

#[test]
fn metric_ratio_half_distance() {
    let (x, y) = at_distance(3, 0.5);
    let set = PointSet::explicit(vec![x.clone(), y.clone()]).unwrap();
    let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 2, 10_000, 25).unwrap();
    let r = metric_ratio_check(&set, &ens, 0.4).unwrap();
    let px = one_bit_map(&ens, &x).unwrap();
    let py = one_bit_map(&ens, &y).unwrap();
    let b = px.disagreements(&py).unwrap() as f64 / 10_000.0;
    assert!((r.sup_ratio - 2.0 * (b - 0.5).abs()).abs() < 1e-12);
    assert!(r.pass);
    assert!(r.sup_ratio < 3.0 * binomial_sigma(0.5, 10_000) / 0.5);
}

#[test]
fn entropy_of_a_small_cap_collapses() {
    let mut rng = stream(26, 0, 0);
    let center = UnitVector::basis(3, 2).unwrap();
    let mut points = Vec::new();
    while points.len() < 40 {
        let p = sample_uniform_sphere(2, &mut rng).unwrap();
        if geodesic_distance(&p, &center).unwrap() < 0.15 {
            points.push(p);
        }
    }
    let set = PointSet::explicit(points).unwrap();
    let r = vc_entropy_check(3, &[0.02, 0.5, 0.9], &set, SetClass::Hemispheres, 4_000, &mut rng).unwrap();
    assert_eq!(r.rows[1].covering_number, 1);
    assert_eq!(r.rows[2].covering_number, 1);
    assert!(r.rows[0].covering_number > 1);
    assert!(r.rows.iter().all(|row| row.ratio <= 1.0));
}
