use robust_risk::{expectile, robust_expectile_linear, PriorDistribution};

#[test]
fn sampled_prior_tracks_parametric_values() {
    let normal = PriorDistribution::normal(0.0, 1.0).unwrap();
    let sample = PriorDistribution::uniform(&normal.sample(200_000, 7).unwrap()).unwrap();
    for alpha in [0.2, 0.5, 0.9] {
        let exact = expectile(&normal, alpha).unwrap();
        let sampled = expectile(&sample, alpha).unwrap();
        assert!((exact - sampled).abs() < 0.02, "alpha={alpha}: {exact} vs {sampled}");
        let exact = robust_expectile_linear(&normal, alpha, 3.0).unwrap();
        let sampled = robust_expectile_linear(&sample, alpha, 3.0).unwrap();
        assert!((exact - sampled).abs() < 0.02, "alpha={alpha}: {exact} vs {sampled}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let t = PriorDistribution::student_t(5.0, 0.0, 1.0).unwrap();
    assert_eq!(t.sample(100, 3).unwrap(), t.sample(100, 3).unwrap());
    assert_ne!(t.sample(100, 3).unwrap(), t.sample(100, 4).unwrap());
}
