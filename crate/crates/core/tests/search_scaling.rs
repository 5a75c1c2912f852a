use treesearch::search::*;
use treesearch::*;

#[test]
fn leaf_is_linear_regime() {
    let policy = PeakPolicy::default();
    let mut scaled = Vec::new();
    for n in [8u32, 12, 16] {
        let sys = reduce_comb(TreeParams::new(n, n, 2.0).unwrap()).unwrap();
        let Regime::Linear { max_prob } = classify(&sys, &policy).unwrap() else {
            panic!("n={n} has a search peak");
        };
        scaled.push(max_prob * sys.params.num_sites() as f64);
    }
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0, "{scaled:?}");
}

#[test]
fn root_sweep_peaks_near_one() {
    let policy = SweepPolicy { gamma_max: 2.0, ..SweepPolicy::default() };
    let sw = sweep_gamma(14, 1, &policy).unwrap();
    assert!((sw.gamma_prime_star - 1.0).abs() <= 0.02, "{}", sw.gamma_prime_star);
    assert!((sw.p_max - 0.5).abs() < 0.05);
    assert!((sw.gamma_star.unwrap() - sw.gamma_prime_star).abs() <= 0.05);
    assert_eq!(sw.marked_degree, 2);
    let gammas: Vec<f64> = sw.points.iter().map(|p| p.gamma).collect();
    assert!(gammas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn sweep_is_deterministic() {
    let policy = SweepPolicy { gamma_max: 1.0, coarse_step: 0.1, fine_step: 0.02, ..SweepPolicy::default() };
    let a = sweep_gamma(10, 3, &policy).unwrap();
    let b = sweep_gamma(10, 3, &policy).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn small_root_scaling() {
    let sizes: Vec<u32> = (12..=28).step_by(2).collect();
    let fit = scaling_experiment(LevelPolicy::Fixed(1), &sizes, GammaPolicy::Fixed(1.0), &ScalingOptions::default()).unwrap();
    assert!((fit.beta - 0.5).abs() < 0.02, "{}", fit.beta);
    assert!(fit.in_sanity_band);
    assert!(fit.excluded.is_empty());
}

#[test]
fn efficiency_grows_with_marked_depth() {
    let policy = PeakPolicy::default();
    let n = 20;
    let effs: Vec<f64> = [1u32, 4, 8, 12]
        .iter()
        .map(|&l| {
            let sys = reduce_comb(TreeParams::new(n, l, gamma_star_rule(l, n)).unwrap()).unwrap();
            efficiency(&sys, &policy).unwrap()
        })
        .collect();
    assert!(effs.windows(2).all(|w| w[0] < w[1]), "{effs:?}");
}

#[test]
fn provenance_passes() {
    let p = verification_provenance(LevelPolicy::Proportional(0.5), GammaPolicy::Fixed(2.0 / 3.0), 10).unwrap();
    assert!(p.report.passed());
    assert_eq!(p.l, 5);
}
