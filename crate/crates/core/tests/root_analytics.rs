mod common;

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use treesearch::analytic::*;
use treesearch::evolution::{linear_grid, MarkedSpectrum};
use treesearch::*;

fn root(n: u32, g: f64) -> ReducedSystem {
    reduce_root_case(TreeParams::new(n, 1, g).unwrap()).unwrap()
}

#[test]
fn laplace_matches_quadrature() {
    let points = [
        Complex64::new(0.05, 0.0),
        Complex64::new(0.1, 0.3),
        Complex64::new(0.25, -0.7),
        Complex64::new(0.5, 1.5),
        Complex64::new(1.0, 0.05),
    ];
    for gamma in [1.0, 0.5] {
        for n in [6u32, 8, 10] {
            let spec = MarkedSpectrum::of(&root(n, gamma)).unwrap();
            let lmax = spec.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let h = 2.0 * PI / (256.0 * lmax);
            for s in points {
                let closed = laplace_psi1(s, n, gamma).unwrap();
                let quad = common::simpson_laplace(|t| spec.amplitude(t), s, h);
                let rel = ((closed - quad) / quad).norm();
                assert!(rel <= 1e-6, "gamma={gamma} n={n} s={s}: rel {rel:e}");
            }
        }
    }
}

#[test]
fn exact_poles_are_eigenvalues() {
    for n in [8u32, 12, 16, 20, 30] {
        let spec = MarkedSpectrum::of(&root(n, 1.0)).unwrap();
        let (a, b) = spec.dominant_pair().unwrap();
        let mut eig = [spec.eigenvalues[a], spec.eigenvalues[b]];
        eig.sort_by(f64::total_cmp);
        let poles = critical_poles(n).unwrap();
        // p = -i lambda
        let mut from_poles = [-poles[0].position.im, -poles[1].position.im];
        from_poles.sort_by(f64::total_cmp);
        for (e, p) in eig.iter().zip(from_poles) {
            assert!((e / p - 1.0).abs() < 1e-6, "n={n}: {e} vs {p}");
        }
    }
}

#[test]
fn pole_prediction() {
    for n in [16u32, 18, 20, 24, 30] {
        let spec = MarkedSpectrum::of(&root(n, 1.0)).unwrap();
        let (a, b) = spec.dominant_pair().unwrap();
        let pred = 2f64.powf(-((n + 1) as f64) / 2.0);
        let gap = (spec.eigenvalues[a] - spec.eigenvalues[b]).abs();
        assert!((gap / (2.0 * pred) - 1.0).abs() < 0.02, "n={n}");
        if n >= 20 {
            for k in [a, b] {
                assert!((spec.eigenvalues[k].abs() / pred - 1.0).abs() < 0.02, "n={n}");
            }
        }
    }
}

#[test]
fn decompose_example_depth_fifteen() {
    let d = decompose(&root(15, 1.0).hamiltonian()).unwrap();
    let pred = 2f64.powi(-8);
    let mut small: Vec<f64> = d.eigenvalues.clone();
    small.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    assert!(small[0] * small[1] < 0.0);
    for v in &small[..2] {
        assert!((v.abs() / pred - 1.0).abs() < 0.1);
    }
}

#[test]
fn critical_sine_tracks_simulation() {
    let n = 15;
    let spec = MarkedSpectrum::of(&root(n, 1.0)).unwrap();
    let wl = 2.0 * PI * 2f64.powf((n + 1) as f64 / 2.0);
    let dev = linear_grid(wl, 2001)
        .into_iter()
        .map(|t| (spec.amplitude(t).norm() - approx_critical(t, n, CriticalForm::Sine).unwrap().norm()).abs())
        .fold(0.0, f64::max);
    assert!(dev <= 0.02, "{dev}");
    let top = linear_grid(wl / 2.0, 2001).into_iter().map(|t| spec.amplitude(t).norm()).fold(0.0, f64::max);
    assert!((top - 1.0 / SQRT_2).abs() < 0.01);
}

#[test]
fn critical_pair_converges_to_sine() {
    for n in [22u32, 24, 30] {
        let wl = 2.0 * PI * 2f64.powf((n + 1) as f64 / 2.0);
        let pair = RootCaseApprox::critical(n, CriticalForm::Pair).unwrap();
        let dev = linear_grid(wl, 801)
            .into_iter()
            .map(|t| (pair.eval(t).norm() - approx_critical(t, n, CriticalForm::Sine).unwrap().norm()).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-3, "n={n}: {dev}");
    }
}

#[test]
fn small_gamma_tracks_simulation() {
    for (g, n, tol) in [(0.2, 8u32, 0.02), (0.9, 15, 0.03)] {
        let spec = MarkedSpectrum::of(&root(n, g)).unwrap();
        let big_n = ((1u64 << n) - 1) as f64;
        let dev = linear_grid(200.0, 4001)
            .into_iter()
            .map(|t| (spec.amplitude(t).norm() - approx_small_gamma(t, g, big_n).unwrap().norm()).abs())
            .fold(0.0, f64::max);
        assert!(dev <= tol, "gamma={g}: {dev}");
    }
}

#[test]
fn runtime_formula_against_simulation() {
    let pk = first_peak(&root(20, 1.0), &PeakPolicy::default()).unwrap();
    let want = asymptotic_runtime(20).unwrap();
    assert!((pk.efficiency() / want - 1.0).abs() < 0.05);
}

#[test]
fn small_gamma_efficiency_against_simulation() {
    let policy = PeakPolicy::default().with_threshold(1.5);
    let pk = first_peak(&root(12, 0.5), &policy).unwrap();
    let want = small_gamma_efficiency(0.5, 4095.0).unwrap();
    assert!((pk.efficiency() / want - 1.0).abs() < 0.2);
}
