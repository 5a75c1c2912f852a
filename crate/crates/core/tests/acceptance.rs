//! Acceptance checks, one line per criterion.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use treesearch::analytic::*;
use treesearch::centrality::*;
use treesearch::classical::*;
use treesearch::evolution::{linear_grid, MarkedSpectrum};
use treesearch::search::*;
use treesearch::tree::build_tree;
use treesearch::*;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn root(n: u32, gamma: f64) -> ReducedSystem {
    reduce_root_case(TreeParams::new(n, 1, gamma).unwrap()).unwrap()
}

fn reduction_fidelity() -> Outcome {
    let mut worst = (0.0f64, 0, 0, 0.0);
    let mut cases = 0;
    for n in 1..=10u32 {
        for l in 1..=n {
            for gamma in [0.5, 2.0 / 3.0, 1.0, 2.0] {
                let p = TreeParams::new(n, l, gamma).map_err(|e| e.to_string())?;
                let full = build_full_hamiltonian(p, p.marked_site()).map_err(|e| e.to_string())?;
                let red = reduce_comb(p).map_err(|e| e.to_string())?;
                let times = linear_grid(4.0 * (p.num_sites() as f64).sqrt(), 200);
                let reduced = evolve_amplitude(&red, &times).map_err(|e| e.to_string())?;
                let oracle = common::full_marked_trace(&full, times[1], times.len());
                let dev = reduced.amplitudes.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                if dev > worst.0 {
                    worst = (dev, n, l, gamma);
                }
                cases += 1;
            }
        }
    }
    check(
        worst.0 <= 1e-10,
        format!("{cases} cases, max deviation {:.2e} at n={} l={} gamma={:.3}", worst.0, worst.1, worst.2, worst.3),
    )
}

fn root_runtime() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [15u32, 20, 24] {
        let pk = first_peak(&root(n, 1.0), &PeakPolicy::default()).map_err(|e| e.to_string())?;
        let ratio = pk.efficiency() / asymptotic_runtime(n).unwrap();
        ok &= (ratio - 1.0).abs() <= 0.05;
        parts.push(format!("n={n} ratio {ratio:.4}"));
    }
    check(ok, parts.join(", "))
}

fn critical_approximation() -> Outcome {
    let n = 15;
    let spec = MarkedSpectrum::of(&root(n, 1.0)).map_err(|e| e.to_string())?;
    let wavelength = 2.0 * PI * 2f64.powf((n + 1) as f64 / 2.0);
    let dev = linear_grid(wavelength, 4001)
        .into_iter()
        .map(|t| (spec.amplitude(t).norm() - (t / 2f64.powf(8.0)).sin().abs() / SQRT_2).abs())
        .fold(0.0, f64::max);
    check(dev <= 0.02, format!("max deviation {dev:.4} over one wavelength"))
}

fn small_gamma_approximation() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (gamma, n, tol) in [(0.2, 8u32, 0.02), (0.9, 15, 0.03)] {
        let spec = MarkedSpectrum::of(&root(n, gamma)).map_err(|e| e.to_string())?;
        let big_n = ((1u64 << n) - 1) as f64;
        let dev = linear_grid(200.0, 4001)
            .into_iter()
            .map(|t| (spec.amplitude(t).norm() - approx_small_gamma(t, gamma, big_n).unwrap().norm()).abs())
            .fold(0.0, f64::max);
        ok &= dev <= tol;
        parts.push(format!("gamma={gamma} n={n} dev {dev:.4}"));
    }
    check(ok, parts.join(", "))
}

fn scaling_exponents() -> Outcome {
    let sizes: Vec<u32> = (8..=64).step_by(4).collect();
    let runs = [
        ("l=n/2", LevelPolicy::Proportional(0.5), GammaPolicy::Fixed(2.0 / 3.0), 0.750, 0.01),
        ("l=1", LevelPolicy::Fixed(1), GammaPolicy::Fixed(1.0), 0.500, 0.01),
        ("l=n/4", LevelPolicy::Proportional(0.25), GammaPolicy::Fixed(2.0 / 3.0), 0.625, 0.02),
        ("l=3n/4", LevelPolicy::Proportional(0.75), GammaPolicy::Fixed(2.0 / 3.0), 0.878, 0.03),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, lp, gp, want, tol) in runs {
        let fit = scaling_experiment(lp, &sizes, gp, &ScalingOptions::default()).map_err(|e| e.to_string())?;
        ok &= (fit.beta - want).abs() <= tol;
        parts.push(format!("{name} beta {:.4} (target {want} +- {tol})", fit.beta));
    }
    check(ok, parts.join(", "))
}

fn optimal_parameters() -> Outcome {
    let policy = SweepPolicy::default();
    let mut parts = Vec::new();
    let mut trend = Vec::new();
    for n in [12u32, 16, 20, 24] {
        let sw = sweep_gamma(n, 1, &policy).map_err(|e| e.to_string())?;
        trend.push((sw.gamma_prime_star, sw.p_max));
    }
    let (g_last, p_last) = *trend.last().unwrap();
    let dist: Vec<f64> = trend.iter().map(|(g, p)| (g - 1.0).abs() + (p - 0.5).abs()).collect();
    let root_ok = (g_last - 1.0).abs() <= 0.01 && (p_last - 0.5).abs() <= 0.01 && dist.last() <= dist.first();
    parts.push(format!("l=1 n=24 gamma'* {g_last:.3} p_max {p_last:.4}"));

    let g2 = sweep_gamma(24, 2, &policy).map_err(|e| e.to_string())?.gamma_star;
    let g_half = sweep_gamma(36, 18, &policy).map_err(|e| e.to_string())?.gamma_star;
    let l2_ok = g2.is_some_and(|g| (g - 0.75).abs() <= 0.01);
    let half_ok = g_half.is_some_and(|g| (g - 2.0 / 3.0).abs() <= 0.02);
    parts.push(format!("l=2 gamma* {g2:?}"));
    parts.push(format!("l=n/2 (n=36) gamma* {g_half:?}"));
    check(root_ok && l2_ok && half_ok, parts.join(", "))
}

fn leaf_case() -> Outcome {
    let policy = SweepPolicy::default();
    let mut scaled = Vec::new();
    let mut peaks = Vec::new();
    for n in 8..=24u32 {
        let sw = sweep_gamma(n, n, &policy).map_err(|e| e.to_string())?;
        if sw.gamma_star.is_some() {
            peaks.push(n);
        }
        scaled.push(sw.p_max * ((1u64 << n) - 1) as f64);
    }
    let lo = scaled.iter().copied().fold(f64::MAX, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    check(
        hi / lo <= 2.0 && peaks.is_empty(),
        format!("p_max * N in [{lo:.2}, {hi:.2}], sizes with a search peak: {peaks:?}"),
    )
}

fn classical_baseline() -> Outcome {
    let mut ok = true;
    for n in 2..=MAX_EXACT_DEPTH {
        let r = classical_complexity_class(n).map_err(|e| e.to_string())?;
        ok &= r.exact && r.t2_is_n_minus_2 && r.all_integers == Some(true);
    }
    let mc = monte_carlo_hitting_time(5, 2, 100_000, 16, 2024).map_err(|e| e.to_string())?;
    let z = (mc.mean - 29.0) / mc.std_err;
    ok &= z.abs() <= 3.0;
    check(ok, format!("exact t_2 = N - 2 for n <= {MAX_EXACT_DEPTH}, monte carlo mean {:.3} ({z:+.2} sigma)", mc.mean))
}

fn laplace_identity() -> Outcome {
    let points = [
        Complex64::new(0.05, 0.0),
        Complex64::new(0.1, 0.3),
        Complex64::new(0.25, -0.7),
        Complex64::new(0.5, 1.5),
        Complex64::new(1.0, 0.05),
    ];
    let mut worst = 0.0f64;
    for n in [6u32, 8, 10] {
        let spec = MarkedSpectrum::of(&root(n, 1.0)).map_err(|e| e.to_string())?;
        let lmax = spec.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for s in points {
            let closed = laplace_psi1(s, n, 1.0).map_err(|e| e.to_string())?;
            let quad = common::simpson_laplace(|t| spec.amplitude(t), s, 2.0 * PI / (256.0 * lmax));
            worst = worst.max(((closed - quad) / quad).norm());
        }
    }
    check(worst <= 1e-6, format!("max relative error {worst:.2e}"))
}

fn centrality() -> Outcome {
    let n = 24;
    let big_n = ((1u64 << n) - 1) as f64;
    let cb_root = betweenness(n, 1).map_err(|e| e.to_string())?.normalized.unwrap();
    let cb_half = betweenness(n, n / 2).map_err(|e| e.to_string())?.normalized.unwrap();
    let half_ratio = cb_half / (4.0 / big_n.sqrt());
    let rows = centrality_table(n).map_err(|e| e.to_string())?;
    let kappas: Vec<f64> = rows.iter().map(|r| r.kappa.extrapolated).collect();
    let kappa_ok = kappas.iter().zip([1.0, 1.25, 1.5, 1.75, 2.0]).all(|(k, w)| (k / w - 1.0).abs() <= 0.02);
    let mut brute_ok = true;
    for depth in 1..=5u32 {
        let tree = build_tree(depth).unwrap();
        for site in 1..=tree.num_sites() as u64 {
            let l = 64 - site.leading_zeros();
            brute_ok &= betweenness(depth, l).unwrap().raw == common::brute_force_betweenness(&tree, site);
        }
    }
    check(
        (0.45..=0.55).contains(&cb_root) && (half_ratio - 1.0).abs() <= 0.05 && kappa_ok && brute_ok,
        format!(
            "C_B(root) {cb_root:.4}, C_B(n/2) / 4N^-1/2 {half_ratio:.4}, kappa {:?}, brute force {}",
            kappas.iter().map(|k| format!("{k:.3}")).collect::<Vec<_>>(),
            if brute_ok { "exact" } else { "mismatch" }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("reduction fidelity", reduction_fidelity),
        ("root-case runtime", root_runtime),
        ("critical approximation", critical_approximation),
        ("small-gamma approximation", small_gamma_approximation),
        ("scaling exponents", scaling_exponents),
        ("optimal parameters", optimal_parameters),
        ("leaf case", leaf_case),
        ("classical baseline", classical_baseline),
        ("laplace identity", laplace_identity),
        ("centrality", centrality),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{secs:.1}s]", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
