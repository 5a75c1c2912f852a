mod common;

use nalgebra::{DMatrix, DVector};
use treesearch::centrality::*;
use treesearch::classical::*;
use treesearch::tree::build_tree;

/// Expected hitting times of the root from every site, by a dense solve on
/// the full graph.
fn full_graph_hitting(n: u32) -> Vec<f64> {
    let tree = build_tree(n).unwrap();
    let m = tree.num_sites();
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for site in 2..=m as u64 {
        let i = site as usize - 1;
        let deg = tree.degree(site) as f64;
        b[i] = 1.0;
        for nb in tree.neighbors(site) {
            if nb != 1 {
                a[(i, nb as usize - 1)] -= 1.0 / deg;
            }
        }
    }
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

#[test]
fn level_hitting_times_match_full_graph() {
    for n in 2..=9u32 {
        let h = hitting_times(n).unwrap();
        let full = full_graph_hitting(n);
        for k in 1..=n {
            let site = 1usize << (k - 1);
            let want = full[site - 1];
            assert!((h.per_level[k as usize - 1] - want).abs() <= 1e-9 * want.max(1.0), "n={n} k={k}");
        }
        let avg: f64 = full.iter().sum::<f64>() / full.len() as f64;
        assert!((h.average / avg - 1.0).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn exact_and_float_agree() {
    for n in [10u32, 20, 30] {
        let h = hitting_times(n).unwrap();
        let ex = h.exact.as_ref().unwrap();
        assert!(ex.all_integers());
        for (f, q) in h.per_level.iter().zip(&ex.per_level) {
            let qf: f64 = num_traits::ToPrimitive::to_f64(q).unwrap();
            assert!((f - qf).abs() <= 1e-12 * qf.max(1.0));
        }
    }
    let big = hitting_times(48).unwrap();
    assert!(big.exact.is_none());
    assert!(big.max_residual() < 1e-6);
}

#[test]
fn monte_carlo_depth_five() {
    let h = hitting_times(5).unwrap();
    for k in [2u32, 5] {
        let mc = monte_carlo_hitting_time(5, k, 200_000, 16, 7).unwrap();
        let want = h.per_level[k as usize - 1];
        assert!((mc.mean - want).abs() < 4.0 * mc.std_err, "k={k}: {} vs {want}", mc.mean);
    }
    let a = monte_carlo_hitting_time(6, 3, 10_000, 8, 99).unwrap();
    let b = monte_carlo_hitting_time(6, 3, 10_000, 8, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn linear_classical_search() {
    for n in [8u32, 16, 30, 40] {
        let r = classical_complexity_class(n).unwrap();
        assert!(r.t2_is_n_minus_2 && r.average_above_bound);
        assert!(r.t2_over_n > 0.99);
    }
}

#[test]
fn betweenness_matches_path_enumeration() {
    for n in 1..=5u32 {
        let tree = build_tree(n).unwrap();
        for site in 1..=tree.num_sites() as u64 {
            let l = 64 - site.leading_zeros();
            assert_eq!(betweenness(n, l).unwrap().raw, common::brute_force_betweenness(&tree, site), "n={n} v={site}");
        }
    }
}

#[test]
fn closeness_matches_bfs_on_every_site() {
    for n in 1..=8u32 {
        let tree = build_tree(n).unwrap();
        for site in 1..=tree.num_sites() as u64 {
            let l = 64 - site.leading_zeros();
            let bfs: u128 = tree.bfs_distances(site).unwrap().iter().map(|&d| d as u128).sum();
            assert_eq!(distance_sum(n, l).unwrap(), bfs);
        }
    }
}

#[test]
fn kappa_tracks_exponent() {
    for rho in TABLE_RATIOS {
        let k = kappa_hat(32, rho).unwrap();
        assert!((k.extrapolated / (1.0 + rho) - 1.0).abs() < 0.01, "rho={rho}: {k:?}");
    }
}
