//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use treesearch::tree::{BalancedTree, FullSystem, SparseMatrix};

/// `J_0(x) .. J_kmax(x)` by Miller's backward recurrence.
pub fn bessel_j(kmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut j = vec![0.0; kmax + 1];
        j[0] = 1.0;
        return j;
    }
    let start = kmax.max(x.abs() as usize) + 40 + (x.abs().sqrt() * 10.0) as usize;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(kmax + 1);
    j.iter_mut().for_each(|v| *v /= norm);
    j
}

fn matvec_c(h: &SparseMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..h.dim())
        .map(|i| h.row(i).iter().map(|&(j, v)| x[j] * v).sum())
        .collect()
}

/// `exp(-i H dt) psi` by a Chebyshev series on the Gershgorin interval.
pub fn chebyshev_step(h: &SparseMatrix, psi: &[Complex64], dt: f64) -> Vec<Complex64> {
    let (lo, hi) = h.gershgorin();
    let c = 0.5 * (hi + lo);
    let r = (0.5 * (hi - lo)).max(1e-300);
    let x = r * dt;
    let kmax = (x.abs() * 1.5) as usize + 40;
    let jk = bessel_j(kmax, x);
    // shifted and scaled operator applied to a vector
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        matvec_c(h, v).iter().zip(v).map(|(hv, vv)| (hv - vv * c) / r).collect()
    };
    let minus_i = Complex64::new(0.0, -1.0);
    let mut t_prev = psi.to_vec();
    let mut t_cur = apply(psi);
    let mut out: Vec<Complex64> = psi.iter().map(|v| v * jk[0]).collect();
    let mut coef = minus_i;
    for k in 1..=kmax {
        let w = 2.0 * jk[k];
        for (o, t) in out.iter_mut().zip(&t_cur) {
            *o += coef * w * t;
        }
        if k == kmax {
            break;
        }
        let next: Vec<Complex64> = apply(&t_cur).iter().zip(&t_prev).map(|(a, b)| 2.0 * a - b).collect();
        t_prev = std::mem::replace(&mut t_cur, next);
        coef *= minus_i;
    }
    let phase = Complex64::from_polar(1.0, -c * dt);
    out.iter().map(|v| v * phase).collect()
}

/// Marked-site amplitude of the full system on an evenly spaced grid
/// `0, dt, 2 dt, ...` (`samples` points).
pub fn full_marked_trace(full: &FullSystem, dt: f64, samples: usize) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = full.initial_state().into_iter().map(|a| Complex64::new(a, 0.0)).collect();
    let w = full.marked_index();
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        if i > 0 {
            psi = chebyshev_step(&full.hamiltonian, &psi, dt);
        }
        out.push(psi[w]);
    }
    out
}

/// Full-system amplitude at a single time.
pub fn full_marked_amplitude(full: &FullSystem, t: f64) -> Complex64 {
    let steps = ((t / 4.0).ceil() as usize).max(1);
    let trace = full_marked_trace(full, t / steps as f64, steps + 1);
    trace[steps]
}

/// Ordered pairs `(i, j)`, `i != j`, both different from `v`, whose unique
/// path passes through `v`.
pub fn brute_force_betweenness(tree: &BalancedTree, v: u64) -> u128 {
    let n = tree.num_sites() as u64;
    let dist: Vec<Vec<u32>> = (1..=n).map(|s| tree.bfs_distances(s).unwrap()).collect();
    let vi = (v - 1) as usize;
    let mut count = 0u128;
    for i in 0..n as usize {
        for j in 0..n as usize {
            if i == j || i == vi || j == vi {
                continue;
            }
            if dist[i][vi] + dist[vi][j] == dist[i][j] {
                count += 1;
            }
        }
    }
    count
}

/// `int_0^T exp(-s t) f(t) dt` by composite Simpson, with `T` chosen so
/// that `exp(-Re(s) T) <= 1e-12` and step `h`.
pub fn simpson_laplace<F: Fn(f64) -> Complex64>(f: F, s: Complex64, h: f64) -> Complex64 {
    let t_end = (1e12f64).ln() / s.re;
    let mut m = (t_end / h).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let h = t_end / m as f64;
    let g = |t: f64| (-s * t).exp() * f(t);
    let mut acc = g(0.0) + g(t_end);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += g(k as f64 * h) * w;
    }
    acc * h / 3.0
}
