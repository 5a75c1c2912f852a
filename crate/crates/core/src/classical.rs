//! Classical random-walk baseline: expected hitting times of the root.
//!
//! A walker on level `k` steps to the parent with probability 1/3 and to
//! one of the two children otherwise; leaves always step up. Lumping by
//! level gives the tridiagonal system
//! `t_1 = 0`, `t_k = t_{k-1}/3 + 2 t_{k+1}/3 + 1`, `t_n = t_{n-1} + 1`.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tree::num_sites;

/// Largest depth solved in exact rational arithmetic.
pub const MAX_EXACT_DEPTH: u32 = 30;

/// Hitting times for every level.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimes {
    pub n: u32,
    /// `t_k` for `k = 1..n`.
    pub per_level: Vec<f64>,
    /// `2^{k-1} t_k / N`.
    pub weighted: Vec<f64>,
    /// `T = sum_k weighted_k`.
    pub average: f64,
    pub exact: Option<ExactHittingTimes>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactHittingTimes {
    pub per_level: Vec<BigRational>,
    pub average: BigRational,
}

impl ExactHittingTimes {
    pub fn all_integers(&self) -> bool {
        self.per_level.iter().all(|t| t.is_integer())
    }
}

/// Coefficients `(sub, diag, sup, rhs)` of the level system.
fn level_system<T: Num + Clone>(n: usize, t: impl Fn(i32) -> T) -> (Vec<T>, Vec<T>, Vec<T>, Vec<T>) {
    let mut sub = vec![t(0); n];
    let mut diag = vec![t(1); n];
    let mut sup = vec![t(0); n];
    let mut rhs = vec![t(0); n];
    for k in 1..n - 1 {
        sub[k] = t(-1);
        diag[k] = t(3);
        sup[k] = t(-2);
        rhs[k] = t(3);
    }
    sub[n - 1] = t(-1);
    diag[n - 1] = t(1);
    rhs[n - 1] = t(1);
    (sub, diag, sup, rhs)
}

/// Tridiagonal solve eliminating from the last row upward, so that
/// `x_i = alpha_i x_{i-1} + beta_i`. For the hitting-time system every
/// `alpha_i` is 1 and all updates are additions.
fn solve_tridiagonal<T: Num + Clone>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    if n == 1 {
        return vec![rhs[0].clone() / diag[0].clone()];
    }
    let mut alpha = vec![T::zero(); n];
    let mut beta = vec![T::zero(); n];
    alpha[n - 1] = T::zero() - sub[n - 1].clone() / diag[n - 1].clone();
    beta[n - 1] = rhs[n - 1].clone() / diag[n - 1].clone();
    for i in (1..n - 1).rev() {
        let den = diag[i].clone() + sup[i].clone() * alpha[i + 1].clone();
        alpha[i] = T::zero() - sub[i].clone() / den.clone();
        beta[i] = (rhs[i].clone() - sup[i].clone() * beta[i + 1].clone()) / den;
    }
    let mut x = vec![T::zero(); n];
    x[0] = (rhs[0].clone() - sup[0].clone() * beta[1].clone()) / (diag[0].clone() + sup[0].clone() * alpha[1].clone());
    for i in 1..n {
        x[i] = alpha[i].clone() * x[i - 1].clone() + beta[i].clone();
    }
    x
}

fn residuals<T: Num + Clone>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T], x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut r = rhs[i].clone() - diag[i].clone() * x[i].clone();
            if i > 0 {
                r = r - sub[i].clone() * x[i - 1].clone();
            }
            if i + 1 < n {
                r = r - sup[i].clone() * x[i + 1].clone();
            }
            r
        })
        .collect()
}

fn weights(n: u32) -> Vec<f64> {
    let big_n = num_sites(n) as f64;
    (0..n).map(|k| 2f64.powi(k as i32) / big_n).collect()
}

pub fn hitting_times(n: u32) -> Result<HittingTimes> {
    if !(2..=crate::tree::MAX_DEPTH).contains(&n) {
        return Err(invalid(format!("hitting times need 2 <= n <= 64, got {n}")));
    }
    let m = n as usize;
    let w = weights(n);
    if n <= MAX_EXACT_DEPTH {
        let (sub, diag, sup, rhs) = level_system(m, |v| BigRational::from_integer(v.into()));
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let big_n = BigRational::from_integer(BigInt::from(num_sites(n)));
        let average = x
            .iter()
            .enumerate()
            .map(|(k, t)| t * BigRational::from_integer(BigInt::one() << k))
            .fold(BigRational::zero(), |a, b| a + b)
            / &big_n;
        let per_level: Vec<f64> = x.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect();
        let weighted = x
            .iter()
            .enumerate()
            .map(|(k, t)| (t * BigRational::from_integer(BigInt::one() << k) / &big_n).to_f64().unwrap_or(f64::NAN))
            .collect();
        return Ok(HittingTimes {
            n,
            per_level,
            weighted,
            average: average.to_f64().unwrap_or(f64::NAN),
            exact: Some(ExactHittingTimes { per_level: x, average }),
        });
    }
    let (sub, diag, sup, rhs) = level_system(m, f64::from);
    let x = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    let weighted: Vec<f64> = x.iter().zip(&w).map(|(t, w)| t * w).collect();
    let average = weighted.iter().sum();
    Ok(HittingTimes { n, per_level: x, weighted, average, exact: None })
}

impl HittingTimes {
    /// Largest absolute residual of the interior recurrence rows.
    pub fn max_residual(&self) -> f64 {
        let (sub, diag, sup, rhs) = level_system(self.per_level.len(), f64::from);
        residuals(&sub, &diag, &sup, &rhs, &self.per_level)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    /// CSV with header `k,t_k,weighted_t_k`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "t_k", "weighted_t_k"])?;
        for (k, (t, wt)) in self.per_level.iter().zip(&self.weighted).enumerate() {
            w.write_record([(k + 1).to_string(), t.to_string(), wt.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evidence for the linear classical average search time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub n: u32,
    pub num_sites: u64,
    pub t2: f64,
    /// `t_2 = N - 2`, checked exactly when rational arithmetic was used.
    pub t2_is_n_minus_2: bool,
    pub exact: bool,
    pub all_integers: Option<bool>,
    pub average: f64,
    /// `t_2 (N - 1) / N`, a lower bound on the average.
    pub lower_bound: f64,
    pub average_above_bound: bool,
    pub t2_over_n: f64,
}

pub fn classical_complexity_class(n: u32) -> Result<ComplexityReport> {
    let h = hitting_times(n)?;
    let big_n = num_sites(n);
    let t2 = h.per_level[1];
    let t2_is_n_minus_2 = match &h.exact {
        Some(ex) => ex.per_level[1] == BigRational::from_integer(BigInt::from(big_n) - 2),
        None => ((t2 - (big_n as f64 - 2.0)) / big_n as f64).abs() < 1e-12,
    };
    let lower_bound = t2 * (big_n as f64 - 1.0) / big_n as f64;
    Ok(ComplexityReport {
        n,
        num_sites: big_n,
        t2,
        t2_is_n_minus_2,
        exact: h.exact.is_some(),
        all_integers: h.exact.as_ref().map(ExactHittingTimes::all_integers),
        average: h.average,
        lower_bound,
        average_above_bound: h.average >= lower_bound * (1.0 - 1e-12),
        t2_over_n: t2 / big_n as f64,
    })
}

/// Monte Carlo estimate of a hitting time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub walks: u64,
    pub mean: f64,
    pub std_err: f64,
}

/// Number of steps for one walker from `level` to the root.
fn walk_to_root<R: Rng>(rng: &mut R, n: u32, mut level: u32) -> u64 {
    let mut steps = 0;
    while level > 1 {
        steps += 1;
        if level == n || rng.random_range(0..3) == 0 {
            level -= 1;
        } else {
            level += 1;
        }
    }
    steps
}

/// Simulates `walks` walkers from `start_level`, split into `batches`
/// independent streams of one seed. The result does not depend on the
/// thread count.
pub fn monte_carlo_hitting_time(
    n: u32,
    start_level: u32,
    walks: u64,
    batches: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n < 2 || start_level < 1 || start_level > n {
        return Err(invalid("monte carlo needs n >= 2 and 1 <= start_level <= n"));
    }
    if walks < 2 || batches == 0 {
        return Err(invalid("monte carlo needs at least two walks and one batch"));
    }
    let batches = batches.min(walks);
    let per_batch: Vec<(u64, u128)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = walks / batches + u64::from(b < walks % batches);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut sum = 0u64;
            let mut sum_sq = 0u128;
            for _ in 0..count {
                let s = walk_to_root(&mut rng, n, start_level);
                sum += s;
                sum_sq += (s as u128) * (s as u128);
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = per_batch.iter().fold((0u64, 0u128), |(a, b), &(s, q)| (a + s, b + q));
    let w = walks as f64;
    let mean = sum as f64 / w;
    let var = (sum_sq as f64 - w * mean * mean) / (w - 1.0);
    Ok(MonteCarloEstimate { walks, mean, std_err: (var.max(0.0) / w).sqrt() })
}

/// Exact integer `t_k`, when the exact solve produced one.
pub fn exact_integer(t: &BigRational) -> Option<BigInt> {
    t.is_integer().then(|| t.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(n: u32) -> Vec<BigInt> {
        hitting_times(n).unwrap().exact.unwrap().per_level.iter().map(|t| exact_integer(t).unwrap()).collect()
    }

    #[test]
    fn small_depths() {
        assert_eq!(exact(2), vec![BigInt::from(0), BigInt::from(1)]);
        assert_eq!(exact(3), vec![BigInt::from(0), BigInt::from(5), BigInt::from(6)]);
        let h = hitting_times(3).unwrap();
        assert_eq!(h.exact.unwrap().average, BigRational::new(34.into(), 7.into()));
        assert!((h.average - 34.0 / 7.0).abs() < 1e-15);
        assert!(hitting_times(1).is_err());
    }

    #[test]
    fn t2_is_n_minus_2_exactly() {
        for n in 2..=MAX_EXACT_DEPTH {
            let t = exact(n);
            assert_eq!(t[1], BigInt::from(num_sites(n) - 2));
            assert_eq!(t[0], BigInt::zero());
            assert_eq!(&t[n as usize - 1] - &t[n as usize - 2], BigInt::one());
            assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(exact(20)[1], BigInt::from((1u64 << 20) - 3));
    }

    #[test]
    fn residuals_small() {
        for n in [5, 17, 30, 31, 45, 64] {
            let h = hitting_times(n).unwrap();
            let scale = h.per_level.last().unwrap().max(1.0);
            assert!(h.max_residual() <= 1e-9 * scale.max(1.0), "n={n}");
        }
    }

    #[test]
    fn float_path_agrees_with_exact_formula() {
        let h = hitting_times(40).unwrap();
        assert!(h.exact.is_none());
        let want = num_sites(40) as f64 - 2.0;
        assert!((h.per_level[1] / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complexity_report() {
        let r = classical_complexity_class(10).unwrap();
        assert_eq!(r.t2, 1021.0);
        assert!(r.t2_is_n_minus_2 && r.average_above_bound && r.exact);
        assert_eq!(r.all_integers, Some(true));
        let big = classical_complexity_class(50).unwrap();
        assert!((big.t2_over_n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_hitting_time(5, 2, 20_000, 8, 7).unwrap();
        let b = monte_carlo_hitting_time(5, 2, 20_000, 8, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.mean - 29.0).abs() < 4.0 * a.std_err);
        assert_eq!(monte_carlo_hitting_time(5, 1, 100, 4, 0).unwrap().mean, 0.0);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        hitting_times(3).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "k,t_k,weighted_t_k");
        assert_eq!(rows[2], format!("2,5,{}", 10.0 / 7.0));
    }
}
