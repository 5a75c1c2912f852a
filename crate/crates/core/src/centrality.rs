//! Path-based centrality of a site on level `l`, normalized by the center
//! of the star graph with the same number of sites.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::search::beta_prediction;
use crate::tree::{degree_at_level, num_sites, TreeParams};

fn check(n: u32, l: u32) -> Result<()> {
    TreeParams::new(n, l, 0.0).map(|_| ())
}

fn pow2(k: u32) -> u128 {
    1u128 << k
}

/// `sum_{j=0}^{m-1} j 2^j`
fn weighted_level_sum(m: u32) -> u128 {
    if m == 0 {
        return 0;
    }
    // (m - 2) 2^m + 2, written to stay nonnegative
    (m as u128) * pow2(m) + 2 - 2 * pow2(m)
}

/// Total distance from a site on level `l` to every other site.
pub fn distance_sum(n: u32, l: u32) -> Result<u128> {
    check(n, l)?;
    // descendants: 2^j sites at distance j
    let mut total = weighted_level_sum(n - l + 1);
    for k in 1..l {
        let up = (l - k) as u128;
        // the ancestor itself
        total += up;
        // sibling subtree below level k: 2^j sites at distance up + 1 + j
        let depth = n - k;
        total += (up + 1) * (pow2(depth) - 1) + weighted_level_sum(depth);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    pub distance_sum: u128,
    /// `1 / sum_j d(j, v)`; absent for a single-site tree.
    pub raw: Option<f64>,
    /// `raw * (N - 1)`.
    pub normalized: Option<f64>,
}

pub fn closeness(n: u32, l: u32) -> Result<Closeness> {
    let sum = distance_sum(n, l)?;
    if sum == 0 {
        return Ok(Closeness { distance_sum: 0, raw: None, normalized: None });
    }
    let s = sum as f64;
    Ok(Closeness { distance_sum: sum, raw: Some(1.0 / s), normalized: Some((num_sites(n) - 1) as f64 / s) })
}

/// Mean distance from level `l` to the other sites.
pub fn mean_distance(n: u32, l: u32) -> Result<f64> {
    let sum = distance_sum(n, l)?;
    if n == 1 {
        return Err(invalid("mean distance undefined for a single site"));
    }
    Ok(sum as f64 / (num_sites(n) - 1) as f64)
}

/// Closeness constant `kappa` with `C_C ~ (kappa n)^{-1}` for `l = rho n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    /// mean distance / n
    pub raw: f64,
    /// growth of the mean distance per unit depth over the last 4 levels
    pub extrapolated: f64,
}

fn level_for(rho: f64, n: u32) -> u32 {
    ((rho * n as f64).round() as u32).clamp(1, n)
}

pub fn kappa_hat(n: u32, rho: f64) -> Result<KappaEstimate> {
    if n < 6 || !(0.0..=1.0).contains(&rho) {
        return Err(invalid("kappa estimate needs n >= 6 and 0 <= rho <= 1"));
    }
    let d1 = mean_distance(n, level_for(rho, n))?;
    let d0 = mean_distance(n - 4, level_for(rho, n - 4))?;
    Ok(KappaEstimate { raw: d1 / n as f64, extrapolated: (d1 - d0) / 4.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Betweenness {
    /// Ordered pairs `(i, j)` whose path passes through the site.
    pub raw: u128,
    /// `raw / ((N - 1)(N - 2))`; absent when `N < 3`.
    pub normalized: Option<f64>,
}

/// Sizes of the components left after removing a site on level `l`.
pub fn component_sizes(n: u32, l: u32) -> Result<Vec<u128>> {
    check(n, l)?;
    let big_n = pow2(n) - 1;
    let mut c = Vec::with_capacity(3);
    if l < n {
        let sub = pow2(n - l) - 1;
        c.push(sub);
        c.push(sub);
    }
    if l > 1 {
        c.push(big_n - (pow2(n - l + 1) - 1));
    }
    Ok(c)
}

pub fn betweenness(n: u32, l: u32) -> Result<Betweenness> {
    let comps = component_sizes(n, l)?;
    let big_n = pow2(n) - 1;
    let others = big_n - 1;
    let raw = others * others - comps.iter().map(|c| c * c).sum::<u128>();
    let normalized = (big_n >= 3).then(|| raw as f64 / (others as f64 * (big_n - 2) as f64));
    Ok(Betweenness { raw, normalized })
}

/// Largest distance from a site on level `l`.
pub fn eccentricity(n: u32, l: u32) -> Result<u32> {
    check(n, l)?;
    Ok(if n == 1 { 0 } else { (n + l - 2).max(n - l) })
}

/// Degree centrality `deg / (N - 1)`.
pub fn degree_centrality(n: u32, l: u32) -> Result<Option<f64>> {
    check(n, l)?;
    Ok((n > 1).then(|| degree_at_level(n, l) as f64 / (num_sites(n) - 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub n: u32,
    pub site_level: u32,
    pub closeness: Closeness,
    pub betweenness: Betweenness,
    pub degree: Option<f64>,
    pub eccentricity: u32,
}

pub fn centrality_report(n: u32, l: u32) -> Result<CentralityReport> {
    Ok(CentralityReport {
        n,
        site_level: l,
        closeness: closeness(n, l)?,
        betweenness: betweenness(n, l)?,
        degree: degree_centrality(n, l)?,
        eccentricity: eccentricity(n, l)?,
    })
}

/// One row of the level table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub l: u32,
    pub rho: f64,
    /// Asymptotic exponent `1/2 + rho/2`.
    pub beta_pred: f64,
    /// Finite-size prediction `1/2 + l/(2n)`.
    pub beta_finite: f64,
    pub closeness_norm: f64,
    pub kappa: KappaEstimate,
    pub betweenness_norm: f64,
    /// Local exponent `e` in `C_B ~ N^{-e}`, absent when `C_B = 0`.
    pub betweenness_exponent: Option<f64>,
    /// `kappa_hat` within 2% of `2 beta_pred`.
    pub kappa_matches_2beta: bool,
}

pub const TABLE_RATIOS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub fn centrality_table(n: u32) -> Result<Vec<CentralityRow>> {
    if n < 8 || n % 4 != 0 || n > crate::tree::MAX_DEPTH {
        return Err(invalid(format!("centrality table needs n divisible by 4 with 8 <= n <= 64, got {n}")));
    }
    TABLE_RATIOS
        .iter()
        .map(|&rho| {
            let l = level_for(rho, n);
            let kappa = kappa_hat(n, rho)?;
            let cb = betweenness(n, l)?.normalized.unwrap_or(0.0);
            let cb_prev = betweenness(n - 4, level_for(rho, n - 4))?.normalized.unwrap_or(0.0);
            let betweenness_exponent = (cb > 0.0 && cb_prev > 0.0).then(|| {
                -(cb.ln() - cb_prev.ln()) / (crate::tree::ln_num_sites(n) - crate::tree::ln_num_sites(n - 4))
            });
            let beta_pred = 0.5 + rho / 2.0;
            Ok(CentralityRow {
                l,
                rho,
                beta_pred,
                beta_finite: beta_prediction(l, n),
                closeness_norm: closeness(n, l)?.normalized.unwrap_or(0.0),
                kappa,
                betweenness_norm: cb,
                betweenness_exponent,
                kappa_matches_2beta: (kappa.extrapolated / (2.0 * beta_pred) - 1.0).abs() <= 0.02,
            })
        })
        .collect()
}

/// CSV with header `l,beta_pred,closeness_norm,kappa_hat,betweenness_norm`.
pub fn write_table_csv<W: Write>(rows: &[CentralityRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["l", "beta_pred", "closeness_norm", "kappa_hat", "betweenness_norm"])?;
    for r in rows {
        w.write_record([
            r.l.to_string(),
            r.beta_pred.to_string(),
            r.closeness_norm.to_string(),
            r.kappa.extrapolated.to_string(),
            r.betweenness_norm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
