//! Gamma sweeps, efficiency and scaling-exponent extraction.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{first_peak_of_spectrum, golden_max, initial_horizon, MarkedSpectrum, Peak, PeakPolicy};
use crate::reduction::{reduce_comb, verify_reduction, ReducedSystem, VerificationReport};
use crate::tree::{build_full_hamiltonian, degree_at_level, ln_num_sites, num_sites, TreeParams};

/// Predicted scaling exponent `1/2 + l/(2n)`.
pub fn beta_prediction(l: u32, n: u32) -> f64 {
    0.5 + l as f64 / (2.0 * n as f64)
}

/// Degree of the marked site on level `l`.
pub fn marked_degree(n: u32, l: u32) -> u32 {
    degree_at_level(n, l)
}

/// Heuristic optimal `gamma`, used to center grids and as a default.
pub fn gamma_star_rule(l: u32, n: u32) -> f64 {
    if l == n && n > 1 {
        2.0
    } else if l == 1 {
        1.0
    } else if l == 2 {
        0.75
    } else {
        2.0 / 3.0
    }
}

/// Whether a system admits a useful search peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Search { peak: Peak },
    /// Only trivial oscillations: runtime grows linearly in `N`.
    Linear { max_prob: f64 },
}

pub fn classify(sys: &ReducedSystem, policy: &PeakPolicy) -> Result<Regime> {
    match crate::evolution::first_peak(sys, policy) {
        Ok(peak) => Ok(Regime::Search { peak }),
        Err(Error::NoPeak { max_prob, .. }) => Ok(Regime::Linear { max_prob }),
        Err(e) => Err(e),
    }
}

/// Efficiency `t0 / p(t0)`; fails with `NoPeak` in the linear regime.
pub fn efficiency(sys: &ReducedSystem, policy: &PeakPolicy) -> Result<f64> {
    crate::evolution::first_peak(sys, policy).map(|p| p.efficiency())
}

/// Largest marked-site probability over the scan window used by the peak
/// search, refined by golden section.
pub fn max_probability(spec: &MarkedSpectrum, n: u32, l: u32, policy: &PeakPolicy) -> f64 {
    let horizon = initial_horizon(n, l, policy);
    let step = match spec.wavelength() {
        Some(w) => w / policy.samples_per_wavelength as f64,
        None => horizon / policy.max_samples as f64,
    };
    let limit = (horizon * 2f64.powi(policy.max_doublings as i32)).min(step * policy.max_samples as f64);
    let samples = (limit / step).ceil() as usize;
    let (mut best_i, mut best) = (0, spec.probability(0.0));
    for i in 1..=samples {
        let p = spec.probability(i as f64 * step);
        if p > best {
            best = p;
            best_i = i;
        }
    }
    if best_i == 0 {
        return best;
    }
    let t = best_i as f64 * step;
    let (_, refined) = golden_max(&|t| spec.probability(t), t - step, t + step, policy.rel_tol * t);
    best.max(refined)
}

/// One evaluated point of a gamma sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub max_prob: f64,
    pub peak: Option<Peak>,
}

impl SweepPoint {
    pub fn efficiency(&self) -> Option<f64> {
        self.peak.map(|p| p.efficiency())
    }
}

pub fn evaluate_gamma(n: u32, l: u32, gamma: f64, policy: &PeakPolicy) -> Result<SweepPoint> {
    let sys = reduce_comb(TreeParams::new(n, l, gamma)?)?;
    let spec = MarkedSpectrum::of(&sys)?;
    let peak = match first_peak_of_spectrum(&spec, n, l, policy) {
        Ok(p) => Some(p),
        Err(Error::NoPeak { .. }) => None,
        Err(e) => return Err(e),
    };
    let max_prob = max_probability(&spec, n, l, policy).max(peak.map_or(0.0, |p| p.probability));
    Ok(SweepPoint { gamma, max_prob, peak })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPolicy {
    pub gamma_max: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
    /// Half-width of the refinement window around each optimum.
    pub refine_halfwidth: f64,
    pub peak: PeakPolicy,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        SweepPolicy {
            gamma_max: 3.0,
            coarse_step: 0.05,
            fine_step: 0.005,
            refine_halfwidth: 0.05,
            peak: PeakPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSweep {
    pub n: u32,
    pub l: u32,
    pub marked_degree: u32,
    /// All evaluated points, ascending in gamma.
    pub points: Vec<SweepPoint>,
    /// Argmax of `max_prob`.
    pub gamma_prime_star: f64,
    pub p_max: f64,
    /// Argmin of the efficiency, absent when no gamma yields a search peak.
    pub gamma_star: Option<f64>,
}

impl GammaSweep {
    fn optima(points: &[SweepPoint]) -> (usize, Option<usize>) {
        let mut arg_p = 0;
        let mut arg_e: Option<usize> = None;
        for (i, p) in points.iter().enumerate() {
            if p.max_prob > points[arg_p].max_prob {
                arg_p = i;
            }
            if let Some(e) = p.efficiency() {
                if arg_e.is_none_or(|j| e < points[j].efficiency().unwrap_or(f64::INFINITY)) {
                    arg_e = Some(i);
                }
            }
        }
        (arg_p, arg_e)
    }

    pub fn point(&self, gamma: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.gamma - gamma).abs() < 1e-12)
    }

    /// CSV with header `gamma,max_prob,t0,p0,efficiency`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gamma", "max_prob", "t0", "p0", "efficiency"])?;
        for p in &self.points {
            let (t0, p0, eff) = match p.peak {
                Some(pk) => (pk.time.to_string(), pk.probability.to_string(), pk.efficiency().to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([format!("{:.3}", p.gamma), p.max_prob.to_string(), t0, p0, eff])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Coarse sweep over `(0, gamma_max]` then fine refinement around both
/// optima. Points are evaluated in parallel and merged by grid key.
pub fn sweep_gamma(n: u32, l: u32, policy: &SweepPolicy) -> Result<GammaSweep> {
    TreeParams::new(n, l, 1.0)?;
    if !(policy.fine_step > 0.0 && policy.coarse_step >= policy.fine_step && policy.gamma_max > 0.0) {
        return Err(invalid("sweep needs 0 < fine_step <= coarse_step and gamma_max > 0"));
    }
    let ratio = (policy.coarse_step / policy.fine_step).round() as i64;
    if ratio < 1 || ((ratio as f64) * policy.fine_step - policy.coarse_step).abs() > 1e-9 {
        return Err(invalid("coarse_step must be a multiple of fine_step"));
    }
    let max_key = (policy.gamma_max / policy.fine_step + 1e-9).floor() as i64;
    let gamma_of = |k: i64| k as f64 * policy.fine_step;
    let eval = |keys: Vec<i64>| -> Result<Vec<(i64, SweepPoint)>> {
        keys.into_par_iter()
            .map(|k| evaluate_gamma(n, l, gamma_of(k), &policy.peak).map(|p| (k, p)))
            .collect()
    };

    let coarse: Vec<i64> = (1..).map(|i| i * ratio).take_while(|&k| k <= max_key).collect();
    if coarse.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut pts = eval(coarse)?;
    let (ap, ae) = GammaSweep::optima(&pts.iter().map(|x| x.1).collect::<Vec<_>>());
    let half = (policy.refine_halfwidth / policy.fine_step).round() as i64;
    let mut fine: Vec<i64> = Vec::new();
    for centre in [Some(pts[ap].0), ae.map(|i| pts[i].0)].into_iter().flatten() {
        fine.extend((centre - half..=centre + half).filter(|&k| k >= 1 && k <= max_key));
    }
    fine.sort_unstable();
    fine.dedup();
    fine.retain(|k| !pts.iter().any(|(c, _)| c == k));
    pts.extend(eval(fine)?);
    pts.sort_by_key(|x| x.0);

    let points: Vec<SweepPoint> = pts.into_iter().map(|x| x.1).collect();
    let (ap, ae) = GammaSweep::optima(&points);
    Ok(GammaSweep {
        n,
        l,
        marked_degree: marked_degree(n, l),
        gamma_prime_star: points[ap].gamma,
        p_max: points[ap].max_prob,
        gamma_star: ae.map(|i| points[i].gamma),
        points,
    })
}

/// How the marked level follows the depth in a scaling run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LevelPolicy {
    Fixed(u32),
    /// `l = max(1, round(rho n))`
    Proportional(f64),
}

impl LevelPolicy {
    pub fn level(&self, n: u32) -> Result<u32> {
        let l = match *self {
            LevelPolicy::Fixed(l) => l,
            LevelPolicy::Proportional(rho) => {
                if !(0.0..=1.0).contains(&rho) {
                    return Err(invalid(format!("level ratio {rho} outside [0, 1]")));
                }
                ((rho * n as f64).round() as u32).max(1)
            }
        };
        if l < 1 || l > n {
            return Err(invalid(format!("level {l} outside 1..={n}")));
        }
        Ok(l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GammaPolicy {
    Fixed(f64),
    /// [`gamma_star_rule`] at every size.
    Rule,
}

impl GammaPolicy {
    pub fn gamma(&self, n: u32, l: u32) -> f64 {
        match *self {
            GammaPolicy::Fixed(g) => g,
            GammaPolicy::Rule => gamma_star_rule(l, n),
        }
    }
}

/// Which local slopes enter the extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FitWindow {
    All,
    /// Slopes whose lower size is at least `n_max / 2`.
    UpperHalf,
    From(u32),
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow::UpperHalf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeResult {
    pub n: u32,
    pub num_sites: u64,
    pub l: u32,
    pub gamma: f64,
    pub peak: Option<Peak>,
    /// Slope from the previous included size to this one.
    pub local_slope: Option<f64>,
    /// Whether this slope entered the fit.
    pub fitted: bool,
}

impl SizeResult {
    pub fn metric(&self) -> Option<f64> {
        self.peak.map(|p| p.efficiency())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub level_policy: LevelPolicy,
    pub gamma_policy: GammaPolicy,
    pub window: FitWindow,
    pub sizes: Vec<SizeResult>,
    /// Sizes without a search peak, left out of the fit.
    pub excluded: Vec<u32>,
    pub beta: f64,
    pub beta_stderr: Option<f64>,
    /// Slope of the local slopes against `1/n`.
    pub fit_slope: f64,
    /// Prediction at the largest size.
    pub beta_prediction: f64,
    pub in_sanity_band: bool,
}

pub const SANITY_BAND: (f64, f64) = (0.4, 1.1);

impl ScalingFit {
    pub fn local_slopes(&self) -> Vec<(u32, f64)> {
        self.sizes.iter().filter_map(|s| s.local_slope.map(|v| (s.n, v))).collect()
    }

    /// CSV with header `n,N,t0,p0,metric,local_slope`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "N", "t0", "p0", "metric", "local_slope"])?;
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for s in &self.sizes {
            w.write_record([
                s.n.to_string(),
                s.num_sites.to_string(),
                opt(s.peak.map(|p| p.time)),
                opt(s.peak.map(|p| p.probability)),
                opt(s.metric()),
                opt(s.local_slope),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub peak: PeakPolicy,
    pub window: FitWindow,
}

/// Least-squares line `y = a + b x`; returns `(a, b, stderr(a))`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, Option<f64>)> {
    let k = x.len();
    if k < 2 || y.len() != k {
        return None;
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let stderr = (k > 2).then(|| {
        let ssr: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
        let s2 = ssr / (kf - 2.0);
        let sum_x2: f64 = x.iter().map(|v| v * v).sum();
        (s2 * sum_x2 / (kf * sxx)).sqrt()
    });
    Some((a, b, stderr))
}

/// Runs the efficiency metric over `sizes` and extrapolates the local
/// log-log slopes to `1/n -> 0`.
pub fn scaling_experiment(
    level_policy: LevelPolicy,
    sizes: &[u32],
    gamma_policy: GammaPolicy,
    options: &ScalingOptions,
) -> Result<ScalingFit> {
    if sizes.len() < 4 {
        return Err(invalid("scaling needs at least 4 sizes"));
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut results: Vec<SizeResult> = sorted
        .par_iter()
        .map(|&n| -> Result<SizeResult> {
            let l = level_policy.level(n)?;
            let gamma = gamma_policy.gamma(n, l);
            let sys = reduce_comb(TreeParams::new(n, l, gamma)?)?;
            let peak = match crate::evolution::first_peak(&sys, &options.peak) {
                Ok(p) => Some(p),
                Err(Error::NoPeak { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SizeResult { n, num_sites: num_sites(n), l, gamma, peak, local_slope: None, fitted: false })
        })
        .collect::<Result<_>>()?;

    let excluded: Vec<u32> = results.iter().filter(|s| s.peak.is_none()).map(|s| s.n).collect();
    let n_max = *sorted.last().expect("nonempty");
    let start = match options.window {
        FitWindow::All => 0,
        FitWindow::UpperHalf => n_max.div_ceil(2),
        FitWindow::From(s) => s,
    };
    let mut prev: Option<(u32, f64)> = None;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for s in results.iter_mut() {
        let Some(metric) = s.metric() else { continue };
        if let Some((pn, pm)) = prev {
            let slope = (metric.ln() - pm.ln()) / (ln_num_sites(s.n) - ln_num_sites(pn));
            s.local_slope = Some(slope);
            if pn >= start {
                s.fitted = true;
                xs.push(2.0 / (s.n + pn) as f64);
                ys.push(slope);
            }
        }
        prev = Some((s.n, metric));
    }
    let (beta, fit_slope, beta_stderr) = line_fit(&xs, &ys)
        .ok_or_else(|| invalid(format!("fewer than two local slopes in the fit window (start n = {start})")))?;
    Ok(ScalingFit {
        level_policy,
        gamma_policy,
        window: options.window,
        beta_prediction: beta_prediction(level_policy.level(n_max)?, n_max),
        in_sanity_band: (SANITY_BAND.0..=SANITY_BAND.1).contains(&beta),
        sizes: results,
        excluded,
        beta,
        beta_stderr,
        fit_slope,
    })
}

/// `verify_reduction` outcome recorded next to comb-only results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n: u32,
    pub l: u32,
    pub gamma: f64,
    pub report: VerificationReport,
}

/// Verifies the comb at the largest explicitly checkable size `n_check`.
pub fn verification_provenance(level_policy: LevelPolicy, gamma_policy: GammaPolicy, n_check: u32) -> Result<Provenance> {
    let l = level_policy.level(n_check)?;
    let gamma = gamma_policy.gamma(n_check, l);
    let params = TreeParams::new(n_check, l, gamma)?;
    let full = build_full_hamiltonian(params, params.marked_site())?;
    let red = reduce_comb(params)?;
    let map = red.reduction_map()?;
    let report = verify_reduction(&full, &map, &red, 8)?;
    Ok(Provenance { n: n_check, l, gamma, report })
}
