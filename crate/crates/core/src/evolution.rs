//! Spectral time evolution and measurement-time extraction.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, SpectralDecomposition};
use crate::error::{invalid, Error, Result};
use crate::reduction::ReducedSystem;
use crate::search::beta_prediction;

/// Marked-site spectral weights `c_k = <w|v_k><v_k|s>`.
///
/// `<w|psi(t)> = sum_k c_k exp(-i lambda_k t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedSpectrum {
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MarkedSpectrum {
    pub fn of(sys: &ReducedSystem) -> Result<Self> {
        let sw = eigen::spectral_weights(&sys.hamiltonian(), &sys.marked_vector(), &sys.initial_state)?;
        Ok(MarkedSpectrum { eigenvalues: sw.eigenvalues, weights: sw.weights })
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (&lam, &c) in self.eigenvalues.iter().zip(&self.weights) {
            let (s, co) = (lam * t).sin_cos();
            re += c * co;
            im -= c * s;
        }
        Complex64::new(re, im)
    }

    pub fn probability(&self, t: f64) -> f64 {
        self.amplitude(t).norm_sqr()
    }

    /// Indices of the two components with the largest `|c_k|`.
    pub fn dominant_pair(&self) -> Option<(usize, usize)> {
        if self.weights.len() < 2 {
            return None;
        }
        let mut idx: Vec<usize> = (0..self.weights.len()).collect();
        idx.sort_by(|&a, &b| self.weights[b].abs().total_cmp(&self.weights[a].abs()).then(a.cmp(&b)));
        Some((idx[0], idx[1]))
    }

    /// Beat period `2 pi / |lambda_a - lambda_b|` of the dominant pair.
    pub fn wavelength(&self) -> Option<f64> {
        let (a, b) = self.dominant_pair()?;
        let scale = self.weights[a].abs();
        if self.weights[b].abs() <= 1e-12 * scale {
            return None;
        }
        let gap = (self.eigenvalues[a] - self.eigenvalues[b]).abs();
        (gap > 0.0).then(|| 2.0 * PI / gap).filter(|w| w.is_finite())
    }

    /// `2 pi` over the smallest resolvable gap between consecutive eigenvalues.
    pub fn gap_wavelength(&self) -> Option<f64> {
        let scale = self.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g > 1e-12 * scale)
            .min_by(f64::total_cmp)
            .map(|g| 2.0 * PI / g)
    }
}

/// Marked-site amplitude sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

impl EvolutionTrace {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_probability(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max)
    }

    /// CSV with header `t,re_amp,im_amp,prob`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_amp", "im_amp", "prob"])?;
        for (&t, a) in self.times.iter().zip(&self.amplitudes) {
            w.write_record([sig15(t), sig15(a.re), sig15(a.im), sig15(a.norm_sqr())])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats with 15 significant digits.
pub fn sig15(x: f64) -> String {
    format!("{:.14e}", x)
}

/// Evenly spaced grid of `samples` points on `[0, t_max]`.
pub fn linear_grid(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect(),
    }
}

pub fn evolve_amplitude(sys: &ReducedSystem, times: &[f64]) -> Result<EvolutionTrace> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let spec = MarkedSpectrum::of(sys)?;
    Ok(trace_from_spectrum(&spec, times))
}

pub fn trace_from_spectrum(spec: &MarkedSpectrum, times: &[f64]) -> EvolutionTrace {
    EvolutionTrace { times: times.to_vec(), amplitudes: times.iter().map(|&t| spec.amplitude(t)).collect() }
}

/// Full reduced-state propagator `exp(-i H t) psi(0)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub decomposition: SpectralDecomposition,
    overlaps: Vec<f64>,
}

impl Propagator {
    pub fn new(sys: &ReducedSystem) -> Result<Self> {
        Self::from_matrix(&sys.hamiltonian(), &sys.initial_state)
    }

    pub fn from_matrix(h: &nalgebra::DMatrix<f64>, psi0: &[f64]) -> Result<Self> {
        if psi0.len() != h.nrows() {
            return Err(invalid("initial state length does not match the Hamiltonian"));
        }
        let decomposition = eigen::decompose(h)?;
        let psi0 = DVector::from_column_slice(psi0);
        let overlaps = (0..decomposition.dim())
            .map(|k| decomposition.eigenvectors.column(k).dot(&psi0))
            .collect();
        Ok(Propagator { decomposition, overlaps })
    }

    pub fn state(&self, t: f64) -> Vec<Complex64> {
        let m = self.decomposition.dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); m];
        for (k, &ov) in self.overlaps.iter().enumerate() {
            let phase = Complex64::from_polar(ov, -self.decomposition.eigenvalues[k] * t);
            for (p, &v) in psi.iter_mut().zip(self.decomposition.eigenvectors.column(k).iter()) {
                *p += phase * v;
            }
        }
        psi
    }
}

/// Controls the measurement-time search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPolicy {
    /// Minimum peak height in units of the `t = 0` probability.
    pub threshold: f64,
    pub samples_per_wavelength: usize,
    /// Relative time tolerance of the golden-section refinement.
    pub rel_tol: f64,
    /// Initial horizon is `horizon_factor * N^beta_pred`.
    pub horizon_factor: f64,
    pub max_doublings: u32,
    /// Scan budget in coarse samples.
    pub max_samples: usize,
}

impl Default for PeakPolicy {
    fn default() -> Self {
        PeakPolicy {
            threshold: 64.0,
            samples_per_wavelength: 64,
            rel_tol: 1e-6,
            horizon_factor: 8.0,
            max_doublings: 10,
            max_samples: 4096,
        }
    }
}

impl PeakPolicy {
    pub fn with_threshold(self, threshold: f64) -> Self {
        PeakPolicy { threshold, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub time: f64,
    pub probability: f64,
    /// Coarse scan step used to find the peak.
    pub step: f64,
    /// Horizon `H0 * 2^k` that contained the peak.
    pub horizon: f64,
}

impl Peak {
    pub fn efficiency(&self) -> f64 {
        self.time / self.probability
    }
}

/// First qualifying probability maximum of `prob` on `t >= 0`.
///
/// The scan uses step `wavelength / samples_per_wavelength` (or
/// `horizon / max_samples` when no wavelength is known) and stops after
/// `max_samples` steps or at `horizon * 2^max_doublings`. A local maximum
/// qualifies when it reaches `threshold * baseline` and the signal then
/// drops to half its height before exceeding it.
pub fn find_first_peak<F: Fn(f64) -> f64>(
    prob: F,
    baseline: f64,
    wavelength: Option<f64>,
    horizon: f64,
    policy: &PeakPolicy,
) -> Result<Peak> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let step = match wavelength {
        Some(w) if w > 0.0 && w.is_finite() => w / policy.samples_per_wavelength as f64,
        _ => horizon / policy.max_samples as f64,
    };
    let cap = horizon * 2f64.powi(policy.max_doublings as i32);
    let limit = cap.min(step * policy.max_samples as f64);
    let level = policy.threshold * baseline;

    let at = |i: usize| i as f64 * step;
    let mut p = vec![prob(0.0), prob(step)];
    let mut max_seen = p[0].max(p[1]);
    let mut i = 1;
    while at(i) <= limit {
        if p.len() < i + 2 {
            p.push(prob(at(i + 1)));
            max_seen = max_seen.max(p[i + 1]);
        }
        if p[i] >= p[i - 1] && p[i] > p[i + 1] && p[i] >= level {
            let mut j = i + 1;
            let confirmed = loop {
                if p[j] > p[i] {
                    break false;
                }
                if p[j] <= 0.5 * p[i] {
                    break true;
                }
                if j > i + policy.max_samples {
                    break false;
                }
                j += 1;
                if j == p.len() {
                    p.push(prob(at(j)));
                    max_seen = max_seen.max(p[j]);
                }
            };
            if confirmed {
                let (t, pt) = golden_max(&prob, at(i - 1), at(i + 1), policy.rel_tol * at(i));
                let (time, probability) = if pt >= p[i] { (t, pt) } else { (at(i), p[i]) };
                let mut h = horizon;
                while h < time {
                    h *= 2.0;
                }
                return Ok(Peak { time, probability, step, horizon: h });
            }
        }
        i += 1;
    }
    Err(Error::NoPeak { horizon: limit, max_prob: max_seen })
}

/// Golden-section maximization on `[a, b]` down to bracket width `tol`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let tol = tol.max(4.0 * f64::EPSILON * b.abs());
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Initial scan horizon `horizon_factor * N^beta_pred(l)`.
pub fn initial_horizon(n: u32, l: u32, policy: &PeakPolicy) -> f64 {
    let ln_n = crate::tree::ln_num_sites(n);
    policy.horizon_factor * (beta_prediction(l, n) * ln_n).exp()
}

pub fn first_peak_of_spectrum(spec: &MarkedSpectrum, n: u32, l: u32, policy: &PeakPolicy) -> Result<Peak> {
    let baseline = spec.probability(0.0);
    find_first_peak(|t| spec.probability(t), baseline, spec.wavelength(), initial_horizon(n, l, policy), policy)
}

/// Measurement time `t0` and success probability `p(t0)` of a reduced system.
pub fn first_peak(sys: &ReducedSystem, policy: &PeakPolicy) -> Result<Peak> {
    let spec = MarkedSpectrum::of(sys)?;
    first_peak_of_spectrum(&spec, sys.params.n, sys.params.l, policy)
}
