//! Closed-form results for a marked root.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tree::num_sites;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Roots of `x^2 - ((3 - i alpha s)/sqrt 2) x + 1 = 0` with `|x0| <= |x1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRoots {
    pub x0: Complex64,
    pub x1: Complex64,
    /// Double root (discriminant zero).
    pub degenerate: bool,
}

impl QuadraticRoots {
    pub fn residual(&self, s: Complex64, gamma: f64) -> f64 {
        let b = linear_coeff(s, gamma);
        let r = |x: Complex64| (x * x - b * x + 1.0).norm();
        r(self.x0).max(r(self.x1))
    }
}

fn linear_coeff(s: Complex64, gamma: f64) -> Complex64 {
    (3.0 - I * s / gamma) / SQRT_2
}

pub fn solve_quadratic(s: Complex64, gamma: f64) -> Result<QuadraticRoots> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("solve_quadratic needs gamma > 0, got {gamma}")));
    }
    let b = linear_coeff(s, gamma);
    let disc = b * b - 4.0;
    let degenerate = disc.norm() <= 1e-12 * b.norm_sqr().max(1.0);
    let sq = disc.sqrt();
    let sq = if (b.conj() * sq).re >= 0.0 { sq } else { -sq };
    let big = (b + sq) / 2.0;
    if degenerate {
        let x = b / 2.0;
        return Ok(QuadraticRoots { x0: x, x1: x, degenerate });
    }
    let small = 1.0 / big;
    let (x0, x1) = match small.norm().total_cmp(&big.norm()) {
        std::cmp::Ordering::Less => (small, big),
        std::cmp::Ordering::Greater => (big, small),
        std::cmp::Ordering::Equal if small.re <= big.re => (small, big),
        std::cmp::Ordering::Equal => (big, small),
    };
    Ok(QuadraticRoots { x0, x1, degenerate })
}

fn check_depth(n: u32) -> Result<()> {
    if n < 2 || n > crate::tree::MAX_DEPTH {
        return Err(invalid(format!("root-case analytics need 2 <= n <= 64, got {n}")));
    }
    Ok(())
}

fn sqrt_n(n: u32) -> f64 {
    (num_sites(n) as f64).sqrt()
}

/// Numerator and denominator of the marked-site Laplace transform with
/// `x1^n` divided out.
fn laplace_parts(s: Complex64, n: u32, gamma: f64) -> Result<(Complex64, Complex64, QuadraticRoots)> {
    let q = solve_quadratic(s, gamma)?;
    let x0 = q.x0;
    let a = I * s + 1.0;
    let x_2n1 = x0.powu(2 * n - 1);
    let num = (1.0 - x_2n1 * x0) * I / sqrt_n(n);
    let den = a - SQRT_2 * x0 - x_2n1 * (a * x0 - SQRT_2);
    Ok((num, den, q))
}

/// Laplace transform of the marked-root amplitude.
pub fn laplace_psi1(s: Complex64, n: u32, gamma: f64) -> Result<Complex64> {
    check_depth(n)?;
    if !(s.re > 0.0) {
        return Err(invalid("laplace_psi1 needs Re s > 0"));
    }
    let (num, den, _) = laplace_parts(s, n, gamma)?;
    Ok(num / den)
}

/// Large-`n` limit `(i/sqrt N) / ((is + 1) - sqrt2 x0)`.
pub fn laplace_psi1_truncated(s: Complex64, n: u32, gamma: f64) -> Result<Complex64> {
    check_depth(n)?;
    let x0 = solve_quadratic(s, gamma)?.x0;
    Ok(I / sqrt_n(n) / (I * s + 1.0 - SQRT_2 * x0))
}

/// Small-`gamma` approximation of the marked-root amplitude.
pub fn approx_small_gamma(t: f64, gamma: f64, num_sites: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("small-gamma approximation needs 0 <= gamma < 1, got {gamma}")));
    }
    let norm = 1.0 / num_sites.sqrt();
    if gamma == 0.0 {
        return Ok(Complex64::from_polar(norm, t));
    }
    let a = 1.0 / gamma;
    let c0 = 1.0 / (1.0 - a);
    let c1 = (a * a + 2.0 * a - 1.0) / (a * a - 1.0);
    let w = (a - 1.0) / (a + 1.0);
    Ok((Complex64::from_polar(c1, w * t) + c0) * norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalForm {
    /// `(i/sqrt 2) sin(t / sqrt(2^{n+1}))`
    Sine,
    /// Contribution of the two poles nearest the origin, exact residues.
    Pair,
}

/// A pole of the Laplace transform and its residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub position: Complex64,
    pub residue: Complex64,
}

/// `g(s)` and `g'(s)` for the denominator at `gamma = 1`.
fn denominator_with_derivative(s: Complex64, n: u32) -> Result<(Complex64, Complex64, Complex64)> {
    let (num, den, q) = laplace_parts(s, n, 1.0)?;
    let x = q.x0;
    let b = linear_coeff(s, 1.0);
    let db = -I / SQRT_2;
    let dx = db * x / (2.0 * x - b);
    let a = I * s + 1.0;
    let x_2n2 = x.powu(2 * n - 2);
    let x_2n1 = x_2n2 * x;
    let dden = I - SQRT_2 * dx
        - ((2 * n - 1) as f64 * x_2n2 * dx * (a * x - SQRT_2) + x_2n1 * (I * x + a * dx));
    Ok((num, den, dden))
}

/// The pair of poles near `+-i / sqrt(2^{n+1})` (gamma = 1), by Newton
/// iteration on the denominator.
pub fn critical_poles(n: u32) -> Result<[Pole; 2]> {
    check_depth(n)?;
    let guess = 2f64.powf(-((n + 1) as f64) / 2.0);
    let mut out = [Pole { position: Complex64::new(0.0, 0.0), residue: Complex64::new(0.0, 0.0) }; 2];
    for (slot, sign) in out.iter_mut().zip([1.0, -1.0]) {
        let mut s = Complex64::new(0.0, sign * guess);
        let mut converged = false;
        for _ in 0..100 {
            let (_, g, dg) = denominator_with_derivative(s, n)?;
            let step = g / dg;
            s -= step;
            // g cancels down to rounding level near the root once n is large
            if step.norm() <= 1e-8 * s.norm() || g.norm() <= 1e-14 {
                let (_, g, dg) = denominator_with_derivative(s, n)?;
                s -= g / dg;
                converged = true;
                break;
            }
        }
        if !converged || !s.norm().is_finite() {
            return Err(Error::NoConvergence { index: (sign < 0.0) as usize, size: n as usize, fingerprint: 0 });
        }
        let (f, _, dg) = denominator_with_derivative(s, n)?;
        *slot = Pole { position: s, residue: f / dg };
    }
    Ok(out)
}

/// Critical-`gamma` approximation of the marked-root amplitude.
pub fn approx_critical(t: f64, n: u32, form: CriticalForm) -> Result<Complex64> {
    check_depth(n)?;
    match form {
        CriticalForm::Sine => {
            let scale = 2f64.powf((n + 1) as f64 / 2.0);
            Ok(I * (t / scale).sin() / SQRT_2)
        }
        CriticalForm::Pair => {
            let poles = critical_poles(n)?;
            Ok(poles.iter().map(|p| p.residue * (p.position * t).exp()).sum())
        }
    }
}

/// A root-case approximation ready for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootCaseApprox {
    SmallGamma { gamma: f64, n: u32 },
    CriticalPair { n: u32, poles: [Pole; 2] },
    CriticalSine { n: u32 },
}

impl RootCaseApprox {
    pub fn small_gamma(gamma: f64, n: u32) -> Result<Self> {
        check_depth(n)?;
        approx_small_gamma(0.0, gamma, 1.0)?;
        Ok(RootCaseApprox::SmallGamma { gamma, n })
    }

    pub fn critical(n: u32, form: CriticalForm) -> Result<Self> {
        check_depth(n)?;
        Ok(match form {
            CriticalForm::Sine => RootCaseApprox::CriticalSine { n },
            CriticalForm::Pair => RootCaseApprox::CriticalPair { n, poles: critical_poles(n)? },
        })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            RootCaseApprox::SmallGamma { gamma, n } => {
                approx_small_gamma(t, gamma, num_sites(n) as f64).expect("validated at construction")
            }
            RootCaseApprox::CriticalPair { poles, .. } => {
                poles.iter().map(|p| p.residue * (p.position * t).exp()).sum()
            }
            RootCaseApprox::CriticalSine { n } => {
                approx_critical(t, n, CriticalForm::Sine).expect("validated at construction")
            }
        }
    }
}

/// `pi * sqrt(2^{n+1})`, the critical-root runtime estimate.
pub fn asymptotic_runtime(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(invalid("asymptotic_runtime needs n >= 2"));
    }
    Ok(PI * 2f64.powf((n + 1) as f64 / 2.0))
}

/// `pi (a+1)^3 (a-1) / (a^2 (a+3)^2) * N` with `a = 1/gamma`.
pub fn small_gamma_efficiency(gamma: f64, num_sites: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid(format!("small_gamma_efficiency needs 0 < gamma < 1, got {gamma}")));
    }
    let a = 1.0 / gamma;
    Ok(PI * (a + 1.0).powi(3) * (a - 1.0) / (a * a * (a + 3.0).powi(2)) * num_sites)
}
