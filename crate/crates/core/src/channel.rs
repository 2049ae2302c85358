//! Transition laws `Q(y|x)` of the three channel models.
//!
//! Everything is evaluated in the log domain. The signal count is Poisson with
//! mean `λ = ε_s·x`; the noise count is either absent, Poisson of mean `ε_n`,
//! or geometric of mean `ε_n`. For geometric noise the convolution has the
//! closed form
//!
//! ```text
//! Q(y|x) = e^{-λ}/(1+ε_n) · β^y · Σ_{l=0}^{y} α^l / l!,   β = ε_n/(1+ε_n),  α = λ/β
//! ```
//!
//! and the inner sum is accumulated with a running-maximum log-sum-exp.

use crate::error::{check_tol, Error, Result};
use crate::special::{ln_factorial, LogSumExp};
use crate::types::NoiseModel;

/// `ln P(K = k)` for `K ~ Poisson(lambda)`.
pub fn poisson_log_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    poisson_log_pmf_with_ln_mean(k, lambda, lambda.ln())
}

fn poisson_log_pmf_with_ln_mean(k: u64, mean: f64, ln_mean: f64) -> f64 {
    let kf = k as f64;
    let linear = if k == 0 { 0.0 } else { kf * ln_mean };
    -mean + linear - ln_factorial(k)
}

/// `ln P(Z = k)` for a geometric count of mean `eps_n`.
pub fn geometric_log_pmf(k: u64, eps_n: f64) -> f64 {
    let ln_one_plus = eps_n.ln_1p();
    -ln_one_plus + k as f64 * ln_ratio(eps_n)
}

/// `ln(ε/(1+ε))`, accurate for both small and large `ε`.
fn ln_ratio(eps_n: f64) -> f64 {
    -(1.0 / eps_n).ln_1p()
}

/// `ln(a + b)` for `a > 0`, `b ≥ 0`, accurate when `b ≪ a`.
fn ln_shifted(a: f64, b: f64) -> f64 {
    a.ln() + (b / a).ln_1p()
}

/// `ln Q(y|x)` given the signal mean `ε_s·x`.
pub fn transition_logprob(noise: &NoiseModel, signal_mean: f64, y: u64) -> f64 {
    match *noise {
        NoiseModel::Noiseless => poisson_log_pmf(y, signal_mean),
        NoiseModel::PoissonNoise(eps_n) => {
            poisson_log_pmf_with_ln_mean(y, signal_mean + eps_n, ln_shifted(eps_n, signal_mean))
        }
        NoiseModel::GeometricNoise(eps_n) => {
            let ln_alpha = geometric_ln_alpha(signal_mean, eps_n);
            let mut acc = LogSumExp::new();
            for l in 0..=y {
                acc.push(poisson_series_term(l, ln_alpha));
            }
            geometric_prefix(signal_mean, eps_n, y) + acc.value()
        }
    }
}

pub(crate) fn geometric_ln_alpha(signal_mean: f64, eps_n: f64) -> f64 {
    if signal_mean == 0.0 {
        f64::NEG_INFINITY
    } else {
        signal_mean.ln() + (1.0 / eps_n).ln_1p()
    }
}

/// `ln(α^l / l!)`, with `0^0 = 1`.
pub(crate) fn poisson_series_term(l: u64, ln_alpha: f64) -> f64 {
    if l == 0 {
        0.0
    } else {
        l as f64 * ln_alpha - ln_factorial(l)
    }
}

fn geometric_prefix(signal_mean: f64, eps_n: f64, y: u64) -> f64 {
    -signal_mean - eps_n.ln_1p() + y as f64 * ln_ratio(eps_n)
}

/// `ln Q(y|x)` for `y = 0..=y_max`.
pub fn log_row(noise: &NoiseModel, signal_mean: f64, y_max: u64) -> Vec<f64> {
    match *noise {
        NoiseModel::Noiseless => (0..=y_max)
            .map(|y| poisson_log_pmf(y, signal_mean))
            .collect(),
        NoiseModel::PoissonNoise(eps_n) => {
            let mean = signal_mean + eps_n;
            let ln_mean = ln_shifted(eps_n, signal_mean);
            (0..=y_max)
                .map(|y| poisson_log_pmf_with_ln_mean(y, mean, ln_mean))
                .collect()
        }
        NoiseModel::GeometricNoise(eps_n) => {
            let ln_alpha = geometric_ln_alpha(signal_mean, eps_n);
            let mut acc = LogSumExp::new();
            (0..=y_max)
                .map(|y| {
                    acc.push(poisson_series_term(y, ln_alpha));
                    geometric_prefix(signal_mean, eps_n, y) + acc.value()
                })
                .collect()
        }
    }
}

/// A truncated row of the transition law with a certified tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub signal_mean: f64,
    pub y_max: u64,
    /// `ln Q(y|x)` for `y = 0..=y_max`.
    pub log_probs: Vec<f64>,
    /// Upper bound on `Σ_{y > y_max} Q(y|x)`.
    pub tail_bound: f64,
}

impl TransitionRow {
    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|v| v.exp()).collect()
    }
}

/// Truncated transition row whose neglected mass is certified below `tol`.
pub fn transition_row(noise: &NoiseModel, signal_mean: f64, tol: f64) -> Result<TransitionRow> {
    let (y_max, tail_bound) = truncation_point(noise, signal_mean, tol)?;
    Ok(TransitionRow {
        signal_mean,
        y_max,
        log_probs: log_row(noise, signal_mean, y_max),
        tail_bound,
    })
}

/// Smallest output cut `y_max` (under the bounds used here) with certified
/// tail mass `< tol`, together with that bound.
pub fn truncation_point(noise: &NoiseModel, signal_mean: f64, tol: f64) -> Result<(u64, f64)> {
    check_tol(tol)?;
    if !(signal_mean.is_finite() && signal_mean >= 0.0) {
        return Err(Error::InvalidEnergy(signal_mean));
    }
    Ok(match *noise {
        NoiseModel::Noiseless => poisson_cut(signal_mean, tol),
        NoiseModel::PoissonNoise(eps_n) => poisson_cut(signal_mean + eps_n, tol),
        NoiseModel::GeometricNoise(eps_n) => {
            // {S + Z > s0 + m} ⊆ {S > s0} ∪ {Z > m}; split the budget evenly.
            let (s0, signal_tail) = poisson_cut(signal_mean, tol / 2.0);
            let (m, noise_tail) = geometric_cut(eps_n, tol / 2.0);
            (s0 + m, signal_tail + noise_tail)
        }
    })
}

/// Poisson tail cut. For `k ≥ K+1` the pmf ratio is `μ/(k+1) ≤ μ/(K+2) < 1`,
/// so the tail past `K` is at most `pmf(K+1) / (1 − μ/(K+2))`.
fn poisson_cut(mean: f64, tol: f64) -> (u64, f64) {
    if mean == 0.0 {
        return (0, 0.0);
    }
    let ln_tol = tol.ln();
    let ln_mean = mean.ln();
    let mut k = mean.floor() as u64;
    loop {
        let ratio = mean / (k as f64 + 2.0);
        let ln_bound = poisson_log_pmf_with_ln_mean(k + 1, mean, ln_mean) - (-ratio).ln_1p();
        if ln_bound < ln_tol {
            return (k, ln_bound.exp());
        }
        k += 1;
    }
}

/// `P(Z > m) = β^{m+1}` for the geometric noise.
fn geometric_cut(eps_n: f64, tol: f64) -> (u64, f64) {
    let ln_beta = ln_ratio(eps_n);
    let mut m = ((tol.ln() / ln_beta).ceil() - 1.0).max(0.0) as u64;
    // correct for rounding in the closed form
    while m > 0 && (m as f64) * ln_beta < tol.ln() {
        m -= 1;
    }
    while (m as f64 + 1.0) * ln_beta >= tol.ln() {
        m += 1;
    }
    (m, ((m as f64 + 1.0) * ln_beta).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Poisson pmf by repeated multiplication in linear domain.
    fn poisson_pmf_linear(lambda: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut p = (-lambda).exp();
        for k in 0..n {
            out.push(p);
            p *= lambda / (k as f64 + 1.0);
        }
        out
    }

    fn geometric_pmf_linear(eps_n: f64, n: usize) -> Vec<f64> {
        let beta = eps_n / (1.0 + eps_n);
        (0..n)
            .map(|k| beta.powi(k as i32) / (1.0 + eps_n))
            .collect()
    }

    fn convolution(lambda: f64, eps_n: f64, n: usize) -> Vec<f64> {
        let s = poisson_pmf_linear(lambda, n);
        let z = geometric_pmf_linear(eps_n, n);
        (0..n)
            .map(|y| (0..=y).map(|k| s[k] * z[y - k]).sum())
            .collect()
    }

    #[test]
    fn poisson_pmf_examples() {
        assert_eq!(poisson_log_pmf(0, 0.0), 0.0);
        assert_eq!(poisson_log_pmf(3, 0.0), f64::NEG_INFINITY);
        assert!((poisson_log_pmf(1, 1.0) + 1.0).abs() < 1e-15);
        // e^{-2.5} 2.5^5 / 120
        let direct = ((-2.5f64).exp() * 2.5f64.powi(5) / 120.0).ln();
        assert!((poisson_log_pmf(5, 2.5) - direct).abs() < 1e-14);
    }

    #[test]
    fn geometric_pmf_examples() {
        assert!((geometric_log_pmf(0, 1.0) - 0.5f64.ln()).abs() < 1e-15);
        let direct = ((1.0 / 1.5) * (1.0f64 / 3.0).powi(3)).ln();
        assert!((geometric_log_pmf(3, 0.5) - direct).abs() < 1e-14);
        // mean, truncated where the tail is below 1e-14
        let (m, tail) = geometric_cut(2.0, 1e-14);
        assert!(tail < 1e-14);
        let mean: f64 = (0..=m)
            .map(|k| k as f64 * geometric_log_pmf(k, 2.0).exp())
            .sum();
        assert!((mean - 2.0).abs() < 1e-10, "mean {mean}");
    }

    #[test]
    fn transition_examples() {
        assert_eq!(transition_logprob(&NoiseModel::Noiseless, 0.0, 0), 0.0);
        let noise = NoiseModel::PoissonNoise(1.0);
        for y in 0..20 {
            let lhs = transition_logprob(&noise, 1.0, y);
            assert!((lhs - poisson_log_pmf(y, 2.0)).abs() < 1e-13);
        }
        let noise = NoiseModel::GeometricNoise(1.0);
        let oracle = convolution(0.5, 1.0, 41);
        for y in 0..=40u64 {
            let q = transition_logprob(&noise, 0.5, y).exp();
            assert!((q - oracle[y as usize]).abs() <= 1e-12, "y={y}");
        }
    }

    #[test]
    fn geometric_agrees_with_convolution_on_grid() {
        for &lambda in &[0.0, 0.1, 1.0, 5.0] {
            for &eps_n in &[0.25, 1.0, 4.0] {
                let noise = NoiseModel::GeometricNoise(eps_n);
                let oracle = convolution(lambda, eps_n, 61);
                let row = log_row(&noise, lambda, 60);
                for y in 0..=60usize {
                    let single = transition_logprob(&noise, lambda, y as u64).exp();
                    assert!((row[y].exp() - oracle[y]).abs() <= 1e-12);
                    assert!((single - oracle[y]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_rows() {
        for y in 0..30 {
            let a = transition_logprob(&NoiseModel::PoissonNoise(1.5), 0.0, y);
            assert!((a - poisson_log_pmf(y, 1.5)).abs() < 1e-14);
            let b = transition_logprob(&NoiseModel::GeometricNoise(1.5), 0.0, y);
            assert!((b - geometric_log_pmf(y, 1.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn row_examples() {
        let row = transition_row(&NoiseModel::Noiseless, 0.0, 0.3).unwrap();
        assert_eq!((row.y_max, row.tail_bound), (0, 0.0));
        assert_eq!(row.probs(), vec![1.0]);

        let row = transition_row(&NoiseModel::GeometricNoise(1.0), 1.0, 1e-12).unwrap();
        assert!(row.probs().iter().sum::<f64>() >= 1.0 - 1e-12);

        let row = transition_row(&NoiseModel::PoissonNoise(1.0), 2.0, 1e-10).unwrap();
        assert!((row.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-10);

        assert_eq!(
            transition_row(&NoiseModel::Noiseless, 1.0, 0.0),
            Err(Error::ToleranceOutOfRange(0.0))
        );
        assert!(transition_row(&NoiseModel::Noiseless, 1.0, 1.0).is_err());
    }

    #[test]
    fn rows_are_normalized_and_certified() {
        let models = [
            NoiseModel::Noiseless,
            NoiseModel::PoissonNoise(0.5),
            NoiseModel::PoissonNoise(3.0),
            NoiseModel::GeometricNoise(0.25),
            NoiseModel::GeometricNoise(4.0),
        ];
        for noise in &models {
            for &mean in &[0.0, 1e-6, 0.3, 2.0, 17.0, 250.0] {
                for &tol in &[1e-3, 1e-8, 1e-12] {
                    let row = transition_row(noise, mean, tol).unwrap();
                    let total: f64 = row.probs().iter().sum();
                    assert!(row.tail_bound < tol);
                    assert!(total <= 1.0 + 1e-12, "{noise} {mean} {tol}: {total}");
                    assert!(
                        total + row.tail_bound >= 1.0 - 1e-12,
                        "{noise} {mean} {tol}"
                    );
                }
            }
        }
    }

    #[test]
    fn looser_tolerance_never_lengthens_rows() {
        for noise in [
            NoiseModel::Noiseless,
            NoiseModel::PoissonNoise(1.0),
            NoiseModel::GeometricNoise(2.0),
        ] {
            for &mean in &[0.1, 3.0, 40.0] {
                let mut prev = u64::MAX;
                for &tol in &[1e-14, 1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5] {
                    let (y, _) = truncation_point(&noise, mean, tol).unwrap();
                    assert!(y <= prev);
                    prev = y;
                }
            }
        }
    }
}
