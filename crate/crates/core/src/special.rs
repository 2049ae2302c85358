//! Small log-domain helpers shared by the channel and information routines.

use statrs::function::gamma::ln_gamma;

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// `ln(e^a + e^b)` without overflow; `-inf` is the neutral element.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(v_i)` with the running maximum pulled out.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp accumulator with a running maximum.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.scaled += (v - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `(1 + u) ln(1 + u) - u` for `u >= -1`.
///
/// This is the per-term kernel of a relative entropy written as
/// `Σ q·φ(p/q - 1)`; every term is nonnegative, so sums of it never cancel.
/// A power series takes over near zero where the direct form loses all
/// significant digits.
pub fn rel_entropy_kernel(u: f64) -> f64 {
    if u <= -1.0 {
        return 1.0;
    }
    if u.abs() < 1e-2 {
        // Σ_{k≥2} (-1)^k u^k / (k(k-1)); ten terms reach 1e-16 relative here.
        let mut acc = 0.0;
        let mut pow = u * u;
        for k in 2..12 {
            let kf = k as f64;
            let term = pow / (kf * (kf - 1.0));
            acc += if k % 2 == 0 { term } else { -term };
            pow *= u;
        }
        acc
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        let direct: f64 = (1..=30).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(30) - direct).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let v = [-1.0, 0.5, 2.0];
        let direct = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-15);
        let mut acc = LogSumExp::new();
        for x in v {
            acc.push(x);
        }
        assert!((acc.value() - direct).abs() < 1e-15);
        assert!((log_add_exp(-1.0, 0.5) - log_sum_exp(&[-1.0, 0.5])).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_survives_huge_spread() {
        let mut acc = LogSumExp::new();
        acc.push(-1000.0);
        acc.push(-1e6);
        acc.push(f64::NEG_INFINITY);
        assert!((acc.value() + 1000.0).abs() < 1e-12);
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn kernel_is_continuous_across_the_series_switch() {
        for &u in &[-0.0101, -0.0099, 0.0099, 0.0101] {
            let direct = (1.0 + u) * f64::ln_1p(u) - u;
            let k = rel_entropy_kernel(u);
            assert!(
                (k - direct).abs() <= 1e-13 * direct,
                "u={u}: {k} vs {direct}"
            );
        }
        assert!((rel_entropy_kernel(1e-8) / 0.5e-16 - 1.0).abs() < 1e-8);
        assert_eq!(rel_entropy_kernel(-1.0), 1.0);
        assert_eq!(rel_entropy_kernel(0.0), 0.0);
    }
}
