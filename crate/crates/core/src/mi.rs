//! Mutual information of a channel point, the binary-flash closed form, and
//! a log-energy evaluator for signal energies far below `f64` underflow.
//!
//! The generic evaluator writes the information as
//!
//! ```text
//! I = Σ_x P(x) Σ_y Q̄(y) · φ(Q(y|x)/Q̄(y) − 1),     φ(u) = (1+u) ln(1+u) − u
//! ```
//!
//! which equals the textbook `Σ P Q log(Q/Q̄)` because `Σ_x P(x)(Q − Q̄) = 0`
//! for every `y`. Each term is nonnegative, so nothing cancels even when the
//! information is twelve orders of magnitude below the individual log ratios.

use serde::Serialize;

use crate::channel::{log_row, truncation_point};
use crate::error::{check_tol, Error, Result};
use crate::special::{rel_entropy_kernel, LogSumExp};
use crate::types::ChannelPoint;

/// Mutual information with its truncation error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiResult {
    pub nats: f64,
    /// Upper bound on the information carried by the discarded outputs.
    pub error_budget: f64,
    pub y_max: u64,
}

impl MiResult {
    pub fn bits(&self) -> f64 {
        self.nats / std::f64::consts::LN_2
    }
}

/// Per-row tail target `τ` with `τ(|ln τ| + |ln P_min|) ≤ tol`.
fn row_tail_target(tol: f64, ln_pmin: f64) -> f64 {
    let cost = |t: f64| t * (t.ln().abs() + ln_pmin.abs());
    // aiming at 0.9·tol: the iterates decrease to a point strictly inside the budget
    let mut tau = tol;
    while cost(tau) > tol {
        tau = 0.9 * tol / (tau.ln().abs() + ln_pmin.abs());
    }
    tau
}

/// Numerical `I(X; S(X) + Z)` in nats.
///
/// All rows share one output range: the longest of the per-input cuts. The
/// discarded outputs hold at most `Σ_x P(x)·t_x·(|ln t_x| + |ln P_min|)` nats,
/// where `t_x` is the certified tail of row `x`; that sum is reported as the
/// error budget and kept below `tol`.
pub fn mutual_information(point: &ChannelPoint, tol: f64) -> Result<MiResult> {
    check_tol(tol)?;
    let c = &point.constellation;
    if point.eps_s == 0.0 || c.len() == 1 {
        return Ok(MiResult {
            nats: 0.0,
            error_budget: 0.0,
            y_max: 0,
        });
    }
    let ln_pmin = c.min_probability().ln();
    let tau = row_tail_target(tol, ln_pmin);

    let mut y_max = 0;
    let mut error_budget = 0.0;
    for &(x, p) in c.points() {
        let (cut, tail) = truncation_point(&point.noise, point.eps_s * x, tau)?;
        y_max = y_max.max(cut);
        if tail > 0.0 {
            error_budget += p * tail * (tail.ln().abs() + ln_pmin.abs());
        }
    }

    let rows: Vec<Vec<f64>> = c
        .points()
        .iter()
        .map(|&(x, _)| log_row(&point.noise, point.eps_s * x, y_max))
        .collect();
    let ln_weights: Vec<f64> = c.points().iter().map(|&(_, p)| p.ln()).collect();

    let ln_marginal: Vec<f64> = (0..=y_max as usize)
        .map(|y| {
            let mut acc = LogSumExp::new();
            for (row, lw) in rows.iter().zip(&ln_weights) {
                acc.push(lw + row[y]);
            }
            acc.value()
        })
        .collect();

    let mut nats = 0.0;
    for (row, &(_, p)) in rows.iter().zip(c.points()) {
        let mut inner = 0.0;
        for (&lq, &lm) in row.iter().zip(&ln_marginal) {
            if lm == f64::NEG_INFINITY {
                continue;
            }
            let u = if lq == f64::NEG_INFINITY {
                -1.0
            } else {
                (lq - lm).exp_m1()
            };
            inner += lm.exp() * rel_entropy_kernel(u);
        }
        nats += p * inner;
    }

    Ok(MiResult {
        nats,
        error_budget,
        y_max,
    })
}

/// Closed-form information of binary flash `{0, 1/p}` over the noiseless
/// channel:
///
/// ```text
/// I_b(p) = −(p − p e^{−ε/p}) ln p − ε e^{−ε/p} − (1 − p + p e^{−ε/p}) ln(1 − p + p e^{−ε/p})
/// ```
pub fn flash_mi(p: f64, eps_s: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::DomainError(format!(
            "flash probability {p} not in (0, 1]"
        )));
    }
    if !(eps_s.is_finite() && eps_s >= 0.0) {
        return Err(Error::InvalidEnergy(eps_s));
    }
    if p == 1.0 || eps_s == 0.0 {
        return Ok(0.0);
    }
    let decay = (-eps_s / p).exp();
    // δ = p(1 − e^{−ε/p}) is the probability of a nonzero count.
    let delta = -p * (-eps_s / p).exp_m1();
    Ok(-delta * p.ln() - eps_s * decay - (1.0 - delta) * (-delta).ln_1p())
}

/// A signal energy below one, carried as `t = −ln ε_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogEnergyPoint(f64);

impl LogEnergyPoint {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 {
            Ok(Self(t))
        } else {
            Err(Error::DomainError(format!(
                "log-energy t = {t} must be positive and finite"
            )))
        }
    }

    pub fn from_energy(eps_s: f64) -> Result<Self> {
        Self::new(-eps_s.ln())
    }

    pub fn t(&self) -> f64 {
        self.0
    }

    pub fn log10_energy(&self) -> f64 {
        -self.0 / std::f64::consts::LN_10
    }
}

/// Largest relative remainder [`flash_ratio_logdomain`] accepts.
pub const LOGDOMAIN_REMAINDER_LIMIT: f64 = 1e-6;

/// `R(t) = I_b(p)/p` for flash signalling with `p = ε_s·t = −ε_s ln ε_s`,
/// computed from `t` alone.
///
/// With `ε_s/p = 1/t`, `ln p = ln t − t` and `a = 1 − e^{−1/t}`,
///
/// ```text
/// R(t) = a (t − ln t) − e^{−1/t}/t + [−(1 − δ) ln(1 − δ)]/p,   δ = p·a
/// ```
///
/// The last bracket is `δ − δ²/2 − Σ_{k≥3} δ^k/(k(k−1))`; the first two terms
/// are kept and the rest is bounded by `δ³/(6(1 − δ))`. That bound is
/// evaluated in logs, so `ε_s = e^{−t}` is never formed.
pub fn flash_ratio_logdomain(point: LogEnergyPoint) -> Result<f64> {
    let t = point.t();
    if t <= 1.0 {
        return Err(Error::DomainError(format!(
            "log-energy t = {t} must exceed 1"
        )));
    }
    let a = -(-1.0 / t).exp_m1();
    let ln_p = t.ln() - t;
    let p = ln_p.exp();
    let delta = p * a;
    let ratio = a * (t - t.ln()) - (-1.0 / t).exp() / t + a - 0.5 * p * a * a;
    // remainder/p ≤ p² a³ / (6(1 − δ))
    let ln_bound = 2.0 * ln_p + 3.0 * a.ln() - 6f64.ln() - (-delta).ln_1p();
    let rel_bound = ln_bound.exp() / ratio;
    if rel_bound > LOGDOMAIN_REMAINDER_LIMIT {
        return Err(Error::RemainderTooLarge {
            bound: rel_bound,
            limit: LOGDOMAIN_REMAINDER_LIMIT,
        });
    }
    Ok(ratio)
}

/// Smallest `t` at which [`flash_ratio_logdomain`] reaches `level`, by
/// bisection. `R` increases in `t` over the bracket searched.
pub fn flash_ratio_crossing(level: f64) -> Result<LogEnergyPoint> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::DomainError(format!(
            "crossing level {level} not in (0, 1)"
        )));
    }
    let ratio = |t: f64| LogEnergyPoint::new(t).and_then(flash_ratio_logdomain);
    let mut lo = 16.0;
    if ratio(lo)? >= level {
        return Err(Error::DomainError(format!(
            "level {level} is already reached at t = {lo}"
        )));
    }
    let mut hi = 2.0 * lo;
    while ratio(hi)? < level {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::DomainError(format!(
                "level {level} not reached below t = 1e12"
            )));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if ratio(mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    LogEnergyPoint::new(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellations::{binary_flash, uniform_pem, PemSpec};
    use crate::types::{validate, NoiseModel};

    fn point(c: crate::types::Constellation, noise: NoiseModel, eps: f64) -> ChannelPoint {
        ChannelPoint::new(c, noise, eps).unwrap()
    }

    #[test]
    fn tail_target_terminates_inside_budget() {
        for k in 3..=15 {
            let tol = 10f64.powi(-k);
            for pmin in [0.5, 1.0 / 3.0, 1e-3, 1.0 / 65536.0] {
                let t = row_tail_target(tol, f64::ln(pmin));
                assert!(t > 0.0 && t * (t.ln().abs() + pmin.ln().abs()) <= tol);
            }
        }
    }

    #[test]
    fn deterministic_input_carries_nothing() {
        let c = validate(&[(1.0, 1.0)]).unwrap();
        for noise in [NoiseModel::Noiseless, NoiseModel::GeometricNoise(1.0)] {
            let r = mutual_information(&point(c.clone(), noise, 3.0), 1e-12).unwrap();
            assert_eq!(r.nats, 0.0);
        }
    }

    #[test]
    fn zero_energy_carries_nothing() {
        let c = uniform_pem(PemSpec::new(2).unwrap());
        let r = mutual_information(&point(c, NoiseModel::PoissonNoise(1.0), 0.0), 1e-12).unwrap();
        assert_eq!(r.nats, 0.0);
    }

    #[test]
    fn flash_matches_closed_form() {
        let c = binary_flash(0.1).unwrap();
        let r = mutual_information(&point(c, NoiseModel::Noiseless, 0.01), 1e-12).unwrap();
        let closed = flash_mi(0.1, 0.01).unwrap();
        assert!((r.nats - closed).abs() < 1e-9, "{} vs {closed}", r.nats);
        assert!(r.error_budget <= 1e-12);
    }

    #[test]
    fn flash_closed_form_limits() {
        for eps in [1e-6, 0.3, 5.0] {
            assert_eq!(flash_mi(1.0, eps).unwrap(), 0.0);
        }
        let eps = 1e-9;
        let slope = flash_mi(0.1, eps).unwrap() / eps;
        assert!((slope + 0.1f64.ln()).abs() < 1e-6);
        assert!(flash_mi(0.0, 1.0).is_err());
        assert!(flash_mi(1.01, 1.0).is_err());
    }

    #[test]
    fn tolerance_is_checked() {
        let c = binary_flash(0.5).unwrap();
        let pt = point(c, NoiseModel::Noiseless, 1.0);
        assert_eq!(
            mutual_information(&pt, 0.0),
            Err(Error::ToleranceOutOfRange(0.0))
        );
        assert_eq!(
            mutual_information(&pt, 2.0),
            Err(Error::ToleranceOutOfRange(2.0))
        );
    }

    #[test]
    fn point_order_is_irrelevant() {
        let a = validate(&[(0.0, 0.2), (1.0, 0.3), (3.0, 0.5)]).unwrap();
        let b = validate(&[(3.0, 0.5), (0.0, 0.2), (1.0, 0.3)]).unwrap();
        let ia =
            mutual_information(&point(a, NoiseModel::GeometricNoise(0.7), 0.4), 1e-12).unwrap();
        let ib =
            mutual_information(&point(b, NoiseModel::GeometricNoise(0.7), 0.4), 1e-12).unwrap();
        assert_eq!(ia, ib);
    }

    #[test]
    fn budget_stays_below_tolerance() {
        let c = uniform_pem(PemSpec::new(3).unwrap());
        for tol in [1e-3, 1e-8, 1e-12] {
            for noise in [
                NoiseModel::Noiseless,
                NoiseModel::PoissonNoise(0.3),
                NoiseModel::GeometricNoise(3.0),
            ] {
                let r = mutual_information(&point(c.clone(), noise, 2.0), tol).unwrap();
                assert!(r.error_budget <= tol);
                assert!(r.nats >= -r.error_budget);
            }
        }
    }

    #[test]
    fn logdomain_small_t_is_refused() {
        assert!(matches!(
            flash_ratio_logdomain(LogEnergyPoint::new(1.0).unwrap()),
            Err(Error::DomainError(_))
        ));
        assert!(matches!(
            flash_ratio_logdomain(LogEnergyPoint::new(1.5).unwrap()),
            Err(Error::RemainderTooLarge { .. })
        ));
        assert!(LogEnergyPoint::new(0.0).is_err());
    }

    #[test]
    fn logdomain_matches_direct_at_picoenergy() {
        let eps: f64 = 1e-12;
        let t = -eps.ln();
        let direct = flash_mi(eps * t, eps).unwrap() / (eps * t);
        let r = flash_ratio_logdomain(LogEnergyPoint::new(t).unwrap()).unwrap();
        assert!((r - direct).abs() < 1e-9);
    }

    #[test]
    fn logdomain_tends_to_one() {
        let far = flash_ratio_logdomain(LogEnergyPoint::new(1e9).unwrap()).unwrap();
        assert!((far - 1.0).abs() < 1e-7);
    }
}
