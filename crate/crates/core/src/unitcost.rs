//! Capacity per unit energy and energy per bit.
//!
//! With a zero-energy symbol the capacity per unit energy is
//! `C₁ = sup_λ D(Q(·|λ) ‖ Q(·|0)) / λ`, where `λ = ε_s·x` is the signal mean,
//! and the minimum energy per bit is `ln 2 / C₁`.
//!
//! * Noiseless: `Q(·|0)` is a point mass, so every divergence is infinite.
//! * Poisson noise: `D = −λ + (λ + ε_n) ln(1 + λ/ε_n)`, and `D/λ` grows like
//!   `ln λ`; `C₁` is infinite.
//! * Geometric noise: `D = λ/ε_n + Σ_y Q(y|λ) ln q(y)`, with `q` the CDF of a
//!   Poisson variable of mean `α = λ(1 + 1/ε_n)`. Since `ln q ≤ 0` this is at
//!   most `λ/ε_n`. The sum does not vanish relative to `λ`, though: it
//!   concentrates where `y ≈ λ`, far below `α`, and a large-deviation estimate
//!   gives `Σ_y Q ln q ≈ −λ(1/ε_n + ln β)` with `β = ε_n/(1+ε_n)`. Hence `D/λ`
//!   increases to `ln(1 + 1/ε_n)`, which is the value reported here; `1/ε_n`
//!   is kept as the upper bound.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::channel::{geometric_ln_alpha, poisson_series_term, truncation_point};
use crate::error::{check_tol, Error, Result};
use crate::special::{rel_entropy_kernel, LogSumExp};
use crate::types::NoiseModel;

/// A nonnegative quantity that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}

fn check_lambda(lam: f64) -> Result<()> {
    if lam.is_finite() && lam > 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "signal mean {lam} must be positive and finite"
        )))
    }
}

fn check_noise(eps_n: f64) -> Result<()> {
    if eps_n.is_finite() && eps_n > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidNoiseMean(eps_n))
    }
}

/// `D(Poisson(λ + ε_n) ‖ Poisson(ε_n)) = ε_n φ(λ/ε_n)`, `φ(u) = (1+u)ln(1+u) − u`.
pub fn divergence_poisson_noise(lam: f64, eps_n: f64) -> Result<f64> {
    check_lambda(lam)?;
    check_noise(eps_n)?;
    Ok(eps_n * rel_entropy_kernel(lam / eps_n))
}

/// `D(Q(·|λ) ‖ Q(·|0))` under geometric noise, to absolute accuracy `tol`.
///
/// The outputs past the cut `Y` contribute `Σ_{y>Y} Q(y) ln q(y)`, which is
/// negative and, because `q` increases, no smaller than
/// `ln q(Y) · P(Y_out > Y)`. The cut is pushed out until that product is
/// below `tol`.
pub fn divergence_geometric_noise(lam: f64, eps_n: f64, tol: f64) -> Result<f64> {
    check_lambda(lam)?;
    check_noise(eps_n)?;
    check_tol(tol)?;
    let noise = NoiseModel::GeometricNoise(eps_n);
    let ln_alpha = geometric_ln_alpha(lam, eps_n);
    let alpha = ln_alpha.exp();
    let ln_beta = -(1.0 / eps_n).ln_1p();
    let ln_norm = -lam - eps_n.ln_1p();

    let mut row_tol = tol;
    loop {
        let (y_max, tail) = truncation_point(&noise, lam, row_tol)?;
        let mut acc = LogSumExp::new();
        let mut sum = 0.0;
        let mut ln_q = f64::NEG_INFINITY;
        for y in 0..=y_max {
            acc.push(poisson_series_term(y, ln_alpha));
            let partial = acc.value();
            ln_q = (partial - alpha).min(0.0);
            let ln_q_out = ln_norm + y as f64 * ln_beta + partial;
            sum += ln_q_out.exp() * ln_q;
        }
        let neglected = tail * ln_q.abs();
        if neglected < tol {
            return Ok(lam / eps_n + sum);
        }
        row_tol = (tol / (ln_q.abs() + 1.0)).min(row_tol / 2.0);
    }
}

/// `D(Q(·|λ) ‖ Q(·|0))` for any model; infinite for the noiseless channel.
pub fn divergence(noise: &NoiseModel, lam: f64, tol: f64) -> Result<ExtendedReal> {
    match *noise {
        NoiseModel::Noiseless => {
            check_lambda(lam)?;
            Ok(ExtendedReal::Infinite)
        }
        NoiseModel::PoissonNoise(e) => divergence_poisson_noise(lam, e).map(ExtendedReal::Finite),
        NoiseModel::GeometricNoise(e) => {
            divergence_geometric_noise(lam, e, tol).map(ExtendedReal::Finite)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceCurvePoint {
    pub lam: f64,
    pub d_nats: f64,
    pub d_per_energy: f64,
}

/// Why the numerical supremum search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupStop {
    /// The best `D/λ` grew by less than [`SUP_DECADE_IMPROVEMENT`] over the last decade.
    Converged,
    /// `λ` passed [`SUP_MAX_LAMBDA`].
    LambdaCap,
}

/// Numerical `sup_λ D(λ)/λ` over a doubling grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupTrace {
    pub points: Vec<DivergenceCurvePoint>,
    pub sup: f64,
    pub stop: SupStop,
}

pub const SUP_START_LAMBDA: f64 = 1e-2;
pub const SUP_MAX_LAMBDA: f64 = 1e6;
pub const SUP_DECADE_IMPROVEMENT: f64 = 1e-3;

/// Walks `λ = 10⁻², 2·10⁻², 4·10⁻², …` until the running supremum of `D/λ`
/// improves by less than 0.1% over one decade, or `λ` exceeds `10⁶`.
pub fn unit_cost_sup_trace(noise: &NoiseModel, tol: f64) -> Result<SupTrace> {
    if noise.is_noiseless() {
        return Err(Error::DomainError(
            "the noiseless divergence is infinite at every positive signal mean".into(),
        ));
    }
    let mut points: Vec<DivergenceCurvePoint> = Vec::new();
    let mut best: Vec<f64> = Vec::new();
    let mut lam = SUP_START_LAMBDA;
    loop {
        let d_nats = divergence(noise, lam, tol)?.to_f64();
        let d_per_energy = d_nats / lam;
        points.push(DivergenceCurvePoint {
            lam,
            d_nats,
            d_per_energy,
        });
        let sup = best
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
            .max(d_per_energy);
        best.push(sup);

        if let Some(idx) = points.iter().rposition(|p| p.lam <= lam / 10.0) {
            if sup - best[idx] < SUP_DECADE_IMPROVEMENT * sup {
                return Ok(SupTrace {
                    points,
                    sup,
                    stop: SupStop::Converged,
                });
            }
        }
        lam *= 2.0;
        if lam > SUP_MAX_LAMBDA {
            return Ok(SupTrace {
                points,
                sup,
                stop: SupStop::LambdaCap,
            });
        }
    }
}

/// Capacity per unit energy together with the minimum energy per bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitCostResult {
    pub c1_per_unit_energy: ExtendedReal,
    pub eb_min: f64,
    /// How the supremum is attained.
    pub witness: String,
    /// `1/ε_n` for geometric noise.
    pub upper_bound: Option<f64>,
    /// Numerical supremum over the λ grid, geometric noise only.
    pub numeric: Option<SupTrace>,
}

/// Absolute divergence tolerance used for the numerical supremum.
pub const UNIT_COST_TOL: f64 = 1e-12;

pub fn capacity_per_unit_cost(noise: &NoiseModel) -> Result<UnitCostResult> {
    noise.check()?;
    Ok(match *noise {
        NoiseModel::Noiseless => UnitCostResult {
            c1_per_unit_energy: ExtendedReal::Infinite,
            eb_min: 0.0,
            witness: "Q(y|0) is a point mass at y = 0, so D(Q(.|x) || Q(.|0)) is infinite for every x > 0".into(),
            upper_bound: None,
            numeric: None,
        },
        NoiseModel::PoissonNoise(_) => UnitCostResult {
            c1_per_unit_energy: ExtendedReal::Infinite,
            eb_min: 0.0,
            witness: "lam -> inf: D(lam)/lam = (1 + eps_n/lam) ln(1 + lam/eps_n) - 1 grows like ln lam".into(),
            upper_bound: None,
            numeric: None,
        },
        NoiseModel::GeometricNoise(eps_n) => {
            let c1 = (1.0 / eps_n).ln_1p();
            UnitCostResult {
                c1_per_unit_energy: ExtendedReal::Finite(c1),
                eb_min: std::f64::consts::LN_2 / c1,
                witness: "lam -> inf: D(lam)/lam increases to ln(1 + 1/eps_n)".into(),
                upper_bound: Some(1.0 / eps_n),
                numeric: Some(unit_cost_sup_trace(noise, UNIT_COST_TOL)?),
            }
        }
    })
}

/// `ε_b = ε_s ln 2 / I`, energy spent per bit of mutual information.
pub fn energy_per_bit(eps_s: f64, mi_nats: f64) -> Result<f64> {
    if !(mi_nats > 0.0 && mi_nats.is_finite()) {
        return Err(Error::DomainError(format!(
            "mutual information {mi_nats} must be positive"
        )));
    }
    if !(eps_s.is_finite() && eps_s >= 0.0) {
        return Err(Error::InvalidEnergy(eps_s));
    }
    Ok(eps_s * std::f64::consts::LN_2 / mi_nats)
}
