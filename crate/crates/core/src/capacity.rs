//! Bounds on the noiseless capacity `C(ε_s)`.
//!
//! No closed form for the capacity is known, so the deliverable is a bracket:
//! a firm upper bound and the information of binary flash signalling, which
//! lower-bounds it. Both behave like `−ε_s ln ε_s` as `ε_s → 0`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mi::flash_mi;

fn check_energy(eps_s: f64) -> Result<()> {
    if eps_s.is_finite() && eps_s > 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "signal energy {eps_s} must be positive and finite"
        )))
    }
}

/// Upper bound on the noiseless capacity, in nats:
///
/// ```text
/// ln[(1 + (√(2e) − 1)/√(1 + 2ε)) · (ε + ½)^{ε+½} / (√e · ε^ε)]
/// ```
///
/// The constant terms cancel exactly at `ε → 0`; they are removed
/// analytically so that the remaining `O(ε ln ε)` part keeps full precision:
///
/// ```text
/// ε ln ½ + (ε + ½) ln(1 + 2ε) − ε ln ε + ln(1 + (1 − 1/√(2e))·((1 + 2ε)^{−½} − 1))
/// ```
pub fn capacity_upper_bound(eps_s: f64) -> Result<f64> {
    check_energy(eps_s)?;
    let k = (2.0 * std::f64::consts::E).sqrt();
    let shrink = (-0.5 * (2.0 * eps_s).ln_1p()).exp_m1();
    Ok(
        eps_s * 0.5f64.ln() + (eps_s + 0.5) * (2.0 * eps_s).ln_1p() - eps_s * eps_s.ln()
            + ((1.0 - 1.0 / k) * shrink).ln_1p(),
    )
}

/// How the flash probability `p` is chosen at a given energy.
#[derive(Debug, Clone, PartialEq)]
pub enum FlashStrategy {
    FixedP(f64),
    /// `p = ε_s`.
    PEqualsEps,
    /// `p = −ε_s ln ε_s`.
    PEqualsMinusEpsLogEps,
    /// Best `p` over the given grid.
    BestOverGrid(Vec<f64>),
}

impl FlashStrategy {
    /// The default search grid, see [`default_p_grid`].
    pub fn best_default(eps_s: f64) -> Self {
        FlashStrategy::BestOverGrid(default_p_grid(eps_s))
    }
}

impl fmt::Display for FlashStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlashStrategy::FixedP(p) => write!(f, "flash p = {p}"),
            FlashStrategy::PEqualsEps => write!(f, "flash p = eps_s"),
            FlashStrategy::PEqualsMinusEpsLogEps => write!(f, "flash p = -eps_s log eps_s"),
            FlashStrategy::BestOverGrid(g) => write!(f, "best flash over {}-point p-grid", g.len()),
        }
    }
}

/// 60 log-spaced probabilities in `[min(ε_s, 10⁻³), min(1, 10⁴·ε_s·max(1, −ln ε_s))]`.
pub fn default_p_grid(eps_s: f64) -> Vec<f64> {
    const POINTS: usize = 60;
    let lo = eps_s.min(1e-3);
    let hi = (1e4 * eps_s * (-eps_s.ln()).max(1.0)).min(1.0);
    let (a, b) = (lo.ln(), hi.ln());
    (0..POINTS)
        .map(|i| {
            (a + (b - a) * i as f64 / (POINTS - 1) as f64)
                .exp()
                .clamp(lo, hi)
        })
        .collect()
}

/// Flash information at `ε_s` and the probability that produced it.
pub fn flash_lower_bound(eps_s: f64, strategy: &FlashStrategy) -> Result<(f64, f64)> {
    check_energy(eps_s)?;
    let single = |p: f64| flash_mi(p, eps_s).map(|i| (i, p));
    match strategy {
        FlashStrategy::FixedP(p) => single(*p),
        FlashStrategy::PEqualsEps => single(eps_s),
        FlashStrategy::PEqualsMinusEpsLogEps => single(-eps_s * eps_s.ln()),
        FlashStrategy::BestOverGrid(grid) => {
            if grid.is_empty() {
                return Err(Error::DomainError("empty flash probability grid".into()));
            }
            let mut best = (f64::NEG_INFINITY, f64::NAN);
            for &p in grid {
                let cand = single(p)?;
                if cand.0 > best.0 {
                    best = cand;
                }
            }
            Ok(best)
        }
    }
}

/// Lower and upper bounds on the noiseless capacity at one energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityBracket {
    pub eps_s: f64,
    pub lower_nats: f64,
    pub upper_nats: f64,
    pub p_used: f64,
    pub lower_strategy: String,
}

pub fn capacity_bracket(eps_s: f64, lower_strategy: &FlashStrategy) -> Result<CapacityBracket> {
    let upper = capacity_upper_bound(eps_s)?;
    let (lower, p_used) = flash_lower_bound(eps_s, lower_strategy)?;
    if !(0.0..=upper).contains(&lower) {
        return Err(Error::DomainError(format!(
            "bracket inverted at eps_s = {eps_s:e}: lower {lower:e} > upper {upper:e}"
        )));
    }
    Ok(CapacityBracket {
        eps_s,
        lower_nats: lower,
        upper_nats: upper,
        p_used,
        lower_strategy: lower_strategy.to_string(),
    })
}
