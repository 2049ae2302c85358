//! Low-energy expansion `I(ε_s) = c₁ε_s + c₂ε_s² + o(ε_s²)`.
//!
//! Closed forms, for a constellation with moments `μ₁`, `μ₂`:
//!
//! * noiseless: `c₁ = Σ P(x) x ln(x/μ₁)`, `c₂ = ½(μ₂ − μ₁² − μ₂ ln(μ₂/μ₁²))`;
//! * Poisson or geometric noise of mean `ε_n`: `c₁ = 0`, `c₂ = (μ₂ − μ₁²)/(2ε_n)`.
//!
//! [`extract_coeffs_empirical`] measures the same coefficients from numerical
//! mutual information, so the two can be compared.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mi::mutual_information;
use crate::types::{ChannelPoint, Constellation, NoiseModel};

/// `(c₁, c₂)` in nats per unit energy and nats per unit energy squared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub c1: f64,
    pub c2: f64,
}

pub fn coeffs_noiseless(c: &Constellation) -> Result<ExpansionCoefficients> {
    let m = c.moments();
    if m.mu1 <= 0.0 {
        return Err(Error::DegenerateConstellation);
    }
    let c1 = c
        .points()
        .iter()
        .filter(|&&(x, _)| x > 0.0)
        .map(|&(x, p)| p * x * (x / m.mu1).ln())
        .sum();
    // μ₂ − μ₁² − μ₂ ln(μ₂/μ₁²) = μ₂ (ln(1+v) − v) with v = μ₁²/μ₂ − 1 ≤ 0
    let v = -m.variance() / m.mu2;
    let c2 = 0.5 * m.mu2 * (v.ln_1p() - v);
    Ok(ExpansionCoefficients { c1, c2 })
}

pub fn coeffs_noisy(c: &Constellation, eps_n: f64) -> Result<ExpansionCoefficients> {
    if !(eps_n.is_finite() && eps_n > 0.0) {
        return Err(Error::InvalidNoiseMean(eps_n));
    }
    Ok(ExpansionCoefficients {
        c1: 0.0,
        c2: c.moments().variance() / (2.0 * eps_n),
    })
}

/// Closed-form coefficients for any of the three models.
pub fn coeffs(c: &Constellation, noise: &NoiseModel) -> Result<ExpansionCoefficients> {
    match *noise {
        NoiseModel::Noiseless => coeffs_noiseless(c),
        NoiseModel::PoissonNoise(e) | NoiseModel::GeometricNoise(e) => coeffs_noisy(c, e),
    }
}

pub fn expansion_eval(coeffs: &ExpansionCoefficients, eps_s: f64) -> f64 {
    coeffs.c1 * eps_s + coeffs.c2 * eps_s * eps_s
}

/// One grid point of an empirical fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSample {
    pub eps_s: f64,
    pub mi_nats: f64,
    /// `I − (c₁ε_s + c₂ε_s²)` with the fitted coefficients.
    pub residual: f64,
}

/// Coefficients measured from numerical mutual information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalFit {
    pub coeffs: ExpansionCoefficients,
    pub samples: Vec<FitSample>,
    /// For noisy models `c₁` is not fitted; this is `I/ε_s` at the smallest
    /// grid energy, which should be close to zero.
    pub c1_check: Option<f64>,
}

/// Information must stay below this on the extraction grid.
pub const EXTRACTION_MAX_NATS: f64 = 0.1;

/// Two-point Richardson step removing the linear term of `f(ε) = f₀ + f₁ε`.
fn richardson(eps_a: f64, f_a: f64, eps_b: f64, f_b: f64) -> f64 {
    (f_b * eps_a - f_a * eps_b) / (eps_a - eps_b)
}

/// Measures `c₁`, `c₂` on a decreasing grid of small energies.
///
/// Noiseless: `c₁` is the Richardson limit of `I/ε_s` from the two smallest
/// energies, then `c₂` the Richardson limit of `(I − c₁ε_s)/ε_s²` from the
/// same two. Noisy models have `c₁ = 0` exactly, so only the second stage runs
/// (on `I/ε_s²`) and `I/ε_s` at the smallest energy is reported instead.
pub fn extract_coeffs_empirical(
    c: &Constellation,
    noise: &NoiseModel,
    eps_grid: &[f64],
    tol: f64,
) -> Result<EmpiricalFit> {
    check_grid(eps_grid)?;
    let mut mi = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let r = mutual_information(&ChannelPoint::new(c.clone(), *noise, eps)?, tol)?;
        if r.nats >= EXTRACTION_MAX_NATS {
            return Err(Error::GridTooCoarse(format!(
                "I({eps:e}) = {:.3e} nats is not in the low-energy regime (< {EXTRACTION_MAX_NATS})",
                r.nats
            )));
        }
        mi.push(r.nats);
    }
    let n = eps_grid.len();
    let (ea, eb) = (eps_grid[n - 2], eps_grid[n - 1]);
    let (ia, ib) = (mi[n - 2], mi[n - 1]);

    let (c1, c1_check) = if noise.is_noiseless() {
        (richardson(ea, ia / ea, eb, ib / eb), None)
    } else {
        (0.0, Some(ib / eb))
    };
    let second = |eps: f64, i: f64| (i - c1 * eps) / (eps * eps);
    let c2 = richardson(ea, second(ea, ia), eb, second(eb, ib));
    let coeffs = ExpansionCoefficients { c1, c2 };

    let samples = eps_grid
        .iter()
        .zip(&mi)
        .map(|(&eps_s, &mi_nats)| FitSample {
            eps_s,
            mi_nats,
            residual: mi_nats - expansion_eval(&coeffs, eps_s),
        })
        .collect();
    Ok(EmpiricalFit {
        coeffs,
        samples,
        c1_check,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 3 energies, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
        return Err(Error::GridTooCoarse(
            "energies must be positive and finite".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::GridTooCoarse(
            "energies must be strictly decreasing".into(),
        ));
    }
    if grid[0] / grid[grid.len() - 1] < 100.0 {
        return Err(Error::GridTooCoarse(
            "grid must span at least two decades".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellations::{binary_flash, uniform_pem, PemSpec};
    use crate::types::validate;
    use proptest::prelude::*;

    #[test]
    fn flash_coefficients() {
        for p in [0.5, 0.1, 0.01] {
            let k = coeffs_noiseless(&binary_flash(p).unwrap()).unwrap();
            assert!((k.c1 + f64::ln(p)).abs() < 1e-14);
            let c2 = (1.0 - p + p.ln()) / (2.0 * p);
            assert!((k.c2 - c2).abs() < 1e-12 * c2.abs().max(1.0), "p={p}");
        }
    }

    #[test]
    fn single_point_has_no_expansion() {
        let c = validate(&[(1.0, 1.0)]).unwrap();
        assert_eq!(
            coeffs_noiseless(&c).unwrap(),
            ExpansionCoefficients { c1: 0.0, c2: 0.0 }
        );
        assert_eq!(
            coeffs_noisy(&c, 2.0).unwrap(),
            ExpansionCoefficients { c1: 0.0, c2: 0.0 }
        );
    }

    #[test]
    fn symmetric_pair_by_substitution() {
        let c = validate(&[(0.0, 0.5), (2.0, 0.5)]).unwrap();
        let k = coeffs_noiseless(&c).unwrap();
        assert!((k.c1 - 2f64.ln()).abs() < 1e-15);
        assert!((k.c2 - 0.5 * (1.0 - 2.0 * 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn degenerate_constellation() {
        let c = validate(&[(0.0, 1.0)]).unwrap();
        assert_eq!(coeffs_noiseless(&c), Err(Error::DegenerateConstellation));
    }

    #[test]
    fn noisy_closed_form() {
        let k = coeffs_noisy(&binary_flash(0.1).unwrap(), 1.0).unwrap();
        assert_eq!(k.c1, 0.0);
        assert!((k.c2 - 4.5).abs() < 1e-13);
        let c = uniform_pem(PemSpec::new(3).unwrap());
        for eps_n in [0.3, 1.0, 7.0] {
            let a = coeffs_noisy(&c, eps_n).unwrap().c2;
            let b = coeffs_noisy(&c, 2.0 * eps_n).unwrap().c2;
            assert_eq!(a, 2.0 * b);
        }
        assert_eq!(
            coeffs(&c, &NoiseModel::PoissonNoise(0.5)),
            coeffs(&c, &NoiseModel::GeometricNoise(0.5))
        );
    }

    #[test]
    fn evaluation() {
        let zero = ExpansionCoefficients { c1: 0.0, c2: 0.0 };
        assert_eq!(expansion_eval(&zero, 3.0), 0.0);
        let k = ExpansionCoefficients { c1: 1.0, c2: -0.5 };
        assert!((expansion_eval(&k, 0.1) - 0.095).abs() < 1e-16);
    }

    #[test]
    fn grid_checks() {
        let c = binary_flash(0.1).unwrap();
        let n = NoiseModel::Noiseless;
        let bad: [&[f64]; 4] = [
            &[1e-3, 1e-4],
            &[1e-3, 1e-4, 1e-4],
            &[1e-3, 5e-4, 2e-4],
            &[1e-3, -1e-4, -1e-5],
        ];
        for g in bad {
            assert!(matches!(
                extract_coeffs_empirical(&c, &n, g, 1e-12),
                Err(Error::GridTooCoarse(_))
            ));
        }
        let too_big = extract_coeffs_empirical(&c, &n, &[1.0, 0.1, 0.01], 1e-12);
        assert!(matches!(too_big, Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn expansion_tracks_flash_closed_form() {
        // I_b(0.1) at 1e-4 against c₁ε + c₂ε²: the gap is O(ε³)
        let k = coeffs_noiseless(&binary_flash(0.1).unwrap()).unwrap();
        let eps = 1e-4;
        let exact = crate::mi::flash_mi(0.1, eps).unwrap();
        assert!((exact - expansion_eval(&k, eps)).abs() < 1e-7 * exact);
    }

    fn constellations() -> impl Strategy<Value = Constellation> {
        prop::collection::vec((0u32..40, 1u32..50), 1..7).prop_map(|v| {
            let total: u32 = v.iter().map(|&(_, w)| w).sum();
            let raw: Vec<(f64, f64)> = v
                .into_iter()
                .map(|(x, w)| (x as f64 * 0.25, w as f64 / total as f64))
                .collect();
            validate(&raw).unwrap()
        })
    }

    proptest! {
        #[test]
        fn noiseless_signs(c in constellations()) {
            prop_assume!(c.moments().mu1 > 0.0);
            let k = coeffs_noiseless(&c).unwrap();
            let scale = c.moments().mu2.max(1.0);
            prop_assert!(k.c1 >= -1e-12 * scale);
            prop_assert!(k.c2 <= 1e-12 * scale);
            if c.len() == 1 {
                prop_assert!(k.c1.abs() <= 1e-12 * scale && k.c2.abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn noisy_sign(c in constellations(), eps_n in 0.01f64..100.0) {
            let k = coeffs_noisy(&c, eps_n).unwrap();
            prop_assert_eq!(k.c1, 0.0);
            prop_assert!(k.c2 >= 0.0);
            if c.len() > 1 {
                prop_assert!(k.c2 > 0.0);
            }
        }
    }
}
