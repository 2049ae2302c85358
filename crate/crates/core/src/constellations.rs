//! Named input ensembles: uniform PEM and binary flash.

use crate::error::{Error, Result};
use crate::types::{validate, Constellation};

/// `2^m`-level uniform pulse-energy modulation, `1 ≤ m ≤ 16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PemSpec {
    m: u32,
}

impl PemSpec {
    pub const MAX_BITS: u32 = 16;

    pub fn new(m: u32) -> Result<Self> {
        if (1..=Self::MAX_BITS).contains(&m) {
            Ok(Self { m })
        } else {
            Err(Error::DomainError(format!(
                "PEM order m = {m} outside 1..={}",
                Self::MAX_BITS
            )))
        }
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    pub fn levels(&self) -> u64 {
        1u64 << self.m
    }
}

/// Equiprobable levels `x_k = 2k/(2^m − 1)`, spanning `[0, 2]` with mean 1.
pub fn uniform_pem(spec: PemSpec) -> Constellation {
    let n = spec.levels();
    // Σ_k 2k = n(n−1), so the mean (1/n)·Σ 2k/(n−1) is exactly one.
    debug_assert_eq!((0..n).map(|k| 2 * k).sum::<u64>(), n * (n - 1));
    let denom = (n - 1) as f64;
    let p = 1.0 / n as f64;
    let raw: Vec<(f64, f64)> = (0..n).map(|k| (2.0 * k as f64 / denom, p)).collect();
    validate(&raw).expect("uniform PEM is a valid constellation")
}

/// Binary flash: `0` with probability `1 − p`, `1/p` with probability `p`.
pub fn binary_flash(p: f64) -> Result<Constellation> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::DomainError(format!(
            "flash probability {p} not in (0, 1]"
        )));
    }
    validate(&[(0.0, 1.0 - p), (1.0 / p, p)])
}

/// Rescales amplitudes so that `μ₁ = 1`.
///
/// `I(normalize(c), ε)` equals `I(c, ε/μ₁(c))`, since only the products
/// `ε_s·x` enter the channel law.
pub fn normalize_unit_energy(c: &Constellation) -> Result<Constellation> {
    let mu1 = c.moments().mu1;
    if mu1 <= 0.0 {
        return Err(Error::DegenerateConstellation);
    }
    if mu1 == 1.0 {
        return Ok(c.clone());
    }
    Ok(c.scaled(1.0 / mu1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pem_small_orders() {
        let c = uniform_pem(PemSpec::new(1).unwrap());
        assert_eq!(c.points(), &[(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(c.moments().mu2, 2.0);

        let c = uniform_pem(PemSpec::new(2).unwrap());
        let xs: Vec<f64> = c.points().iter().map(|p| p.0).collect();
        let expect = [0.0, 2.0 / 3.0, 4.0 / 3.0, 2.0];
        for (a, b) in xs.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((c.moments().mu1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pem_moments_match_brute_force() {
        for m in 1..=12 {
            let c = uniform_pem(PemSpec::new(m).unwrap());
            let n = (1u64 << m) as f64;
            // closed forms for the arithmetic progression 2k/(n−1)
            let mu2 = 2.0 * (2.0 * n - 1.0) / (3.0 * (n - 1.0));
            let mom = c.moments();
            assert!((mom.mu1 - 1.0).abs() < 1e-13, "m={m}");
            assert!((mom.mu2 - mu2).abs() < 1e-12, "m={m}");
            assert_eq!(c.len() as f64, n);
        }
        assert!(PemSpec::new(0).is_err());
        assert!(PemSpec::new(17).is_err());
    }

    #[test]
    fn flash_examples() {
        assert_eq!(binary_flash(1.0).unwrap().points(), &[(1.0, 1.0)]);
        assert_eq!(
            binary_flash(0.5).unwrap().points(),
            &[(0.0, 0.5), (2.0, 0.5)]
        );
        let m = binary_flash(0.1).unwrap().moments();
        assert!((m.mu1 - 1.0).abs() < 1e-15 && (m.mu2 - 10.0).abs() < 1e-13);
        assert!(binary_flash(0.0).is_err());
        assert!(binary_flash(1.5).is_err());
        assert!(binary_flash(f64::NAN).is_err());
    }

    #[test]
    fn normalization() {
        let c = validate(&[(0.0, 0.5), (4.0, 0.5)]).unwrap();
        let n = normalize_unit_energy(&c).unwrap();
        assert_eq!(n.points(), &[(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(normalize_unit_energy(&n).unwrap(), n);
        let unit = uniform_pem(PemSpec::new(3).unwrap());
        let again = normalize_unit_energy(&unit).unwrap();
        for (a, b) in unit.points().iter().zip(again.points()) {
            assert!((a.0 - b.0).abs() < 1e-15);
        }
        let zero = validate(&[(0.0, 1.0)]).unwrap();
        assert_eq!(
            normalize_unit_energy(&zero),
            Err(Error::DegenerateConstellation)
        );
    }
}
