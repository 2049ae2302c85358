//! Constellations, noise models and channel operating points.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on `|Σp − 1|`.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// A finite input distribution over nonnegative amplitudes.
///
/// Points are kept in strictly increasing amplitude order with positive
/// probabilities, so two constellations describing the same law compare equal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constellation {
    points: Vec<(f64, f64)>,
}

/// First and second moments of a constellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mu1: f64,
    pub mu2: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.mu2 - self.mu1 * self.mu1
    }
}

/// Canonicalizes a raw `(amplitude, probability)` list.
///
/// Points are sorted, duplicate amplitudes are merged by summing their
/// probabilities and zero-probability points are dropped.
pub fn validate(raw: &[(f64, f64)]) -> Result<Constellation> {
    for &(x, p) in raw {
        if !x.is_finite() {
            return Err(Error::NonFiniteAmplitude(x));
        }
        if x < 0.0 {
            return Err(Error::NegativeAmplitude(x));
        }
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidProbability(p));
        }
    }
    let mut pts: Vec<(f64, f64)> = raw.iter().copied().filter(|&(_, p)| p > 0.0).collect();
    if pts.is_empty() {
        return Err(Error::EmptyConstellation);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, p) in pts {
        match merged.last_mut() {
            // -0.0 and 0.0 land here together
            Some(last) if last.0 == x => last.1 += p,
            _ => merged.push((if x == 0.0 { 0.0 } else { x }, p)),
        }
    }
    let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::ProbabilitySumMismatch { sum });
    }
    Ok(Constellation { points: merged })
}

impl Constellation {
    pub fn new(raw: &[(f64, f64)]) -> Result<Self> {
        validate(raw)
    }

    /// Parses the `x p` per-line text format. `#` starts a comment.
    pub fn from_text(text: &str) -> std::result::Result<Self, ParseError> {
        let mut raw = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(ParseError::new(
                    idx + 1,
                    format!("expected `x p`, found {} field(s)", fields.len()),
                ));
            }
            let x = parse_f64(fields[0])
                .map_err(|m| ParseError::new(idx + 1, format!("amplitude: {m}")))?;
            let p = parse_f64(fields[1])
                .map_err(|m| ParseError::new(idx + 1, format!("probability: {m}")))?;
            raw.push((x, p));
        }
        validate(&raw).map_err(|e| ParseError::new(0, e.to_string()))
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn moments(&self) -> Moments {
        let (mu1, mu2) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(m1, m2), &(x, p)| (m1 + p * x, m2 + p * x * x));
        Moments { mu1, mu2 }
    }

    pub fn min_probability(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).fold(1.0, f64::min)
    }

    pub fn max_amplitude(&self) -> f64 {
        self.points.last().map_or(0.0, |&(x, _)| x)
    }

    /// Multiplies every amplitude by `factor > 0`.
    pub(crate) fn scaled(&self, factor: f64) -> Constellation {
        Constellation {
            points: self.points.iter().map(|&(x, p)| (x * factor, p)).collect(),
        }
    }
}

pub fn moments(c: &Constellation) -> Moments {
    c.moments()
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

/// A text-format parse failure. `line` is 1-based; 0 means the whole input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: String) -> Self {
        Self { line, message }
    }
}

/// The additive noise count `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", content = "eps_n", rename_all = "snake_case")]
pub enum NoiseModel {
    Noiseless,
    /// Poisson counts of mean `eps_n`.
    PoissonNoise(f64),
    /// Geometric counts of mean `eps_n`, `P(z) = (1/(1+ε)) (ε/(1+ε))^z`.
    GeometricNoise(f64),
}

impl NoiseModel {
    pub fn poisson(eps_n: f64) -> Result<Self> {
        check_noise(eps_n).map(NoiseModel::PoissonNoise)
    }

    pub fn geometric(eps_n: f64) -> Result<Self> {
        check_noise(eps_n).map(NoiseModel::GeometricNoise)
    }

    /// Mean noise count; zero for the noiseless model.
    pub fn mean(&self) -> f64 {
        match *self {
            NoiseModel::Noiseless => 0.0,
            NoiseModel::PoissonNoise(e) | NoiseModel::GeometricNoise(e) => e,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        matches!(self, NoiseModel::Noiseless)
    }

    pub(crate) fn check(&self) -> Result<()> {
        match *self {
            NoiseModel::Noiseless => Ok(()),
            NoiseModel::PoissonNoise(e) | NoiseModel::GeometricNoise(e) => {
                check_noise(e).map(|_| ())
            }
        }
    }
}

fn check_noise(eps_n: f64) -> Result<f64> {
    if eps_n.is_finite() && eps_n > 0.0 {
        Ok(eps_n)
    } else {
        Err(Error::InvalidNoiseMean(eps_n))
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Noiseless => write!(f, "none"),
            NoiseModel::PoissonNoise(e) => write!(f, "poisson:{e}"),
            NoiseModel::GeometricNoise(e) => write!(f, "geometric:{e}"),
        }
    }
}

impl FromStr for NoiseModel {
    type Err = String;

    /// `none`, `poisson:<eps_n>` or `geometric:<eps_n>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "none" || s == "noiseless" {
            return Ok(NoiseModel::Noiseless);
        }
        let (kind, value) = s.split_once(':').ok_or_else(|| {
            format!(
                "unknown noise spec `{s}` (expected none | poisson:<eps_n> | geometric:<eps_n>)"
            )
        })?;
        let eps_n = parse_f64(value)?;
        let model = match kind {
            "poisson" => NoiseModel::poisson(eps_n),
            "geometric" => NoiseModel::geometric(eps_n),
            other => return Err(format!("unknown noise model `{other}`")),
        };
        model.map_err(|e| e.to_string())
    }
}

/// A full channel instance at one signal energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPoint {
    pub constellation: Constellation,
    pub noise: NoiseModel,
    pub eps_s: f64,
}

impl ChannelPoint {
    pub fn new(constellation: Constellation, noise: NoiseModel, eps_s: f64) -> Result<Self> {
        if !eps_s.is_finite() || eps_s < 0.0 {
            return Err(Error::InvalidEnergy(eps_s));
        }
        noise.check()?;
        Ok(Self {
            constellation,
            noise,
            eps_s,
        })
    }
}
