//! Sweep configuration: recipe files, flag overrides and validation.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::constellations::{binary_flash, normalize_unit_energy, uniform_pem, PemSpec};
use crate::types::{Constellation, NoiseModel};

use super::CliError;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_POINTS: usize = 50;
pub const TOL_ENV: &str = "PCL_DEFAULT_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Jsonl,
}

/// Column groups of an `mi` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputGroup {
    /// `mi_nats`, `mi_bits`, `error_budget`.
    Mi,
    /// `eb`.
    Ebit,
    /// `expansion_nats`.
    Coeffs,
    /// `cap_upper_nats`, `flash_lower_nats`.
    Bounds,
    /// `eb_min`.
    Unitcost,
}

pub const DEFAULT_OUTPUTS: [OutputGroup; 4] = [
    OutputGroup::Mi,
    OutputGroup::Ebit,
    OutputGroup::Coeffs,
    OutputGroup::Bounds,
];

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Free text describing the recipe; not interpreted.
    pub label: Option<String>,
    pub constellation: Option<OneOrMany>,
    pub noise: Option<OneOrMany>,
    pub eps_start: Option<f64>,
    pub eps_stop: Option<f64>,
    pub eps_points: Option<usize>,
    pub eps_scale: Option<Scale>,
    pub tol: Option<f64>,
    pub outputs: Option<Vec<OutputGroup>>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub normalize: Option<bool>,
    pub level: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ConfigFile = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn constellations(&self) -> Option<Vec<String>> {
        self.constellation.clone().map(OneOrMany::into_vec)
    }

    pub fn noises(&self) -> Option<Vec<String>> {
        self.noise.clone().map(OneOrMany::into_vec)
    }
}

/// Grid of signal energies, always ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl EpsGrid {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.points == 0 {
            return usage("eps_points: the energy grid is empty".into());
        }
        if self.points < 2 {
            return usage(format!(
                "eps_points: need at least 2 points, got {}",
                self.points
            ));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return usage("eps_start/eps_stop: must be finite".into());
        }
        if self.start >= self.stop {
            return usage(format!(
                "eps_start ({}) must be below eps_stop ({})",
                self.start, self.stop
            ));
        }
        match self.scale {
            Scale::Log if self.start <= 0.0 => usage(format!(
                "eps_start: log grid needs a positive start, got {}",
                self.start
            )),
            Scale::Linear if self.start < 0.0 => usage(format!(
                "eps_start: energies are nonnegative, got {}",
                self.start
            )),
            _ => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut v: Vec<f64> = match self.scale {
            Scale::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..n)
                    .map(|i| (a + (b - a) * i as f64 / last).exp())
                    .collect()
            }
            Scale::Linear => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
                .collect(),
        };
        v[0] = self.start;
        v[n - 1] = self.stop;
        v
    }
}

/// Resolves `pem:<m>`, `flash:<p>` or `file:<path>`; relative paths are taken
/// from `base`.
pub fn parse_constellation(
    spec: &str,
    base: &Path,
    normalize: bool,
) -> Result<Constellation, CliError> {
    let usage = |m: String| CliError::Usage(format!("constellation `{spec}`: {m}"));
    let (kind, arg) = spec
        .trim()
        .split_once(':')
        .ok_or_else(|| usage("expected pem:<m>, flash:<p> or file:<path>".into()))?;
    let c = match kind {
        "pem" => {
            let m: u32 = arg
                .trim()
                .parse()
                .map_err(|_| usage(format!("`{arg}` is not a PEM order")))?;
            uniform_pem(PemSpec::new(m).map_err(|e| usage(e.to_string()))?)
        }
        "flash" => {
            let p: f64 = arg
                .trim()
                .parse()
                .map_err(|_| usage(format!("`{arg}` is not a probability")))?;
            binary_flash(p).map_err(|e| usage(e.to_string()))?
        }
        "file" => {
            let path = base.join(arg);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            Constellation::from_text(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        other => return Err(usage(format!("unknown kind `{other}`"))),
    };
    if normalize {
        normalize_unit_energy(&c).map_err(|e| usage(e.to_string()))
    } else {
        Ok(c)
    }
}

pub fn parse_noise(spec: &str) -> Result<NoiseModel, CliError> {
    spec.parse()
        .map_err(|m| CliError::Usage(format!("noise `{spec}`: {m}")))
}

/// Flag, then config file, then `PCL_DEFAULT_TOL`, then `1e-12`.
pub fn resolve_tol(flag: Option<f64>, file: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag.or(file) {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}: `{s}` is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol > 0.0 && tol < 1.0 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("tol: {tol} is outside (0, 1)")))
    }
}
