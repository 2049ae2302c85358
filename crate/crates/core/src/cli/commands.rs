use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{self, expansion_eval, extract_coeffs_empirical};
use crate::capacity::{capacity_upper_bound, flash_lower_bound, FlashStrategy};
use crate::mi::{flash_ratio_crossing, flash_ratio_logdomain, mutual_information};
use crate::types::{ChannelPoint, Constellation, NoiseModel};
use crate::unitcost::{capacity_per_unit_cost, energy_per_bit};

use super::config::{
    parse_constellation, parse_noise, resolve_tol, ConfigFile, EpsGrid, Format, OutputGroup, Scale,
    DEFAULT_OUTPUTS, DEFAULT_POINTS,
};
use super::output::{Cell, Table};
use super::{CapacityArgs, CliError, CoeffsArgs, GridArgs, MiArgs, UnitcostArgs};

/// One row of an `mi` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eps_s: f64,
    pub mi_nats: f64,
    pub mi_bits: f64,
    /// `ε_s ln 2 / I`; infinite when `I = 0`.
    pub eb: f64,
    /// `c₁ε_s + c₂ε_s²`.
    pub expansion_nats: f64,
    /// Upper bound on the noiseless capacity, which also bounds every noisy model.
    pub cap_upper_nats: f64,
    /// Best binary-flash information; noiseless model only.
    pub flash_lower_nats: Option<f64>,
    pub error_budget: f64,
}

/// Evaluates one sweep point.
pub fn sweep_record(
    c: &Constellation,
    noise: &NoiseModel,
    eps_s: f64,
    tol: f64,
) -> crate::Result<SweepRecord> {
    let mi = mutual_information(&ChannelPoint::new(c.clone(), *noise, eps_s)?, tol)?;
    let eb = if mi.nats > 0.0 {
        energy_per_bit(eps_s, mi.nats)?
    } else {
        f64::INFINITY
    };
    let k = asymptotics::coeffs(c, noise)?;
    let (cap_upper_nats, flash_lower_nats) = if eps_s == 0.0 {
        (0.0, noise.is_noiseless().then_some(0.0))
    } else {
        let flash = if noise.is_noiseless() {
            Some(flash_lower_bound(eps_s, &FlashStrategy::best_default(eps_s))?.0)
        } else {
            None
        };
        (capacity_upper_bound(eps_s)?, flash)
    };
    Ok(SweepRecord {
        eps_s,
        mi_nats: mi.nats,
        mi_bits: mi.bits(),
        eb,
        expansion_nats: expansion_eval(&k, eps_s),
        cap_upper_nats,
        flash_lower_nats,
        error_budget: mi.error_budget,
    })
}

fn load_config(path: &Option<PathBuf>) -> Result<(ConfigFile, PathBuf), CliError> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok((ConfigFile::default(), PathBuf::new())),
    }
}

fn resolve_grid(
    flags: &GridArgs,
    file: &ConfigFile,
    default: (f64, f64, usize),
) -> Result<EpsGrid, CliError> {
    let grid = EpsGrid {
        start: flags.eps_start.or(file.eps_start).unwrap_or(default.0),
        stop: flags.eps_stop.or(file.eps_stop).unwrap_or(default.1),
        points: flags.eps_points.or(file.eps_points).unwrap_or(default.2),
        scale: flags.eps_scale.or(file.eps_scale).unwrap_or(Scale::Log),
    };
    grid.validate()?;
    Ok(grid)
}

fn resolve_format(
    flag: Option<Format>,
    file: Option<Format>,
    default: Format,
    allowed: &[Format],
) -> Result<Format, CliError> {
    let f = flag.or(file).unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(
            format!("format {f:?} is not available for this command").to_lowercase(),
        ))
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("jobs: {e}")))
}

struct Series {
    label: String,
    constellation: Constellation,
    noise: NoiseModel,
    eb_min: Option<f64>,
}

pub fn mi(a: MiArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (file, base) = load_config(&a.common.config)?;
    let normalize = a.normalize || file.normalize.unwrap_or(false);
    let constellations: Vec<(String, PathBuf)> = if !a.constellation.is_empty() {
        a.constellation
            .iter()
            .map(|s| (s.clone(), PathBuf::new()))
            .collect()
    } else {
        file.constellations()
            .ok_or_else(|| {
                CliError::Usage(
                    "no constellation given (--constellation or `constellation` in the config)"
                        .into(),
                )
            })?
            .into_iter()
            .map(|s| (s, base.clone()))
            .collect()
    };
    let noise_specs = if !a.noise.is_empty() {
        a.noise.clone()
    } else {
        file.noises().unwrap_or_else(|| vec!["none".into()])
    };
    let grid = resolve_grid(&a.grid, &file, (1e-4, 10.0, DEFAULT_POINTS))?;
    let tol = resolve_tol(a.common.tol, file.tol)?;
    let format = resolve_format(
        a.common.format,
        file.format,
        Format::Csv,
        &[Format::Csv, Format::Jsonl],
    )?;
    let jobs = a.jobs.or(file.jobs).unwrap_or(0);
    let mut groups = a
        .outputs
        .clone()
        .or(file.outputs.clone())
        .unwrap_or(DEFAULT_OUTPUTS.to_vec());
    groups.sort();
    groups.dedup();
    if groups.is_empty() {
        return Err(CliError::Usage("outputs: select at least one group".into()));
    }

    let noises = noise_specs
        .iter()
        .map(|s| parse_noise(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut series = Vec::new();
    for (spec, dir) in &constellations {
        let c = parse_constellation(spec, dir, normalize)?;
        for noise in &noises {
            let eb_min = if groups.contains(&OutputGroup::Unitcost) {
                let r = capacity_per_unit_cost(noise)
                    .map_err(CliError::numerical(format!("unit cost for {noise}")))?;
                Some(r.eb_min)
            } else {
                None
            };
            series.push(Series {
                label: spec.trim().to_string(),
                constellation: c.clone(),
                noise: *noise,
                eb_min,
            });
        }
    }

    let eps = grid.values();
    let tasks: Vec<(usize, f64)> = (0..series.len())
        .flat_map(|i| eps.iter().map(move |&e| (i, e)))
        .collect();
    let pool = thread_pool(jobs)?;
    let results: Vec<Result<SweepRecord, CliError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, e)| {
                let s = &series[i];
                sweep_record(&s.constellation, &s.noise, e, tol).map_err(CliError::numerical(
                    format!("{} / {} at eps_s = {e:e}", s.label, s.noise),
                ))
            })
            .collect()
    });

    let has = |g: OutputGroup| groups.contains(&g);
    let mut header = vec!["constellation", "noise", "eps_s"];
    if has(OutputGroup::Mi) {
        header.extend(["mi_nats", "mi_bits"]);
    }
    if has(OutputGroup::Ebit) {
        header.push("eb");
    }
    if has(OutputGroup::Coeffs) {
        header.push("expansion_nats");
    }
    if has(OutputGroup::Bounds) {
        header.extend(["cap_upper_nats", "flash_lower_nats"]);
    }
    if has(OutputGroup::Mi) {
        header.push("error_budget");
    }
    if has(OutputGroup::Unitcost) {
        header.push("eb_min");
    }
    let mut table = Table::new(header);
    for (&(i, _), r) in tasks.iter().zip(results) {
        let r = r?;
        let s = &series[i];
        let mut row = vec![
            Cell::Text(s.label.clone()),
            Cell::Text(s.noise.to_string()),
            Cell::Num(r.eps_s),
        ];
        if has(OutputGroup::Mi) {
            row.extend([Cell::Num(r.mi_nats), Cell::Num(r.mi_bits)]);
        }
        if has(OutputGroup::Ebit) {
            row.push(Cell::Num(r.eb));
        }
        if has(OutputGroup::Coeffs) {
            row.push(Cell::Num(r.expansion_nats));
        }
        if has(OutputGroup::Bounds) {
            row.extend([Cell::Num(r.cap_upper_nats), Cell::opt(r.flash_lower_nats)]);
        }
        if has(OutputGroup::Mi) {
            row.push(Cell::Num(r.error_budget));
        }
        if has(OutputGroup::Unitcost) {
            row.push(Cell::opt(s.eb_min));
        }
        table.push(row);
    }
    table.write(format, out)
}

pub fn coeffs(a: CoeffsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (file, base) = load_config(&a.common.config)?;
    let normalize = a.normalize || file.normalize.unwrap_or(false);
    let (spec, dir) = match (&a.constellation, file.constellations()) {
        (Some(s), _) => (s.clone(), PathBuf::new()),
        (None, Some(v)) if v.len() == 1 => (v[0].clone(), base.clone()),
        (None, Some(_)) => {
            return Err(CliError::Usage(
                "coeffs takes a single constellation".into(),
            ))
        }
        (None, None) => return Err(CliError::Usage("no constellation given".into())),
    };
    let noise_spec = match (&a.noise, file.noises()) {
        (Some(s), _) => s.clone(),
        (None, Some(v)) if v.len() == 1 => v[0].clone(),
        (None, Some(_)) => return Err(CliError::Usage("coeffs takes a single noise model".into())),
        (None, None) => "none".into(),
    };
    let c = parse_constellation(&spec, &dir, normalize)?;
    let noise = parse_noise(&noise_spec)?;
    let grid = resolve_grid(&a.grid, &file, (1e-5, 1e-3, 3))?;
    let tol = resolve_tol(a.common.tol, file.tol)?;
    let format = resolve_format(
        a.common.format,
        file.format,
        Format::Text,
        &[Format::Text, Format::Jsonl],
    )?;

    let mut eps = grid.values();
    eps.reverse();
    let ctx = format!("{spec} / {noise}");
    let closed = asymptotics::coeffs(&c, &noise).map_err(CliError::numerical(ctx.clone()))?;
    let fit = extract_coeffs_empirical(&c, &noise, &eps, tol).map_err(CliError::numerical(ctx))?;
    let rel = |measured: f64, exact: f64| (exact != 0.0).then(|| (measured - exact) / exact);
    let io = |e: std::io::Error| CliError::Io(e.to_string());

    match format {
        Format::Jsonl => {
            let v = json!({
                "constellation": spec,
                "noise": noise.to_string(),
                "closed_form": closed,
                "empirical": fit.coeffs,
                "c1_rel_error": rel(fit.coeffs.c1, closed.c1),
                "c2_rel_error": rel(fit.coeffs.c2, closed.c2),
                "c1_check": fit.c1_check,
                "samples": fit.samples,
            });
            writeln!(out, "{v}").map_err(io)
        }
        _ => {
            let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
            let mut s = String::new();
            s += &format!("constellation  {spec}\nnoise          {noise}\n");
            s += &format!("{:<14} {:>24} {:>24}\n", "", "c1", "c2");
            s += &format!(
                "{:<14} {:>24e} {:>24e}\n",
                "closed form", closed.c1, closed.c2
            );
            s += &format!(
                "{:<14} {:>24e} {:>24e}\n",
                "empirical", fit.coeffs.c1, fit.coeffs.c2
            );
            s += &format!(
                "{:<14} {:>24} {:>24}\n",
                "rel. error",
                show(rel(fit.coeffs.c1, closed.c1)),
                show(rel(fit.coeffs.c2, closed.c2))
            );
            if let Some(chk) = fit.c1_check {
                s += &format!("I/eps_s at eps_s = {:e}: {chk:e}\n", eps[eps.len() - 1]);
            }
            s += &format!("\n{:>24} {:>24} {:>24}\n", "eps_s", "mi_nats", "residual");
            for p in &fit.samples {
                s += &format!("{:>24e} {:>24e} {:>24e}\n", p.eps_s, p.mi_nats, p.residual);
            }
            out.write_all(s.as_bytes()).map_err(io)
        }
    }
}

fn ratio(v: f64, eps: f64) -> Option<f64> {
    (eps < 1.0).then(|| v / (-eps * eps.ln()))
}

fn eb_of(eps: f64, nats: Option<f64>) -> Option<f64> {
    nats.and_then(|i| energy_per_bit(eps, i).ok())
}

pub fn capacity(a: CapacityArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (file, _) = load_config(&a.common.config)?;
    let format = resolve_format(
        a.common.format,
        file.format,
        Format::Csv,
        &[Format::Csv, Format::Jsonl],
    )?;

    if a.logdomain {
        let level = a.level.or(file.level).unwrap_or(0.99);
        let t = flash_ratio_crossing(level)
            .map_err(CliError::numerical(format!("crossing of level {level}")))?;
        let r = flash_ratio_logdomain(t).map_err(CliError::numerical("log-domain ratio"))?;
        let mut table = Table::new(["level", "t_star", "log10_eps_star", "ratio_at_t_star"]);
        table.push(vec![
            Cell::Num(level),
            Cell::Num(t.t()),
            Cell::Num(t.log10_energy()),
            Cell::Num(r),
        ]);
        return table.write(format, out);
    }

    let grid = resolve_grid(&a.grid, &file, (1e-12, 1e-2, DEFAULT_POINTS))?;
    if grid.start <= 0.0 {
        return Err(CliError::Usage(
            "eps_start: capacity needs positive energies".into(),
        ));
    }
    let jobs = a.jobs.or(file.jobs).unwrap_or(0);
    let pool = thread_pool(jobs)?;
    let eps = grid.values();
    let rows: Vec<Result<Vec<Cell>, CliError>> = pool.install(|| {
        eps.par_iter()
            .map(|&e| capacity_row(e).map_err(CliError::numerical(format!("eps_s = {e:e}"))))
            .collect()
    });
    let mut table = Table::new([
        "eps_s",
        "cap_upper_nats",
        "eb_upper",
        "flash_eps_nats",
        "eb_flash_eps",
        "flash_elog_nats",
        "eb_flash_elog",
        "flash_best_nats",
        "p_best",
        "eb_flash_best",
        "ratio_upper",
        "ratio_flash_eps",
        "ratio_flash_elog",
        "ratio_flash_best",
    ]);
    for r in rows {
        table.push(r?);
    }
    table.write(format, out)
}

fn capacity_row(e: f64) -> crate::Result<Vec<Cell>> {
    let upper = capacity_upper_bound(e)?;
    let at_eps = (e <= 1.0)
        .then(|| flash_lower_bound(e, &FlashStrategy::PEqualsEps))
        .transpose()?
        .map(|r| r.0);
    let at_elog = (e < 1.0)
        .then(|| flash_lower_bound(e, &FlashStrategy::PEqualsMinusEpsLogEps))
        .transpose()?
        .map(|r| r.0);
    let (best, p_best) = flash_lower_bound(e, &FlashStrategy::best_default(e))?;
    let r = |v: Option<f64>| Cell::opt(v.and_then(|v| ratio(v, e)));
    Ok(vec![
        Cell::Num(e),
        Cell::Num(upper),
        Cell::opt(eb_of(e, Some(upper))),
        Cell::opt(at_eps),
        Cell::opt(eb_of(e, at_eps)),
        Cell::opt(at_elog),
        Cell::opt(eb_of(e, at_elog)),
        Cell::Num(best),
        Cell::Num(p_best),
        Cell::opt(eb_of(e, Some(best))),
        r(Some(upper)),
        r(at_eps),
        r(at_elog),
        r(Some(best)),
    ])
}

pub fn unitcost(a: UnitcostArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (file, _) = load_config(&a.common.config)?;
    let spec = match (&a.noise, file.noises()) {
        (Some(s), _) => s.clone(),
        (None, Some(v)) if v.len() == 1 => v[0].clone(),
        (None, Some(_)) => {
            return Err(CliError::Usage(
                "unitcost takes a single noise model".into(),
            ))
        }
        (None, None) => return Err(CliError::Usage("no noise model given (--noise)".into())),
    };
    let noise = parse_noise(&spec)?;
    let format = resolve_format(
        a.common.format,
        file.format,
        Format::Text,
        &[Format::Text, Format::Jsonl],
    )?;
    let r = capacity_per_unit_cost(&noise)
        .map_err(CliError::numerical(format!("unit cost for {noise}")))?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match format {
        Format::Jsonl => {
            let v = json!({ "noise": noise.to_string(), "result": r });
            writeln!(out, "{v}").map_err(io)
        }
        _ => {
            let mut s = format!("noise                {noise}\n");
            s += &format!("c1 (nats/energy)     {}\n", r.c1_per_unit_energy);
            s += &format!("eb_min (energy/bit)  {}\n", r.eb_min);
            if let Some(u) = r.upper_bound {
                s += &format!("upper bound 1/eps_n  {u}\n");
            }
            s += &format!("witness              {}\n", r.witness);
            if let Some(t) = &r.numeric {
                s += &format!("numeric sup D/lam    {} (stop: {:?})\n", t.sup, t.stop);
                s += &format!("\n{:>24} {:>24} {:>24}\n", "lam", "d_nats", "d_per_energy");
                for p in &t.points {
                    s += &format!("{:>24e} {:>24e} {:>24e}\n", p.lam, p.d_nats, p.d_per_energy);
                }
            }
            out.write_all(s.as_bytes()).map_err(io)
        }
    }
}
