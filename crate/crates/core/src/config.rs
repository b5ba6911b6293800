//! Flat `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Every key printed by [`effective_params`] is accepted, so
//! a banner written from a spec can be fed back as a config file.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::mac::McsEntry;
use crate::scenario::{LoadGrid, ScenarioSpec};
use crate::schedule::BeaconIntervalLayout;
use crate::sim::SchedulingConfig;
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("cannot parse {x:?}")))
        .collect()
}

fn one<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("cannot parse {v:?}"))
}

fn ns(v: &str) -> Result<SimTime, String> {
    one::<u64>(v).map(SimTime::from_ns)
}

fn check_eta(etas: &[f64]) -> Result<(), String> {
    match etas.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        Some(_) => Err("η must lie in (0,1]".into()),
        None => Ok(()),
    }
}

fn check_rho(rhos: &[f64]) -> Result<(), String> {
    match rhos.iter().find(|&&r| !(r.is_finite() && r >= 0.0)) {
        Some(r) => Err(format!("rho must be non-negative, got {r}")),
        None => Ok(()),
    }
}

fn set(spec: &mut ScenarioSpec, key: &str, v: &str) -> Result<(), String> {
    let b = &mut spec.base;
    let t = &mut b.timing;
    match key {
        "eta" | "eta_grid" => {
            let etas: Vec<f64> = list(v)?;
            check_eta(&etas)?;
            spec.loads = LoadGrid::Eta(etas);
        }
        "rate_bps" | "rate_grid_bps" => {
            let rates: Vec<u64> = list(v)?;
            if rates.contains(&0) {
                return Err("rates must be positive".into());
            }
            spec.loads = LoadGrid::RateBps(rates);
        }
        "n_stas" | "n_stas_grid" => {
            let n: Vec<u32> = list(v)?;
            if n.contains(&0) {
                return Err("n_stas must be at least 1".into());
            }
            spec.n_stas_grid = n;
        }
        "rho" | "rho_grid" => {
            let r: Vec<f64> = list(v)?;
            check_rho(&r)?;
            spec.rho_grid = r;
        }
        "configs" => {
            spec.configs = v
                .split(',')
                .map(|n| SchedulingConfig::by_name(n.trim()).ok_or_else(|| format!("unknown configuration {n:?}")))
                .collect::<Result<_, _>>()?;
        }
        "n_runs" => spec.n_runs = one(v)?,
        "base_seed" => spec.base_seed = one(v)?,
        "horizon_ns" => b.horizon = ns(v)?,
        "bi_duration_ns" | "bhi_duration_ns" => {
            let (bi, bhi) = if key == "bi_duration_ns" {
                (ns(v)?, b.layout.bhi_duration())
            } else {
                (b.layout.bi_duration(), ns(v)?)
            };
            b.layout = BeaconIntervalLayout::new(bi, bhi).map_err(|e| e.to_string())?;
        }
        "mcs" => b.mcs = McsEntry::dmg_sc(one(v)?).ok_or("mcs must be 1..=12")?,
        "packet_size" => b.packet_size = one(v)?,
        "queue_bursts" => b.queue_bursts = one(v)?,
        "guard_ns" => b.guard = ns(v)?,
        "addts_spacing_ns" => {
            let s = ns(v)?;
            b.addts_spacing = (s > SimTime::ZERO).then_some(s);
        }
        "slot_ns" => t.slot = ns(v)?,
        "sifs_ns" => t.sifs = ns(v)?,
        "aifs_ns" => t.aifs = ns(v)?,
        "preamble_header_ns" => t.preamble_header = ns(v)?,
        "block_ack_ns" => t.block_ack_duration = ns(v)?,
        "per_mpdu_overhead" => t.per_mpdu_overhead = one(v)?,
        "per_msdu_overhead" => t.per_msdu_overhead = one(v)?,
        "max_amsdu" => t.max_amsdu = one(v)?,
        "max_ampdu" => t.max_ampdu = one(v)?,
        "cw_min" => t.cw_min = one(v)?,
        "cw_max" => t.cw_max = one(v)?,
        "retry_limit" => t.retry_limit = one(v)?,
        "mgmt_frame_bytes" => t.mgmt_frame_bytes = one(v)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

/// Applies `key=value` lines on top of `spec`.
pub fn parse_config(text: &str, mut spec: ScenarioSpec) -> Result<ScenarioSpec, ConfigError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ConfigError::Line { line: idx + 1, msg };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
        set(&mut spec, key.trim(), value.trim()).map_err(err)?;
    }
    spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(spec)
}

pub fn load_config(path: &Path, spec: ScenarioSpec) -> Result<ScenarioSpec, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text, spec)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Every effective parameter as `(key, value)`, in a stable order.
pub fn effective_params(spec: &ScenarioSpec) -> Vec<(&'static str, String)> {
    let b = &spec.base;
    let t = &b.timing;
    let mut out = vec![match &spec.loads {
        LoadGrid::Eta(v) => ("eta_grid", join(v)),
        LoadGrid::RateBps(v) => ("rate_grid_bps", join(v)),
    }];
    out.extend([
        ("n_stas_grid", join(&spec.n_stas_grid)),
        ("rho_grid", join(&spec.rho_grid)),
        ("configs", spec.configs.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")),
        ("n_runs", spec.n_runs.to_string()),
        ("base_seed", spec.base_seed.to_string()),
        ("horizon_ns", b.horizon.as_ns().to_string()),
        ("bi_duration_ns", b.layout.bi_duration().as_ns().to_string()),
        ("bhi_duration_ns", b.layout.bhi_duration().as_ns().to_string()),
        ("mcs", b.mcs.index.to_string()),
        ("packet_size", b.packet_size.to_string()),
        ("queue_bursts", b.queue_bursts.to_string()),
        ("guard_ns", b.guard.as_ns().to_string()),
        ("addts_spacing_ns", b.addts_spacing.map_or(0, |s| s.as_ns()).to_string()),
        ("slot_ns", t.slot.as_ns().to_string()),
        ("sifs_ns", t.sifs.as_ns().to_string()),
        ("aifs_ns", t.aifs.as_ns().to_string()),
        ("preamble_header_ns", t.preamble_header.as_ns().to_string()),
        ("block_ack_ns", t.block_ack_duration.as_ns().to_string()),
        ("per_mpdu_overhead", t.per_mpdu_overhead.to_string()),
        ("per_msdu_overhead", t.per_msdu_overhead.to_string()),
        ("max_amsdu", t.max_amsdu.to_string()),
        ("max_ampdu", t.max_ampdu.to_string()),
        ("cw_min", t.cw_min.to_string()),
        ("cw_max", t.cw_max.to_string()),
        ("retry_limit", t.retry_limit.to_string()),
        ("mgmt_frame_bytes", t.mgmt_frame_bytes.to_string()),
    ]);
    out
}

/// Reproducibility banner: artifact version, scenario and every effective
/// parameter, itself a valid config file.
pub fn banner(spec: &ScenarioSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# spsim {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# scenario {}", spec.kind);
    for (k, v) in effective_params(spec) {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioKind;

    #[test]
    fn empty_file_keeps_defaults() {
        let spec = parse_config("", ScenarioSpec::scenario1()).unwrap();
        assert_eq!(spec, ScenarioSpec::scenario1());
        assert_eq!(spec.base.layout.bi_duration(), SimTime::from_us(102_400));
        assert_eq!(spec.base.packet_size, 1448);
        assert_eq!(spec.n_runs, 30);
    }

    #[test]
    fn bhi_override_is_applied_and_echoed() {
        let spec = parse_config("# comment\n\nbhi_duration_ns=5000000\n", ScenarioSpec::scenario1()).unwrap();
        assert_eq!(spec.base.layout.bhi_duration(), SimTime::from_ms(5));
        assert!(banner(&spec).contains("bhi_duration_ns=5000000\n"));
    }

    #[test]
    fn eta_out_of_range() {
        let err = parse_config("eta=1.5", ScenarioSpec::custom()).unwrap_err();
        assert!(err.to_string().contains("η must lie in (0,1]"), "{err}");
    }

    #[test]
    fn unknown_key_and_malformed_line() {
        assert!(parse_config("colour=blue", ScenarioSpec::custom()).unwrap_err().to_string().contains("unknown key"));
        assert!(parse_config("just words", ScenarioSpec::custom()).unwrap_err().to_string().contains("line 1"));
        assert!(parse_config("n_runs=many", ScenarioSpec::custom()).is_err());
    }

    #[test]
    fn invalid_timing_is_rejected() {
        assert!(parse_config("cw_min=16", ScenarioSpec::custom()).is_err());
    }

    #[test]
    fn banner_round_trips() {
        let mut spec = ScenarioSpec::scenario2();
        spec.base.timing.cw_max = 511;
        spec.configs = vec![SchedulingConfig::SP2];
        let back = parse_config(&banner(&spec), ScenarioSpec::for_kind(ScenarioKind::Two)).unwrap();
        assert_eq!(back, spec);
    }
}
