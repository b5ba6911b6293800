//! Parameter sweeps over the three evaluation scenarios (or a custom grid),
//! replicated over seeded runs.

use std::fmt;

use rayon::prelude::*;

use crate::kpi::{aggregate, AggregateKpi, RunKpi};
use crate::schedule::DtiSchedule;
use crate::sim::{run, Load, SchedulingConfig, SimConfig, SimError, TxLogEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Offered load sweep.
    One,
    /// Station-count sweep at fixed per-station rates.
    Two,
    /// Period deviation sweep.
    Three,
    Custom,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::One => "scenario1",
            ScenarioKind::Two => "scenario2",
            ScenarioKind::Three => "scenario3",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<ScenarioKind> {
        [ScenarioKind::One, ScenarioKind::Two, ScenarioKind::Three, ScenarioKind::Custom]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Offered-load axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadGrid {
    Eta(Vec<f64>),
    RateBps(Vec<u64>),
}

impl LoadGrid {
    fn loads(&self) -> Vec<Load> {
        match self {
            LoadGrid::Eta(v) => v.iter().map(|&e| Load::Eta(e)).collect(),
            LoadGrid::RateBps(v) => v.iter().map(|&r| Load::RateBps(r)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LoadGrid::Eta(v) => v.len(),
            LoadGrid::RateBps(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub loads: LoadGrid,
    pub n_stas_grid: Vec<u32>,
    pub rho_grid: Vec<f64>,
    pub configs: Vec<SchedulingConfig>,
    pub n_runs: u32,
    pub base_seed: u64,
    /// Everything that is not swept.
    pub base: SimConfig,
}

pub const DEFAULT_RUNS: u32 = 30;
pub const DEFAULT_SEED: u64 = 1;

impl ScenarioSpec {
    pub fn scenario1() -> Self {
        let mut etas = vec![0.01];
        etas.extend((1..=9).map(|k| f64::from(k) / 10.0));
        ScenarioSpec {
            kind: ScenarioKind::One,
            loads: LoadGrid::Eta(etas),
            n_stas_grid: vec![4],
            rho_grid: vec![0.0],
            configs: SchedulingConfig::ALL.to_vec(),
            n_runs: DEFAULT_RUNS,
            base_seed: DEFAULT_SEED,
            base: SimConfig::default(),
        }
    }

    pub fn scenario2() -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Two,
            loads: LoadGrid::RateBps(vec![50_000_000, 100_000_000, 200_000_000]),
            n_stas_grid: (1..=10).collect(),
            ..Self::scenario1()
        }
    }

    pub fn scenario3() -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Three,
            loads: LoadGrid::Eta(vec![0.75]),
            rho_grid: vec![0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2],
            ..Self::scenario1()
        }
    }

    pub fn custom() -> Self {
        ScenarioSpec { kind: ScenarioKind::Custom, loads: LoadGrid::Eta(vec![0.5]), ..Self::scenario1() }
    }

    pub fn for_kind(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::One => Self::scenario1(),
            ScenarioKind::Two => Self::scenario2(),
            ScenarioKind::Three => Self::scenario3(),
            ScenarioKind::Custom => Self::custom(),
        }
    }

    /// Grid points in sweep order: load, then station count, then rho.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for load in self.loads.loads() {
            for &n_stas in &self.n_stas_grid {
                for &rho in &self.rho_grid {
                    out.push(GridPoint { load, n_stas, rho });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if self.loads.is_empty() || self.n_stas_grid.is_empty() || self.rho_grid.is_empty() {
            return bad("grids must be non-empty");
        }
        if self.configs.is_empty() {
            return bad("at least one scheduling configuration is required");
        }
        if self.n_runs == 0 {
            return bad("n_runs must be at least 1");
        }
        if self.base_seed.checked_add(u64::from(self.n_runs)).is_none() {
            return bad("base_seed + n_runs overflows");
        }
        for p in self.grid() {
            self.config_for(&p, self.configs[0]).validate()?;
        }
        Ok(())
    }

    pub fn config_for(&self, point: &GridPoint, scheduling: SchedulingConfig) -> SimConfig {
        SimConfig { load: point.load, n_stas: point.n_stas, rho: point.rho, scheduling, ..self.base.clone() }
    }

    /// Seed of run `r`; independent of the grid point and configuration.
    pub fn run_seed(&self, r: u32) -> u64 {
        self.base_seed + u64::from(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub load: Load,
    pub n_stas: u32,
    pub rho: f64,
}

impl GridPoint {
    /// eta, or the per-station rate in b/s.
    pub fn load_value(&self) -> f64 {
        match self.load {
            Load::Eta(e) => e,
            Load::RateBps(r) => r as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRow {
    pub point: GridPoint,
    pub config: SchedulingConfig,
    pub run_seed: u64,
    pub kpi: RunKpi,
}

#[derive(Debug, Clone)]
pub struct AggRow {
    pub point: GridPoint,
    pub config: SchedulingConfig,
    pub kpi: AggregateKpi,
}

/// Extra artifacts kept from the first run of each (point, config).
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub point_index: usize,
    pub config: SchedulingConfig,
    pub schedule: DtiSchedule,
    pub tx_log: Vec<TxLogEntry>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResults {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<AggRow>,
    pub artifacts: Vec<RunArtifacts>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub keep_tx_log: bool,
}

/// Runs every (grid point, configuration, run) and aggregates per
/// (grid point, configuration). Output order does not depend on `jobs`.
pub fn run_scenario(spec: &ScenarioSpec, opts: RunOptions) -> Result<ScenarioResults, SimError> {
    spec.validate()?;
    let grid = spec.grid();
    let tasks: Vec<(usize, SchedulingConfig, u32)> = grid
        .iter()
        .enumerate()
        .flat_map(|(g, _)| spec.configs.iter().flat_map(move |&c| (0..spec.n_runs).map(move |r| (g, c, r))))
        .collect();
    let work = |&(g, c, r): &(usize, SchedulingConfig, u32)| -> Result<(RunRow, Option<RunArtifacts>), SimError> {
        let mut cfg = spec.config_for(&grid[g], c);
        cfg.tx_log = opts.keep_tx_log && r == 0;
        let out = run(&cfg, spec.run_seed(r))?;
        let artifacts = (r == 0).then_some(RunArtifacts {
            point_index: g,
            config: c,
            schedule: out.schedule,
            tx_log: out.tx_log,
        });
        Ok((RunRow { point: grid[g], config: c, run_seed: out.run_seed, kpi: out.kpi }, artifacts))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| tasks.par_iter().map(work).collect::<Result<Vec<_>, _>>())?;

    let mut runs = Vec::with_capacity(results.len());
    let mut artifacts = Vec::new();
    for (row, art) in results {
        runs.push(row);
        artifacts.extend(art);
    }
    let aggregates = runs
        .chunks(spec.n_runs as usize)
        .map(|chunk| AggRow {
            point: chunk[0].point,
            config: chunk[0].config,
            kpi: aggregate(&chunk.iter().map(|r| r.kpi.clone()).collect::<Vec<_>>()),
        })
        .collect();
    Ok(ScenarioResults { runs, aggregates, artifacts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::SimTime;

    #[test]
    fn default_grids() {
        assert_eq!(ScenarioSpec::scenario1().grid().len(), 10);
        assert_eq!(ScenarioSpec::scenario2().grid().len(), 30);
        assert_eq!(ScenarioSpec::scenario3().grid().len(), 9);
        let s1 = ScenarioSpec::scenario1();
        assert_eq!(s1.grid().len() * s1.configs.len() * s1.n_runs as usize, 1200);
    }

    #[test]
    fn order_is_independent_of_jobs() {
        let mut spec = ScenarioSpec::custom();
        spec.loads = LoadGrid::Eta(vec![0.3, 0.6]);
        spec.n_runs = 3;
        spec.base.horizon = SimTime::from_ms(500);
        let a = run_scenario(&spec, RunOptions { jobs: 1, ..Default::default() }).unwrap();
        let b = run_scenario(&spec, RunOptions { jobs: 3, ..Default::default() }).unwrap();
        assert_eq!(a.runs.len(), 2 * 4 * 3);
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!((x.config, x.run_seed), (y.config, y.run_seed));
            assert_eq!(x.kpi, y.kpi);
        }
        assert_eq!(a.aggregates.len(), 8);
        assert_eq!(a.artifacts.len(), 8);
    }

    #[test]
    fn invalid_eta_is_rejected() {
        let mut spec = ScenarioSpec::custom();
        spec.loads = LoadGrid::Eta(vec![1.5]);
        let err = run_scenario(&spec, RunOptions::default()).unwrap_err();
        assert!(err.to_string().contains("η must lie in (0,1]"));
    }
}
