use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use spsim_core::config::{banner, load_config};
use spsim_core::plot::emit_plots;
use spsim_core::report::{read_aggregate_csv, write_aggregate_csv, write_runs_csv};
use spsim_core::scenario::{run_scenario, RunOptions, ScenarioKind, ScenarioResults, ScenarioSpec};
use spsim_core::sim::write_tx_log;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scenario {
    Scenario1,
    Scenario2,
    Scenario3,
    Custom,
}

impl From<Scenario> for ScenarioKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::Scenario1 => ScenarioKind::One,
            Scenario::Scenario2 => ScenarioKind::Two,
            Scenario::Scenario3 => ScenarioKind::Three,
            Scenario::Custom => ScenarioKind::Custom,
        }
    }
}

/// Run a scenario sweep and write CSV results, SVG plots and a parameter banner.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    scenario: Scenario,
    /// key=value file applied on top of the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: out/<scenario>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Independent runs per grid point and configuration.
    #[arg(long)]
    runs: Option<u32>,
    /// Base seed; run r uses seed + r.
    #[arg(long, env = "SIM_SEED")]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write the DTI schedule of every grid point and configuration.
    #[arg(long)]
    dump_schedule: bool,
    /// Write the per-transmission log of the first run of every grid point
    /// and configuration.
    #[arg(long)]
    tx_log: bool,
}

fn build_spec(args: &Args) -> Result<ScenarioSpec> {
    let mut spec = ScenarioSpec::for_kind(args.scenario.into());
    if let Some(path) = &args.config {
        spec = load_config(path, spec)?;
    }
    if let Some(n) = args.runs {
        spec.n_runs = n;
    }
    if let Some(s) = args.seed {
        spec.base_seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn write_outputs(dir: &Path, spec: &ScenarioSpec, res: &ScenarioResults, args: &Args) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let create = |name: &str| -> Result<(PathBuf, fs::File)> {
        let p = dir.join(name);
        let f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        Ok((p, f))
    };
    let (p, f) = create("banner.txt")?;
    std::io::Write::write_all(&mut &f, banner(spec).as_bytes())?;
    written.push(p);
    let (p, f) = create("runs.csv")?;
    write_runs_csv(spec.kind, &res.runs, f)?;
    written.push(p);
    let (agg_path, f) = create("aggregate.csv")?;
    write_aggregate_csv(spec.kind, &res.aggregates, f)?;
    written.push(agg_path.clone());

    let rows = read_aggregate_csv(fs::File::open(&agg_path)?)?;
    written.extend(emit_plots(&rows, spec.kind, dir)?);

    for (flag, sub) in [(args.dump_schedule, "schedules"), (args.tx_log, "txlog")] {
        if !flag {
            continue;
        }
        let d = dir.join(sub);
        fs::create_dir_all(&d)?;
        for a in &res.artifacts {
            let p = d.join(format!("{}_p{}.csv", a.config.name(), a.point_index));
            let f = fs::File::create(&p)?;
            if sub == "schedules" {
                a.schedule.write_csv(f)?;
            } else {
                write_tx_log(&a.tx_log, f)?;
            }
        }
        written.push(d);
    }
    Ok(written)
}

/// Writes into a staging directory and moves the results into `out` only
/// when everything succeeded.
fn publish(out: &Path, spec: &ScenarioSpec, res: &ScenarioResults, args: &Args) -> Result<usize> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let staging = out.join(format!(".staging-{}", std::process::id()));
    fs::create_dir_all(&staging)?;
    let result = write_outputs(&staging, spec, res, args).and_then(|paths| {
        for p in &paths {
            let dest = out.join(p.file_name().expect("named output"));
            if dest.is_dir() {
                fs::remove_dir_all(&dest)?;
            }
            fs::rename(p, &dest)?;
        }
        Ok(paths.len())
    });
    let _ = fs::remove_dir_all(&staging);
    result
}

fn main() -> ExitCode {
    let args = Args::parse();
    let run = || -> Result<()> {
        let spec = build_spec(&args)?;
        let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out").join(spec.kind.name()));
        let opts = RunOptions { jobs: args.jobs, keep_tx_log: args.tx_log };
        let res = run_scenario(&spec, opts)?;
        let n = publish(&out, &spec, &res, &args)?;
        println!("{}: {} runs, {} outputs in {}", spec.kind, res.runs.len(), n, out.display());
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
