//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every statistical point uses 30 runs of 10 s with base seed 1. A failed
//! criterion is reported but only turns into a nonzero exit status when
//! `ACCEPTANCE_STRICT=1` is set, so the regular test run stays usable while
//! the outcome remains visible.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use spsim_core::kpi::{aggregate, AggregateKpi, MetricSummary, RunKpi};
use spsim_core::mac::{sp_duration_for, sp_service, MacTimingParams, McsEntry, QueuedPacket, TxQueue};
use spsim_core::rng::RngStream;
use spsim_core::schedule::{admit_periodic, AddtsRequest, AddtsResponse, BeaconIntervalLayout, DtiSchedule, StaId};
use spsim_core::sim::{run, FlowConservation, Load, SchedulingConfig, SimConfig};
use spsim_core::time::SimTime;

const RUNS: u32 = 30;
const BASE_SEED: u64 = 1;
const T_MS: f64 = 102.4;
const S1_ETAS: [f64; 10] = [0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const S3_RHOS: [f64; 9] = [0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2];

const CBAP: SchedulingConfig = SchedulingConfig::CBAP_ONLY;
const SP1: SchedulingConfig = SchedulingConfig::SP1;
const SP2: SchedulingConfig = SchedulingConfig::SP2;
const SP3: SchedulingConfig = SchedulingConfig::SP3;

#[derive(Clone, Copy)]
struct Point {
    load: Load,
    n: u32,
    rho: f64,
}

fn eta(e: f64) -> Point {
    Point { load: Load::Eta(e), n: 4, rho: 0.0 }
}

type Key = (String, u32, u64, &'static str);

/// Runs each (point, configuration) once and remembers the aggregate.
#[derive(Default)]
struct Lab {
    cache: HashMap<Key, AggregateKpi>,
    conservation_failures: Vec<String>,
    runs: usize,
}

impl Lab {
    fn get(&mut self, p: Point, c: SchedulingConfig) -> AggregateKpi {
        let key = (format!("{:?}", p.load), p.n, p.rho.to_bits(), c.name());
        if let Some(k) = self.cache.get(&key) {
            return k.clone();
        }
        let cfg = SimConfig { load: p.load, n_stas: p.n, rho: p.rho, scheduling: c, ..SimConfig::default() };
        let outs: Vec<(RunKpi, bool)> = (0..RUNS)
            .into_par_iter()
            .map(|r| {
                let out = run(&cfg, BASE_SEED + u64::from(r)).expect("valid configuration");
                (out.kpi, out.conservation.iter().all(FlowConservation::holds))
            })
            .collect();
        for (r, (_, ok)) in outs.iter().enumerate() {
            if !ok {
                self.conservation_failures.push(format!("{} {:?} n={} rho={} run {r}", c, p.load, p.n, p.rho));
            }
        }
        self.runs += outs.len();
        let agg = aggregate(&outs.into_iter().map(|o| o.0).collect::<Vec<_>>());
        self.cache.insert(key, agg.clone());
        agg
    }

    fn delay_ms(&mut self, p: Point, c: SchedulingConfig) -> MetricSummary {
        let m = self.get(p, c).avg_delay_s;
        MetricSummary { mean: m.mean.map(|x| x * 1e3), ci95: m.ci95.map(|x| x * 1e3), n: m.n }
    }
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("[acceptance] {id} {name} ... {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
}

fn mean(m: &MetricSummary) -> f64 {
    m.mean.unwrap_or(f64::NAN)
}

fn ci(m: &MetricSummary) -> f64 {
    m.ci95.unwrap_or(f64::INFINITY)
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target
}

fn c1(lab: &mut Lab, rep: &mut Report) {
    let cases = [eta(0.2), eta(0.5), eta(0.8), Point { n: 2, ..eta(0.5) }, Point { n: 8, ..eta(0.5) }];
    let mut ok = true;
    let mut parts = Vec::new();
    for p in cases {
        let d = mean(&lab.delay_ms(p, SP2));
        ok &= rel(d, T_MS / 2.0) <= 0.05;
        parts.push(format!("{:?}/N={}: {d:.2} ms", p.load, p.n));
    }
    rep.line("C1", "SP2 mean delay within 5% of T/2 = 51.2 ms", ok, parts.join(", "));
}

fn c2(lab: &mut Lab, rep: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for e in [0.3, 0.6, 0.9] {
        let oracle = e * T_MS / 8.0;
        let d = mean(&lab.delay_ms(eta(e), SP1));
        ok &= rel(d, oracle) <= 0.15;
        parts.push(format!("η={e}: {d:.2} vs {oracle:.2} ms"));
    }
    rep.line("C2", "SP1 mean delay within 15% of ηT/(2N)", ok, parts.join(", "));
}

fn c3(lab: &mut Lab, rep: &mut Report) {
    let order = [SP1, CBAP, SP3, SP2];
    let ds: Vec<MetricSummary> = order.iter().map(|&c| lab.delay_ms(eta(0.75), c)).collect();
    let ok = ds.windows(2).all(|w| mean(&w[1]) - mean(&w[0]) > ci(&w[0]) + ci(&w[1]));
    let detail = order
        .iter()
        .zip(&ds)
        .map(|(c, d)| format!("{c} {:.2}±{:.2}", mean(d), ci(d)))
        .collect::<Vec<_>>()
        .join(" < ");
    rep.line("C3", "delay ordering SP1 < CBAP-only < SP3 < SP2 at η=0.75", ok, format!("{detail} ms"));
}

fn c4(lab: &mut Lab, rep: &mut Report) {
    let mut ok = true;
    let mut worst_low = f64::INFINITY;
    for e in S1_ETAS.iter().copied().filter(|&e| e <= 0.8) {
        let nt = mean(&lab.get(eta(e), CBAP).norm_throughput);
        worst_low = worst_low.min(nt);
        ok &= nt >= 0.995;
    }
    let at09 = mean(&lab.get(eta(0.9), CBAP).norm_throughput);
    ok &= at09 <= 0.97;
    let mut sp_worst = f64::INFINITY;
    for c in [SP1, SP2] {
        for e in S1_ETAS {
            let nt = mean(&lab.get(eta(e), c).norm_throughput);
            sp_worst = sp_worst.min(nt);
            ok &= nt >= 0.995;
        }
    }
    rep.line(
        "C4",
        "stability threshold of CBAP-only, lossless SP1/SP2",
        ok,
        format!("CBAP min over η≤0.8 {worst_low:.4}, at η=0.9 {at09:.4}; SP1/SP2 min {sp_worst:.4}"),
    );
}

fn c5(lab: &mut Lab, rep: &mut Report) {
    let k = lab.get(Point { load: Load::RateBps(200_000_000), n: 10, rho: 0.0 }, SP2);
    let adm = &k.admitted_stas;
    let exact = adm.mean == Some(5.0) && adm.ci95.is_none_or(|c| c == 0.0);
    let thr = mean(&k.throughput_bps);
    let ok = exact && rel(thr, 1e9) <= 0.01;
    rep.line(
        "C5",
        "admission saturates at 5 STAs and 1000 Mb/s",
        ok,
        format!("admitted {:.2}, throughput {:.2} Mb/s", mean(adm), thr / 1e6),
    );
}

fn c6(lab: &mut Lab, rep: &mut Report) {
    let at = |rho: f64| Point { rho, ..eta(0.75) };
    let sp2: Vec<f64> = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2].iter().map(|&r| mean(&lab.delay_ms(at(r), SP2))).collect();
    let monotone = sp2.windows(2).all(|w| w[1] >= w[0]);
    let doubled = sp2[5] > 2.0 * sp2[0];
    let (s1, s3) = (mean(&lab.delay_ms(at(0.2), SP1)), mean(&lab.delay_ms(at(0.2), SP3)));
    let close = rel(s1, s3) <= 0.20;
    let cb: Vec<f64> = S3_RHOS.iter().map(|&r| mean(&lab.delay_ms(at(r), CBAP))).collect();
    let (lo, hi) = cb.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let spread = (hi - lo) / lo;
    let ok = monotone && doubled && close && spread < 0.15;
    let sp2s = sp2.iter().map(|d| format!("{d:.1}")).collect::<Vec<_>>().join(",");
    rep.line(
        "C6",
        "randomness degrades SP2, SP1≈SP3 at ρ=0.2, CBAP-only insensitive",
        ok,
        format!(
            "SP2 [{sp2s}] ms monotone={monotone} ×{:.2}; SP1 {s1:.1} vs SP3 {s3:.1} ms; CBAP spread {:.1}%",
            sp2[5] / sp2[0],
            spread * 100.0
        ),
    );
}

fn c7(lab: &mut Lab, rep: &mut Report) {
    let js: Vec<f64> = S1_ETAS.iter().map(|&e| mean(&lab.get(eta(e), SP1).jitter_s)).collect();
    let s = MetricSummary::of(&js);
    let m = mean(&s);
    let sd = (js.iter().map(|j| (j - m).powi(2)).sum::<f64>() / (js.len() - 1) as f64).sqrt();
    let cv = sd / m;
    let j5 = mean(&lab.get(eta(0.5), CBAP).jitter_s);
    let j9 = mean(&lab.get(eta(0.9), CBAP).jitter_s);
    let ok = cv <= 0.10 && j9 >= 5.0 * j5;
    rep.line(
        "C7",
        "flat SP1 jitter, steep CBAP-only jitter at η=0.9",
        ok,
        format!("SP1 CV {:.1}%; CBAP {:.1} µs → {:.1} µs (×{:.2})", cv * 100.0, j5 * 1e6, j9 * 1e6, j9 / j5),
    );
}

/// Exhaustive placement on a 0.1 ms grid (BI 24 ms, DTI 20 ms).
fn brute_force(placed: &[(u64, u64)], p: u64, d: u64) -> Option<u64> {
    let (bi, dti) = (240u64, 200);
    if !bi.is_multiple_of(p) || d > bi / p {
        return None;
    }
    let t = bi / p;
    (0..=dti).find(|&s| {
        (0..p).all(|i| {
            let (a, b) = (s + i * t, s + i * t + d);
            b <= dti && placed.iter().all(|&(x, y)| b <= x || y <= a)
        })
    })
}

fn placement_oracle_agrees(cases: u32) -> Result<(), String> {
    let unit = |n: u64| SimTime::from_ns(n * 100_000);
    let layout = BeaconIntervalLayout::new(unit(240), unit(40)).unwrap();
    let mut rng = RngStream::new(2024, "acceptance.placement");
    for case in 0..cases {
        let mut sched = DtiSchedule::new(&layout);
        let mut placed = Vec::new();
        for k in 0..=rng.uniform_int(5) {
            let p = 1 + rng.uniform_int(4);
            let d = 1 + u64::from(rng.uniform_int(119));
            let want = brute_force(&placed, u64::from(p), d);
            let got = admit_periodic(&AddtsRequest::fixed(StaId(k), p, unit(d)), &mut sched, &layout, SimTime::ZERO);
            match (got, want) {
                (AddtsResponse::Accepted { first_block_start, .. }, Some(s)) if first_block_start == unit(s) => {
                    let t = 240 / u64::from(p);
                    placed.extend((0..u64::from(p)).map(|i| (s + i * t, s + i * t + d)));
                }
                (AddtsResponse::Rejected { .. }, None) => {}
                (g, w) => return Err(format!("case {case} request {k}: got {g:?}, oracle {w:?}")),
            }
        }
        let blocks: Vec<_> = sched.sp_blocks().copied().collect();
        for (i, a) in blocks.iter().enumerate() {
            if a.end() > sched.dti_duration() || blocks[i + 1..].iter().any(|b| a.overlaps(b)) {
                return Err(format!("case {case}: block {a:?} breaks the geometry"));
            }
        }
    }
    Ok(())
}

fn fits_exactly() -> Result<(), String> {
    let t = MacTimingParams::default();
    for n in [1u32, 10, 1277, 2298] {
        let d = sp_duration_for(u64::from(n), 1448, &McsEntry::MCS4, &t);
        let mut q = TxQueue::new(u64::MAX);
        for i in 0..n {
            q.enqueue(QueuedPacket { record: i, bytes: 1448 });
        }
        let txs = sp_service(&mut q, SimTime::ZERO, d, &t, &McsEntry::MCS4);
        if !q.is_empty() || txs.last().map(|x| x.end()) != Some(d) {
            return Err(format!("burst {n} does not fill its {d} block"));
        }
    }
    Ok(())
}

fn deterministic_by_seed() -> Result<(), String> {
    for c in [CBAP, SP1, SP3] {
        let cfg = SimConfig { load: Load::Eta(0.5), scheduling: c, ..SimConfig::default() };
        let (a, b) = (run(&cfg, BASE_SEED).unwrap(), run(&cfg, BASE_SEED).unwrap());
        if a.records != b.records || a.kpi != b.kpi {
            return Err(format!("{c} differs between identical runs"));
        }
    }
    Ok(())
}

fn ci_exact() -> Result<(), String> {
    let run_with = |d: f64| RunKpi {
        avg_delay_s: Some(d),
        jitter_s: None,
        aggr_throughput_bps: 0.0,
        norm_throughput: None,
        admitted_stas: 4,
        lost_packets: 0,
        flows: vec![],
    };
    let agg = aggregate(&[run_with(10.0), run_with(12.0), run_with(14.0)]);
    // sd = 2, n = 3
    let want = 1.96 * 2.0 / 3f64.sqrt();
    let got = agg.avg_delay_s;
    if got.mean != Some(12.0) || got.ci95.is_none_or(|c| (c - want).abs() > 1e-12) {
        return Err(format!("three runs: {got:?}, want ci {want}"));
    }
    if agg.admitted_stas.ci95 != Some(0.0) || agg.jitter_s.mean.is_some() {
        return Err("constant or missing metrics summarised wrongly".into());
    }
    let one = aggregate(&[run_with(5.0)]);
    if one.avg_delay_s.ci95.is_some() {
        return Err("single run must have no CI".into());
    }
    let flat = aggregate(&[run_with(1.0), run_with(2.0), run_with(3.0), run_with(4.0)]).avg_delay_s;
    if flat.ci95.is_none_or(|c| (c - 0.98 * (5.0f64 / 3.0).sqrt()).abs() > 1e-12) {
        return Err(format!("four runs: {flat:?}"));
    }
    Ok(())
}

fn c8(lab: &Lab, rep: &mut Report) {
    let mut problems = Vec::new();
    for (name, res) in [
        ("placement", placement_oracle_agrees(400)),
        ("fit-exactly", fits_exactly()),
        ("determinism", deterministic_by_seed()),
        ("ci", ci_exact()),
    ] {
        if let Err(e) = res {
            problems.push(format!("{name}: {e}"));
        }
    }
    if !lab.conservation_failures.is_empty() {
        problems.push(format!("conservation: {}", lab.conservation_failures.join("; ")));
    }
    let detail = if problems.is_empty() {
        format!("placement oracle, fit-exactly, determinism, CI; conservation on {} runs", lab.runs)
    } else {
        problems.join(" | ")
    };
    rep.line("C8", "property suites", problems.is_empty(), detail);
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut lab = Lab::default();
    let mut rep = Report { failed: 0 };
    c1(&mut lab, &mut rep);
    c2(&mut lab, &mut rep);
    c3(&mut lab, &mut rep);
    c4(&mut lab, &mut rep);
    c5(&mut lab, &mut rep);
    c6(&mut lab, &mut rep);
    c7(&mut lab, &mut rep);
    c8(&lab, &mut rep);
    println!(
        "[acceptance] {} of 8 criteria passed; {} simulated runs in {:.0} s",
        8 - rep.failed,
        lab.runs,
        started.elapsed().as_secs_f64()
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && rep.failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
