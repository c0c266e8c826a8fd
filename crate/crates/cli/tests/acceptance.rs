//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Criteria 6, 7 and 9 use MovieLens 100K at `data/ml-100k/u.data` (fetch with
//! `scripts/fetch-ml100k.sh`), or the file named by `BACKBONE_ML100K`.
//!
//! Run with `cargo test -p backbone-cli --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use backbone_core::graph::{BipartiteGraph, LinkId};
use backbone_core::ingest::{
    filter_cold_start, graph_from_records, parse_ratings, temporal_split, Cutoff, Dataset, FormatConfig, ProbeSet,
    SplitConfig,
};
use backbone_core::removal::{run, RemovalRun, RemovalTrace, RunConfig, Schedule};
use backbone_core::{evaluate, extract_backbone, structure_report, Algorithm, BackboneConfig, EvalConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MC_TOLERANCE: f64 = 0.01;
const MC_DRAWS: usize = 100_000;
const MC_GRAPHS: usize = 25;
const MC_TIME_LIMIT: Duration = Duration::from_secs(60);
const FLOAT_REL: f64 = 1e-12;
const AUC_KEEP: f64 = 0.95;
const MIN_KEPT_STEPS: usize = 15;
const HAMMING_STEP: usize = 25;
const MIN_REMOVED_FRACTION: f64 = 0.40;
const SWEEP_TIME_LIMIT: Duration = Duration::from_secs(600);
const STRUCTURE_TIME_LIMIT: Duration = Duration::from_secs(1800);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ml100k_path() -> PathBuf {
    std::env::var_os("BACKBONE_ML100K")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-100k/u.data"))
}

fn load_ml100k() -> Result<Dataset, String> {
    let path = ml100k_path();
    let file = fs::File::open(&path).map_err(|e| format!("{}: {e} (run scripts/fetch-ml100k.sh)", path.display()))?;
    let parsed = parse_ratings(std::io::BufReader::new(file), FormatConfig::default()).map_err(|e| e.to_string())?;
    let cutoff = Cutoff::Fraction(0.9)
        .resolve(&parsed.records)
        .map_err(|e| e.to_string())?;
    let split = SplitConfig {
        cutoff,
        probe_ratio: None,
        rating_min: None,
        seed: 0,
    };
    Ok(filter_cold_start(
        temporal_split(&parsed.records, &split).map_err(|e| e.to_string())?,
    ))
}

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut compared, mut worst) = (0, 0.0f64);
    while compared < MC_GRAPHS {
        let g = support::random_graph(&mut rng, 40, 40);
        let probe = support::random_probe(&mut rng, &g, 0.1);
        let Ok(report) = evaluate(&g, &probe, &EvalConfig::default()) else {
            continue;
        };
        let Some(mc) = support::monte_carlo_auc(&g, &probe, MC_DRAWS, &mut rng) else {
            continue;
        };
        worst = worst.max((report.auc - mc).abs());
        compared += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        worst < MC_TOLERANCE && elapsed < MC_TIME_LIMIT,
        format!("{MC_GRAPHS} graphs, max |exact - sampled| = {worst:.5} (< {MC_TOLERANCE}), {elapsed:.1?} (< {MC_TIME_LIMIT:?})"),
    )
}

fn brute_force() -> Outcome {
    let mut graphs = 0usize;
    for (n, m) in support::exhaustive_shapes(12, 12) {
        for g in support::all_graphs(n, m) {
            if let Err(e) = support::check_graph(&g) {
                return outcome(false, format!("exhaustive {n}x{m}: {e}"));
            }
            graphs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..100 {
        let g = support::random_small_graph(&mut rng, 20);
        if let Err(e) = support::check_graph(&g) {
            return outcome(false, format!("random graph {k}: {e}"));
        }
    }
    outcome(
        true,
        format!("{graphs} exhaustive + 100 random graphs; exact, scores within {FLOAT_REL:e} relative"),
    )
}

fn schedule() -> Outcome {
    let s = Schedule::new(90, 50);
    // ⌈1.8 n⌉ = ⌈9n / 5⌉
    let worked = (0..=50).all(|n| s.removed_after(n) == (9 * n).div_ceil(5));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let full = (0..1000).all(|_| {
        let e = rng.gen_range(0..10_000_000);
        Schedule::new(e, 50).removed_after(50) == e
    });
    outcome(
        worked && full,
        format!("E=90 matches ceil(1.8n): {worked}; c_50 = E for 1000 random E: {full}"),
    )
}

fn synthetic_graph(links: usize, seed: u64) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = BipartiteGraph::new(60, 80);
    while g.num_links() < links {
        let u = rng.gen_range(0..60);
        let i = (rng.gen::<f64>().powi(2) * 80.0) as usize;
        if !g.contains(u, i) {
            g.add_link(u, i, rng.gen_range(0..200)).unwrap();
        }
    }
    g
}

fn removal_order(g: &BipartiteGraph, alg: Algorithm, seed: u64) -> Vec<Vec<LinkId>> {
    let mut removal = RemovalRun::new(g.clone(), alg, seed, 50).unwrap();
    std::iter::from_fn(|| removal.advance()).collect()
}

fn identities() -> Outcome {
    let g = synthetic_graph(500, 4);
    let sor = removal_order(&g, Algorithm::Sor, 0);
    let mpr = removal_order(&g, Algorithm::Mpr, 0);
    for seed in 0..5 {
        if removal_order(&g, Algorithm::hybrid(0.0).unwrap(), seed) != sor {
            return outcome(false, format!("HYBRID:0 differs from SOR with seed {seed}"));
        }
        if removal_order(&g, Algorithm::hybrid(1.0).unwrap(), seed) != mpr {
            return outcome(false, format!("HYBRID:1 differs from MPR with seed {seed}"));
        }
    }
    outcome(
        true,
        "500 links, seeds 0..5, HYBRID:0 = SOR and HYBRID:1 = MPR at every step",
    )
}

fn boundary() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let fixtures = [
        ("synthetic", synthetic_graph(300, 5)),
        ("random", {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            support::random_graph(&mut rng, 25, 25)
        }),
    ];
    for (name, g) in fixtures {
        let probe = ProbeSet::new(
            (0..g.num_users())
                .flat_map(|u| (0..g.num_items()).map(move |i| (u, i)))
                .filter(|&(u, i)| !g.contains(u, i) && (u * 7 + i) % 5 == 0)
                .collect(),
        );
        for alg in [Algorithm::Sor, Algorithm::Mrr, Algorithm::Rr] {
            let trace = run(&g, alg, &probe, 0, &RunConfig::default()).unwrap();
            let last = trace.steps.last().unwrap();
            let ok = last.step == 50
                && last.links_remaining == 0
                && last.metrics.auc == 0.5
                && last.metrics.precision == 0.0;
            pass &= ok;
            if !ok {
                details.push(format!(
                    "{name}/{alg}: links={} auc={} P={}",
                    last.links_remaining, last.metrics.auc, last.metrics.precision
                ));
            }
        }
    }
    let detail = if pass {
        "2 fixtures x {SOR, MRR, RR}: step 50 empty, AUC = 0.5, P(L) = 0".to_string()
    } else {
        details.join("; ")
    };
    outcome(pass, detail)
}

/// First macro-step whose AUC falls below the floor, `steps + 1` if none.
fn first_below(trace: &RemovalTrace, floor: f64) -> usize {
    trace
        .steps
        .iter()
        .find(|s| s.metrics.auc < floor)
        .map_or(trace.steps.len() + 1, |s| s.step)
}

fn less_is_more(ds: &Dataset) -> Outcome {
    let cfg = RunConfig::default();
    let trace = |alg| run(&ds.training, alg, &ds.probe, 0, &cfg).unwrap();
    let [sor, snr, ior, inr, mpr, rr] = [
        Algorithm::Sor,
        Algorithm::Snr,
        Algorithm::Ior,
        Algorithm::Inr,
        Algorithm::Mpr,
        Algorithm::Rr,
    ]
    .map(trace);
    let floor = AUC_KEEP * sor.initial.metrics.auc;
    let fb = |t: &RemovalTrace| first_below(t, floor);
    let (f_sor, f_snr, f_ior, f_inr) = (fb(&sor), fb(&snr), fb(&ior), fb(&inr));
    let keeps = |f: usize| f > MIN_KEPT_STEPS;
    let h = |t: &RemovalTrace| t.steps[HAMMING_STEP - 1].metrics.hamming.unwrap_or(f64::NAN);
    let (h_mpr, h_rr) = (h(&mpr), h(&rr));
    let checks = [
        ("6a SOR keeps", keeps(f_sor)),
        ("6a IOR keeps", keeps(f_ior)),
        ("6b SNR<SOR", f_snr < f_sor),
        ("6b INR<IOR", f_inr < f_ior),
        ("6c H_MPR>H_RR", h_mpr > h_rr),
    ];
    let verdicts: Vec<String> = checks
        .iter()
        .map(|(name, ok)| format!("{name}:{}", if *ok { "ok" } else { "FAIL" }))
        .collect();
    outcome(
        checks.iter().all(|c| c.1),
        format!(
            "AUC0={:.4}, first step below {AUC_KEEP}*AUC0: SOR {f_sor} IOR {f_ior} SNR {f_snr} INR {f_inr}; H({HAMMING_STEP}) MPR {h_mpr:.4} RR {h_rr:.4}; {}",
            sor.initial.metrics.auc,
            verdicts.join(" ")
        ),
    )
}

fn backbone_contract(ds: &Dataset) -> Outcome {
    let r = extract_backbone(&ds.training, &ds.probe, &BackboneConfig::default()).unwrap();
    let (si, sb) = (&r.structure_initial, &r.structure_backbone);
    let ge = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if a >= b);
    let checks = [
        (
            "removed>=40%",
            r.fraction_removed >= MIN_REMOVED_FRACTION && !r.degenerate,
        ),
        (
            "AUC_b>=floor",
            r.metrics_backbone.auc >= AUC_KEEP * r.metrics_initial.auc,
        ),
        ("r_b>=r", ge(sb.assortativity, si.assortativity)),
        ("H_user_b<=H_user", ge(si.h_user, sb.h_user)),
        ("DR_b<=DR", ge(si.diffusion_range, sb.diffusion_range)),
    ];
    let verdicts: Vec<String> = checks
        .iter()
        .map(|(name, ok)| format!("{name}:{}", if *ok { "ok" } else { "FAIL" }))
        .collect();
    let f = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.4}"));
    outcome(
        checks.iter().all(|c| c.1),
        format!(
            "λ*={} b={} removed {:.1}%, AUC {:.4} -> {:.4}, r {} -> {}, H_user {} -> {}, DR {} -> {}; {}",
            r.lambda_star,
            r.stop_step,
            100.0 * r.fraction_removed,
            r.metrics_initial.auc,
            r.metrics_backbone.auc,
            f(si.assortativity),
            f(sb.assortativity),
            f(si.h_user),
            f(sb.h_user),
            f(si.diffusion_range),
            f(sb.diffusion_range),
            verdicts.join(" ")
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_backbone"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn determinism() -> Outcome {
    let inner = || -> Result<String, String> {
        let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
        let input = ml100k_path();
        let input = input.to_str().unwrap();
        let dir = |n: &str| tmp.path().join(n).to_str().unwrap().to_string();
        let algos = "RR,HYBRID:0.5,MRR";
        for out in ["a", "b"] {
            cli(&[
                "sweep",
                "--input",
                input,
                "--algos",
                algos,
                "--seed",
                "11",
                "--out",
                &dir(out),
            ])?;
        }
        for name in ["trace_RR.csv", "trace_HYBRID-0.5.csv", "trace_MRR.csv", "manifest.json"] {
            let a = fs::read(tmp.path().join("a").join(name)).map_err(|e| e.to_string())?;
            let b = fs::read(tmp.path().join("b").join(name)).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{name} differs between identical runs"));
            }
        }
        cli(&["backbone", "--input", input, "--out", &dir("bb")])?;
        let edges = tmp.path().join("bb").join("backbone_edges.txt");
        cli(&[
            "ingest",
            "--input",
            edges.to_str().unwrap(),
            "--cutoff",
            "100%",
            "--out",
            &dir("re"),
        ])?;
        let exported = fs::read(&edges).map_err(|e| e.to_string())?;
        let reexported = fs::read(tmp.path().join("re").join("training_edges.txt")).map_err(|e| e.to_string())?;
        if exported != reexported {
            return Err("re-ingested backbone differs from the export".into());
        }
        let parsed = parse_ratings(&exported[..], FormatConfig::default()).map_err(|e| e.to_string())?;
        let g = graph_from_records(&parsed.records).map_err(|e| e.to_string())?;
        Ok(format!(
            "3 traces + manifest byte-identical across reruns; backbone of {} links re-ingests identically",
            g.training.num_links()
        ))
    };
    match inner() {
        Ok(detail) => outcome(true, detail),
        Err(e) => outcome(false, e),
    }
}

/// All 100,000 MovieLens ratings, with a seeded 10% of them held out as the
/// probe set so that most users are evaluated.
fn random_holdout() -> Result<Dataset, String> {
    let path = ml100k_path();
    let file = fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed = parse_ratings(std::io::BufReader::new(file), FormatConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (train, probe): (Vec<_>, Vec<_>) = parsed.records.into_iter().partition(|_| rng.gen::<f64>() >= 0.1);
    let mut ds = graph_from_records(&train).map_err(|e| e.to_string())?;
    let pairs = probe
        .iter()
        .filter_map(|r| Some((ds.users.index_of(&r.user)?, ds.items.index_of(&r.item)?)))
        .filter(|&(u, i)| !ds.training.contains(u, i))
        .collect();
    ds.probe = ProbeSet::new(pairs);
    Ok(ds)
}

fn performance() -> Outcome {
    let ds = match random_holdout() {
        Ok(ds) => ds,
        Err(e) => return outcome(false, e),
    };
    let eval = EvalConfig {
        hamming_pair_cap: 100_000,
        ..EvalConfig::default()
    };
    let plain = RunConfig {
        eval,
        ..RunConfig::default()
    };
    let start = Instant::now();
    let trace = run(&ds.training, Algorithm::Mrr, &ds.probe, 0, &plain).unwrap();
    let t_plain = start.elapsed();
    let sampled = trace.initial.metrics.hamming_sampled;

    let start = Instant::now();
    run(
        &ds.training,
        Algorithm::Sor,
        &ds.probe,
        0,
        &RunConfig {
            structure: true,
            ..plain
        },
    )
    .unwrap();
    let t_structure = start.elapsed();
    let detail = format!(
        "{} training links, {} users evaluated, H(L) sampled: {sampled}; MRR sweep {t_plain:.1?} (< {SWEEP_TIME_LIMIT:?}), SOR sweep with structure {t_structure:.1?} (< {STRUCTURE_TIME_LIMIT:?}) on {} threads",
        ds.training.num_links(),
        trace.initial.metrics.users_evaluated,
        rayon::current_num_threads()
    );
    outcome(
        sampled && t_plain < SWEEP_TIME_LIMIT && t_structure < STRUCTURE_TIME_LIMIT,
        detail,
    )
}

fn main() {
    let ml = load_ml100k();
    let needs_data = |f: fn(&Dataset) -> Outcome| match &ml {
        Ok(ds) => f(ds),
        Err(e) => outcome(false, format!("dataset unavailable: {e}")),
    };

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("metric oracle equivalence", Box::new(metric_oracle)),
        ("brute-force equivalence", Box::new(brute_force)),
        ("schedule arithmetic", Box::new(schedule)),
        ("algorithm identities", Box::new(identities)),
        ("boundary behaviour", Box::new(boundary)),
        ("less can be more (ML-100K)", Box::new(|| needs_data(less_is_more))),
        (
            "backbone contract (ML-100K)",
            Box::new(|| needs_data(backbone_contract)),
        ),
        ("determinism and round trip", Box::new(determinism)),
        ("performance envelope", Box::new(performance)),
    ];

    if let Ok(ds) = &ml {
        println!(
            "ML-100K split: {} users, {} items, {} training links, {} probe links",
            ds.training.num_users(),
            ds.training.num_items(),
            ds.training.num_links(),
            ds.probe.len()
        );
        let s = structure_report(&ds.training);
        println!("ML-100K training structure: {s:?}");
    }

    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
