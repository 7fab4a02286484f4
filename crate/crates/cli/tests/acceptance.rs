//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use relkern::analysis::{
    default_alpha_grid, default_creg_inv_grid, margin_curves, margins, phase_diagram, sweep_task_params, CurveAxis,
    Model, Predictor,
};
use relkern::closed_form::memorization_coeff;
use relkern::encoding::{ridge_primal, verify_kernel_equivalence, FourHotMap};
use relkern::features::{width_sweep, Nonlinearity, WidthSweepRow};
use relkern::tasks::SplitName;
use relkern::{build_training_set, dual_solve, rank_profile, ClosedFormParams, ItemPair, KernelParams, Ridge, TaskSpec};
use relkern_poker::{
    generalization_proportions, heads_up_equity, sample_hierarchy, verify_sample, Band, EquityMatrix, EquityMethod,
    HoleClass,
};

type Outcome = Result<String, String>;

const ALPHAS: [f64; 10] = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95];
const CREG_INVS: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];

/// Exhaustive AA vs 72o equity from an independent evaluator.
const AA_VS_72O: f64 = 2013661.0 / 2283072.0;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pair(j: usize, k: usize) -> ItemPair {
    ItemPair::new(j, k).unwrap()
}

fn tiexc_tasks() -> Vec<TaskSpec> {
    let mut out = Vec::new();
    for n in 4..=12usize {
        for p in 3..=n {
            for q in 1..=p - 2 {
                out.push(TaskSpec::ti_exc(n, p, q).unwrap());
            }
        }
    }
    out
}

fn ti_tasks() -> Vec<TaskSpec> {
    (4..=12).map(|n| TaskSpec::ti(n).unwrap()).collect()
}

/// Largest `|closed form - oracle| / max(1, |oracle|)` over all pairs.
fn max_rel_dev(spec: &TaskSpec, alpha: f64, creg_inv: f64) -> f64 {
    let profile = rank_profile(&ClosedFormParams::new(*spec, alpha, creg_inv).unwrap()).unwrap();
    let oracle = dual_solve(&KernelParams::from_alpha(alpha, creg_inv).unwrap(), &build_training_set(spec)).unwrap();
    spec.all_pairs()
        .map(|p| {
            let o = oracle.predict(p);
            (profile.predict(p) - o).abs() / o.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let tasks = tiexc_tasks();
    let mut worst = 0.0f64;
    let mut cells = 0;
    for spec in &tasks {
        for &a in &ALPHAS {
            for &c in &CREG_INVS {
                worst = worst.max(max_rel_dev(spec, a, c));
                cells += 1;
            }
        }
    }
    let status = Command::new(env!("CARGO_BIN_EXE_relkern"))
        .args(["verify", "--out", "/dev/null"])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    let elapsed = start.elapsed();
    ensure(
        worst <= 1e-8 && status.success() && elapsed < Duration::from_secs(60),
        format!(
            "{} tiexc tasks, {cells} cells: max relative deviation {worst:.2e}; cli verify {status}; {elapsed:.1?}",
            tasks.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let (mut worst, mut worst_adj, mut pert) = (0.0f64, 0.0f64, 0.0f64);
    for spec in ti_tasks() {
        let data = build_training_set(&spec);
        for &a in &ALPHAS {
            for &c in &CREG_INVS {
                worst = worst.max(max_rel_dev(&spec, a, c));
                let profile = rank_profile(&ClosedFormParams::new(spec, a, c).unwrap()).unwrap();
                pert = profile.r_pert.iter().fold(pert, |m, r| m.max(r.abs()));
                let m = memorization_coeff(a, c).unwrap();
                let oracle = dual_solve(&KernelParams::from_alpha(a, c).unwrap(), &data).unwrap();
                for j in 1..spec.n() {
                    let expected = m + (1.0 - m) * (profile.rank(j) - profile.rank(j + 1));
                    worst_adj = worst_adj.max((oracle.predict(pair(j, j + 1)) - expected).abs());
                }
            }
        }
    }
    ensure(
        worst <= 1e-8 && worst_adj <= 1e-10 && pert == 0.0,
        format!("max |r_pert| {pert:.1e}; max relative deviation {worst:.2e}; adjacent-pair formula gap {worst_adj:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut specs = vec![TaskSpec::ti(5).unwrap(), TaskSpec::ti(9).unwrap(), TaskSpec::tp(6).unwrap()];
    specs.extend([(9, 6, 4), (7, 5, 2), (12, 10, 3), (5, 4, 1)].map(|(n, p, q)| TaskSpec::ti_exc(n, p, q).unwrap()));
    let mut params = Vec::new();
    for &a in &[0.05, 0.35, 0.65, 0.95] {
        for &c in &[0.0, 0.1, 10.0] {
            params.push(KernelParams::from_alpha(a, c).unwrap());
        }
    }
    params.push(KernelParams::new(2.0, 0.9, 0.3, Ridge::new(0.7).unwrap()).unwrap());
    params.push(KernelParams::new(1.3, 0.25, 0.0, Ridge::Infinite).unwrap());
    let (mut gram, mut pred, mut bias) = (0.0f64, 0.0f64, 0.0f64);
    let mut problems = 0;
    for spec in &specs {
        let data = build_training_set(spec);
        for kp in &params {
            let map = FourHotMap::new(spec.n(), kp).unwrap();
            gram = gram.max(verify_kernel_equivalence(&map, kp, &data));
            let dec = ridge_primal(&map, &data, kp.c()).unwrap();
            let oracle = dual_solve(kp, &data).unwrap();
            for p in spec.all_pairs() {
                pred = pred.max((dec.predict(p) - oracle.predict(p)).abs());
            }
            bias = bias.max(dec.b.abs());
            problems += 1;
        }
    }
    ensure(
        gram <= 1e-12 && pred <= 1e-8 && bias <= 1e-10,
        format!("{problems} problems: Gram gap {gram:.2e}, primal vs dual {pred:.2e}, |b| {bias:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = [0.0f64; 2];
    let mut tasks = tiexc_tasks();
    tasks.extend(ti_tasks());
    for spec in &tasks {
        for &a in &ALPHAS {
            for &c in &CREG_INVS {
                for (slot, predictor) in [Predictor::ClosedForm, Predictor::Oracle].into_iter().enumerate() {
                    let (model, _) = Model::fit(spec, a, c, predictor).unwrap();
                    for p in spec.all_pairs().filter(|p| p.j < p.k) {
                        worst[slot] = worst[slot].max((model.predict(p) + model.predict(p.swapped())).abs());
                    }
                }
            }
        }
    }
    ensure(
        worst.iter().all(|&w| w <= 1e-10),
        format!("max |f(j,k) + f(k,j)|: closed form {:.2e}, oracle {:.2e}", worst[0], worst[1]),
    )
}

fn criterion_5() -> Outcome {
    let spec = TaskSpec::ti_exc(9, 6, 4).unwrap();
    let r = rank_profile(&ClosedFormParams::new(spec, 0.2, 0.0).unwrap()).unwrap().ranks;
    let dec = |a: usize, b: usize| (a..b).all(|j| r[j - 1] > r[j]);
    let inc = |a: usize, b: usize| (a..b).all(|j| r[j - 1] < r[j]);
    let rounded: Vec<String> = r.iter().map(|x| format!("{x:.3}")).collect();
    ensure(dec(1, 3) && inc(4, 6) && dec(7, 9), format!("r = [{}]", rounded.join(", ")))
}

fn criterion_6() -> Outcome {
    let spec = TaskSpec::ti_exc(9, 6, 4).unwrap();
    let alphas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let a = margin_curves(&spec, CurveAxis::Alpha { creg_inv: 0.0 }, &alphas, &[pair(3, 7)]).unwrap();
    let star = a.crossings.first().map(|c| c.location);
    let ok_a = matches!(star, Some(s) if s > 0.0 && s < 1.0);

    let cregs: Vec<f64> = (0..=1000).map(|i| i as f64 / 100.0).collect();
    let pairs = [pair(4, 5), pair(5, 6), pair(6, 4)];
    let b = margin_curves(&spec, CurveAxis::CregInv { alpha: 0.15 }, &cregs, &pairs).unwrap();
    let last = |i: usize| *b.margins[i].last().unwrap();
    let min64 = b.margins[2].iter().copied().fold(f64::INFINITY, f64::min);
    let flips: Vec<String> = b
        .crossings
        .iter()
        .map(|c| format!("{} at {:.4}", c.pair, c.location))
        .collect();
    let ok_b = last(0) < 0.0 && last(1) < 0.0 && min64 > 0.0;
    ensure(
        ok_a && ok_b,
        format!(
            "(3,7) flips at alpha* = {}; alpha = 0.15 crossings [{}]; min margin on (6,4) over [0, 10] = {min64:.4}",
            star.map_or("none".into(), |s| format!("{s:.6}")),
            flips.join(", ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let alphas: Vec<f64> = default_alpha_grid().into_iter().filter(|a| (0.05..=0.95).contains(a)).collect();
    let cregs: Vec<f64> = default_creg_inv_grid().into_iter().filter(|c| *c <= 10.0).collect();
    let mut worst = f64::INFINITY;
    let mut cells = 0;
    for spec in tiexc_tasks() {
        let pd = phase_diagram(&spec, &alphas, &cregs, Predictor::ClosedForm).unwrap();
        for cell in &pd.cells {
            let s = cell.summary(SplitName::WithinSection).expect("cell evaluated");
            if s.count > 0 {
                worst = worst.min(s.min_margin);
                cells += 1;
            }
        }
    }
    ensure(worst > 0.0, format!("{cells} cells with within-section pairs; smallest margin {worst:.3e}"))
}

fn criterion_8() -> Outcome {
    let cregs: Vec<f64> = default_creg_inv_grid().into_iter().filter(|c| *c <= 10.0).collect();
    let mut worst = f64::INFINITY;
    let mut cells = 0;
    for n in 4..=9 {
        let spec = TaskSpec::tp(n).unwrap();
        for &a in &ALPHAS {
            for &c in &cregs {
                let report = margins(&spec, a, c, Predictor::Oracle).unwrap();
                worst = worst.min(report.split(SplitName::MemIntransitive).unwrap().min_margin);
                cells += 1;
            }
        }
    }
    ensure(worst > 0.0, format!("{cells} cells; smallest training margin {worst:.3e}"))
}

fn criterion_9() -> Outcome {
    let specs = [(9, 6, 4), (11, 7, 5), (11, 8, 4)].map(|(n, p, q)| TaskSpec::ti_exc(n, p, q).unwrap());
    let areas = sweep_task_params(&specs, &default_alpha_grid(), &default_creg_inv_grid()).unwrap();
    let f: Vec<f64> = areas.iter().map(|a| a.fraction(SplitName::CrossSection)).collect();
    ensure(
        f[0] > f[1] && (f[0] - f[2]).abs() < (f[0] - f[1]).abs(),
        format!("cross-section areas (9,6,4) {:.4}, (11,7,5) {:.4}, (11,8,4) {:.4}", f[0], f[1], f[2]),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let spec = TaskSpec::ti_exc(9, 6, 4).unwrap();
    let seeds: Vec<u64> = (0..5).collect();
    let rows = width_sweep(&spec, &[1 << 9, 1 << 15], &seeds, Nonlinearity::Relu, Ridge::Infinite).unwrap();
    let (narrow, wide): (Vec<&WidthSweepRow>, Vec<&WidthSweepRow>) = rows.iter().partition(|r| r.width == 1 << 9);
    let alpha_ok = wide.iter().all(|r| (0.10..=0.20).contains(&r.alpha_hat));
    let gap_narrow = median(narrow.iter().map(|r| r.max_gap).collect());
    let gap_wide = median(wide.iter().map(|r| r.max_gap).collect());
    let alphas: Vec<String> = wide.iter().map(|r| format!("{:.4}", r.alpha_hat)).collect();
    let elapsed = start.elapsed();
    ensure(
        alpha_ok && gap_wide < gap_narrow && elapsed < Duration::from_secs(300),
        format!(
            "alpha_hat at 2^15: [{}]; median max gap {gap_narrow:.4} at 2^9, {gap_wide:.4} at 2^15; {elapsed:.1?}",
            alphas.join(", ")
        ),
    )
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let (aa, trash): (HoleClass, HoleClass) = ("AA".parse().unwrap(), "72o".parse().unwrap());
    let exact = heads_up_equity(aa, trash, EquityMethod::Exact).unwrap();
    let mc = heads_up_equity(aa, trash, EquityMethod::MonteCarlo { samples: 1_000_000, seed: 1 }).unwrap();
    let eq = EquityMatrix::monte_carlo(relkern_poker::equity::DEFAULT_SAMPLES, 1).unwrap();
    let matrix_time = start.elapsed();

    let spec = TaskSpec::ti_exc(9, 6, 4).unwrap();
    let band = Band::new(0.51, 0.60).unwrap();
    let mut samples = Vec::new();
    for seed in 0..200 {
        if let Ok(s) = sample_hierarchy(&spec, &eq, band, seed, 1000) {
            verify_sample(&spec, &eq, band, &s).unwrap();
            samples.push(s);
        }
    }
    let mean = generalization_proportions(&samples, &eq, &spec)
        .and_then(|p| p.section_mean(&spec))
        .unwrap_or(f64::NAN);
    let elapsed = start.elapsed();
    ensure(
        (exact - AA_VS_72O).abs() < 1e-15
            && (mc - exact).abs() <= 0.005
            && eq.winningness(aa, trash)
            && samples.len() == 200
            && mean > 0.5
            && elapsed < Duration::from_secs(900),
        format!(
            "exact {exact:.6}, mc {mc:.6}; matrix built in {matrix_time:.1?}; {} of 200 hierarchies, all re-verified; \
             section mean {mean:.4}; {elapsed:.1?}",
            samples.len()
        ),
    )
}

fn run_cli(args: &[&str], out: &Path, threads: usize) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_relkern"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "relkern {args:?} exited with {status}");
    std::fs::read(out).unwrap()
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("matrix.txt");
    let matrix_arg = matrix.to_str().unwrap().to_string();
    let tiexc = ["--n", "9", "--p", "6", "--q", "4"];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        head.iter().chain(tail).map(|s| s.to_string()).collect()
    };
    let runs: Vec<Vec<String>> = vec![
        with(&["poker", "equity", "--samples", "300", "--seed", "5"], &[]),
        with(&["verify"], &tiexc),
        with(&["ranks", "--alpha", "0.2", "--creg-inv", "0"], &tiexc),
        with(&["predict", "--alpha", "0.3", "--creg-inv", "0.5", "--predictor", "oracle"], &tiexc),
        with(&["phase-diagram", "--grid-default"], &tiexc),
        with(&["phase-diagram", "--format", "json", "--alphas", "0,0.5", "--creg-invs", "0,1"], &tiexc),
        with(&["sweep", "--alphas", "0.1,0.3,0.5", "--creg-invs", "0,0.1"], &[]),
        with(&["curves", "--vary", "creg-inv", "--at", "0.15", "--from", "0", "--to", "10", "--pair", "4,5"], &tiexc),
        with(&["decompose", "--alpha", "0.4", "--creg-inv", "0.1", "--format", "json"], &tiexc),
        with(&["features", "--widths", "64,256", "--seeds", "1,2,3"], &tiexc),
        with(&["poker", "matchup", "AKs", "QQ", "--method", "mc", "--samples", "5000"], &[]),
        with(&["poker", "hierarchy", "--matrix", &matrix_arg, "--count", "20"], &[]),
        with(&["poker", "proportions", "--matrix", &matrix_arg, "--count", "20", "--format", "json"], &[]),
    ];
    let mut checked = 0;
    for (i, args) in runs.iter().enumerate() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first_out = if i == 0 { matrix.clone() } else { dir.path().join(format!("run{i}-a")) };
        let a = run_cli(&args, &first_out, 1);
        let b = run_cli(&args, &dir.path().join(format!("run{i}-b")), 4);
        if a != b {
            return Err(format!("`relkern {}` differs between runs", args.join(" ")));
        }
        if !a.starts_with(b"# config: ") && !a.starts_with(b"# equity-matrix") && !a.starts_with(b"{") {
            return Err(format!("`relkern {}` output lacks its configuration", args.join(" ")));
        }
        checked += 1;
    }
    Ok(format!("{} invocations byte-identical across runs with 1 and 4 threads", checked))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed form matches the dual solver", criterion_1),
        ("plain TI special case", criterion_2),
        ("four-hot encoding equivalence", criterion_3),
        ("antisymmetry", criterion_4),
        ("rank shape at alpha = 0.2", criterion_5),
        ("phase structure of (9,6,4)", criterion_6),
        ("within-section safety", criterion_7),
        ("TP never errs", criterion_8),
        ("task-parameter ordering", criterion_9),
        ("random features", criterion_10),
        ("poker", criterion_11),
        ("determinism", criterion_12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {:>2}. {name} ({:.1?}): {detail}", i + 1, start.elapsed());
        if outcome.is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
