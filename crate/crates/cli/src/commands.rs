use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use relkern::analysis::{
    default_alpha_grid, default_creg_inv_grid, margin_curves, phase_diagram, sweep_task_params, CurveAxis, Model,
    Predictor,
};
use relkern::encoding::{ridge_primal, FourHotMap};
use relkern::export::{
    fmt_f64, write_config_line, write_curves_csv, write_decomposition_csv, write_json, write_phase_csv,
    write_ranks_csv, write_width_sweep_csv,
};
use relkern::features::width_sweep;
use relkern::kernel::{conjunctivity, effective_reg_inv};
use relkern::tasks::expected_label;
use relkern::{
    build_training_set, dual_solve, rank_profile, ClosedFormParams, Error, ItemPair, KernelParams, TaskKind,
    TaskSpec,
};

use crate::args::*;
use crate::CliError;

pub type Out = Result<Vec<u8>, CliError>;

pub fn default_task() -> TaskSpec {
    TaskSpec::ti_exc(9, 6, 4).expect("valid default task")
}

/// Resolves the task flags; `default` applies when none are given.
pub fn resolve_task(t: &TaskArgs, default: Option<TaskSpec>) -> Result<TaskSpec, CliError> {
    let Some(n) = t.n else {
        if t.p.is_some() || t.q.is_some() || t.kind.is_some() {
            return Err(CliError::Usage("--n is required with --p, --q or --kind".into()));
        }
        return default.ok_or_else(|| CliError::Usage("a task is required (--n, optionally --p and --q)".into()));
    };
    let spec = match (t.kind, t.p, t.q) {
        (None | Some(KindArg::Tiexc), Some(p), Some(q)) => TaskSpec::ti_exc(n, p, q)?,
        (Some(KindArg::Tiexc), _, _) | (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(CliError::Usage("tiexc tasks need both --p and --q".into()))
        }
        (Some(KindArg::Tp), None, None) => TaskSpec::tp(n)?,
        (Some(KindArg::Ti) | None, None, None) => TaskSpec::ti(n)?,
        (Some(_), _, _) => return Err(CliError::Usage("--p and --q only apply to tiexc tasks".into())),
    };
    Ok(spec)
}

/// Kernel parameters from either flag set.
pub fn resolve_kernel(m: &ModelArgs) -> Result<KernelParams, CliError> {
    match (m.alpha, m.kappa_s, m.kappa_o, m.kappa_d) {
        (Some(alpha), None, None, None) => Ok(KernelParams::from_alpha(alpha, m.creg_inv)?),
        (None, Some(s), Some(o), Some(d)) => {
            let c = m.c.ok_or_else(|| CliError::Usage("--c is required with the kappa flags".into()))?;
            Ok(KernelParams::new(s, o, d, c)?)
        }
        _ => Err(CliError::Usage("give --alpha (and --creg-inv) or --kappa-s/--kappa-o/--kappa-d/--c".into())),
    }
}

/// `(alpha, creg_inv)` from either flag set.
pub fn resolve_model(m: &ModelArgs) -> Result<(f64, f64), CliError> {
    if let Some(alpha) = m.alpha {
        KernelParams::from_alpha(alpha, m.creg_inv)?;
        return Ok((alpha, m.creg_inv));
    }
    let params = resolve_kernel(m)?;
    Ok((conjunctivity(&params), effective_reg_inv(&params)))
}

fn emit<B: Serialize>(
    format: Format,
    kind: &str,
    config: &Value,
    body: &B,
    csv: impl FnOnce(&mut Vec<u8>) -> relkern::Result<()>,
) -> Out {
    let mut buf = Vec::new();
    match format {
        Format::Json => write_json(&mut buf, kind, config, body)?,
        Format::Csv => csv(&mut buf)?,
    }
    Ok(buf)
}

fn grid(g: &GridArgs) -> (Vec<f64>, Vec<f64>) {
    let alphas = if g.grid_default || g.alphas.is_empty() { default_alpha_grid() } else { g.alphas.clone() };
    let cregs = if g.grid_default || g.creg_invs.is_empty() { default_creg_inv_grid() } else { g.creg_invs.clone() };
    (alphas, cregs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyStatus {
    Ok,
    Fail,
    /// The closed form is undefined here; only the dual solver applies.
    DegenerateOracleOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyCell {
    pub task: TaskSpec,
    pub alpha: f64,
    pub creg_inv: f64,
    pub status: VerifyStatus,
    pub max_dev: f64,
    pub worst: Option<ItemPair>,
}

/// TI plus every TIExc task with `p - q >= 2`, for `n` in `4..=12`.
fn default_verify_tasks() -> Vec<TaskSpec> {
    let mut out = Vec::new();
    for n in 4..=12 {
        out.push(TaskSpec::ti(n).expect("valid ti"));
        for p in 1..=n {
            for q in 1..p.saturating_sub(1) {
                if let Ok(spec) = TaskSpec::ti_exc(n, p, q) {
                    out.push(spec);
                }
            }
        }
    }
    out
}

fn verify_cell(spec: TaskSpec, alpha: f64, creg_inv: f64, tol: f64) -> relkern::Result<VerifyCell> {
    let oracle = dual_solve(&KernelParams::from_alpha(alpha, creg_inv)?, &build_training_set(&spec))?;
    let mut cell = VerifyCell {
        task: spec,
        alpha,
        creg_inv,
        status: VerifyStatus::Ok,
        max_dev: 0.0,
        worst: None,
    };
    let profile = match rank_profile(&ClosedFormParams::new(spec, alpha, creg_inv)?) {
        Ok(p) => p,
        Err(Error::Degenerate(_)) => {
            cell.status = VerifyStatus::DegenerateOracleOnly;
            cell.max_dev = f64::NAN;
            return Ok(cell);
        }
        Err(e) => return Err(e),
    };
    for pair in spec.all_pairs() {
        let o = oracle.predict(pair);
        let dev = (profile.predict(pair) - o).abs() / o.abs().max(1.0);
        if !(dev <= cell.max_dev) {
            cell.max_dev = dev;
            cell.worst = Some(pair);
        }
    }
    if !(cell.max_dev <= tol) {
        cell.status = VerifyStatus::Fail;
    }
    Ok(cell)
}

pub fn verify(a: &VerifyArgs, format: Format) -> Result<(Vec<u8>, Vec<VerifyCell>), CliError> {
    let tasks = match resolve_task(&a.task, None) {
        Ok(spec) if spec.kind() == TaskKind::Tp => {
            return Err(CliError::Usage("the closed form covers ti and tiexc tasks only".into()))
        }
        Ok(spec) => vec![spec],
        Err(_) if a.task.n.is_none() && a.task.p.is_none() && a.task.q.is_none() && a.task.kind.is_none() => {
            default_verify_tasks()
        }
        Err(e) => return Err(e),
    };
    let alphas = if a.alpha.is_empty() { (0..10).map(|i| (2 * i + 1) as f64 / 20.0).collect() } else { a.alpha.clone() };
    let cregs = if a.creg_inv.is_empty() { vec![0.0, 0.01, 0.1, 1.0, 10.0] } else { a.creg_inv.clone() };
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let mut jobs = Vec::with_capacity(tasks.len() * alphas.len() * cregs.len());
    for &t in &tasks {
        for &al in &alphas {
            jobs.extend(cregs.iter().map(|&c| (t, al, c)));
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(t, al, c)| verify_cell(t, al, c, a.tol))
        .collect::<relkern::Result<Vec<_>>>()?;

    let config = json!({
        "command": "verify",
        "tasks": if tasks.len() == 1 { json!(tasks[0]) } else { json!("default grid, n = 4..12") },
        "alphas": alphas,
        "creg_invs": cregs,
        "tol": a.tol,
    });
    let out = emit(format, "verify", &config, &cells, |w| {
        write_config_line(w, &config)?;
        use std::io::Write;
        writeln!(w, "kind,n,p,q,alpha,creg_inv,status,max_dev,worst_j,worst_k")?;
        for c in &cells {
            let (p, q) = c.task.exception().map_or((String::new(), String::new()), |(p, q)| (p.to_string(), q.to_string()));
            let (wj, wk) = c.worst.map_or((String::new(), String::new()), |w| (w.j.to_string(), w.k.to_string()));
            let status = serde_json::to_value(c.status)?;
            writeln!(
                w,
                "{},{},{p},{q},{},{},{},{},{wj},{wk}",
                c.task.kind(),
                c.task.n(),
                fmt_f64(c.alpha),
                fmt_f64(c.creg_inv),
                status.as_str().unwrap_or_default(),
                fmt_f64(c.max_dev)
            )?;
        }
        Ok(())
    })?;
    Ok((out, cells))
}

pub fn ranks(a: &RanksArgs, format: Format) -> Out {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    let (alpha, creg_inv) = resolve_model(&a.model)?;
    let profile = rank_profile(&ClosedFormParams::new(spec, alpha, creg_inv)?)?;
    let config = json!({"command": "ranks", "task": spec, "alpha": alpha, "creg_inv": creg_inv});
    emit(format, "ranks", &config, &profile, |w| write_ranks_csv(w, &config, &profile))
}

#[derive(Serialize)]
struct PredictionRow {
    pair: ItemPair,
    prediction: f64,
    expected: Option<i8>,
}

pub fn predict(a: &PredictArgs, format: Format) -> Out {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    let (alpha, creg_inv) = resolve_model(&a.model)?;
    let pairs: Vec<ItemPair> = if a.pairs.is_empty() {
        spec.all_pairs().collect()
    } else {
        a.pairs.iter().map(|p| spec.pair(p.j, p.k)).collect::<relkern::Result<_>>()?
    };
    let (model, fell_back) = Model::fit(&spec, alpha, creg_inv, a.predictor.into())?;
    let rows: Vec<PredictionRow> = pairs
        .iter()
        .map(|&pair| PredictionRow {
            pair,
            prediction: model.predict(pair),
            expected: expected_label(&spec, pair),
        })
        .collect();
    let config = json!({
        "command": "predict",
        "task": spec,
        "alpha": alpha,
        "creg_inv": creg_inv,
        "predictor": Predictor::from(a.predictor),
        "used": model.predictor(),
        "fell_back": fell_back,
    });
    emit(format, "predictions", &config, &rows, |w| {
        use std::io::Write;
        write_config_line(w, &config)?;
        writeln!(w, "j,k,prediction,expected")?;
        for r in &rows {
            let e = r.expected.map_or(String::new(), |e| e.to_string());
            writeln!(w, "{},{},{},{e}", r.pair.j, r.pair.k, fmt_f64(r.prediction))?;
        }
        Ok(())
    })
}

pub fn phase(a: &PhaseArgs, format: Format) -> Out {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    let (alphas, cregs) = grid(&a.grid);
    let predictor: Predictor = a.predictor.into();
    let pd = phase_diagram(&spec, &alphas, &cregs, predictor)?;
    let config = json!({
        "command": "phase-diagram",
        "task": spec,
        "predictor": predictor,
        "alphas": alphas,
        "creg_invs": cregs,
    });
    emit(format, "phase_diagram", &config, &pd, |w| write_phase_csv(w, &config, &pd))
}

pub fn sweep(a: &SweepArgs, format: Format) -> Out {
    let triples = if a.tasks.is_empty() { vec![(9, 6, 4), (11, 7, 5), (11, 8, 4)] } else { a.tasks.clone() };
    let specs = triples
        .iter()
        .map(|&(n, p, q)| TaskSpec::ti_exc(n, p, q))
        .collect::<relkern::Result<Vec<_>>>()?;
    let (alphas, cregs) = grid(&a.grid);
    let areas = sweep_task_params(&specs, &alphas, &cregs)?;
    let config = json!({"command": "sweep", "tasks": specs, "alphas": alphas, "creg_invs": cregs});
    emit(format, "sweep", &config, &areas, |w| {
        use std::io::Write;
        write_config_line(w, &config)?;
        writeln!(w, "n,p,q,split,fraction")?;
        for area in &areas {
            let (p, q) = area.spec.exception().expect("tiexc");
            for (name, f) in &area.fractions {
                writeln!(w, "{},{p},{q},{},{}", area.spec.n(), name.as_str(), fmt_f64(*f))?;
            }
        }
        Ok(())
    })
}

pub fn curves(a: &CurvesArgs, format: Format) -> Out {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    if a.steps < 2 || !(a.from < a.to) {
        return Err(CliError::Usage("need --from < --to and --steps >= 2".into()));
    }
    let samples: Vec<f64> =
        (0..a.steps).map(|i| a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64).collect();
    let axis = match a.vary {
        VaryArg::Alpha => CurveAxis::Alpha { creg_inv: a.at },
        VaryArg::CregInv => CurveAxis::CregInv { alpha: a.at },
    };
    let pairs = a.pairs.iter().map(|p| spec.pair(p.j, p.k)).collect::<relkern::Result<Vec<_>>>()?;
    let table = margin_curves(&spec, axis, &samples, &pairs)?;
    let config = json!({
        "command": "curves",
        "task": spec,
        "axis": axis,
        "from": a.from,
        "to": a.to,
        "steps": a.steps,
        "pairs": pairs,
    });
    emit(format, "curves", &config, &table, |w| write_curves_csv(w, &config, &table))
}

pub fn decompose(a: &DecomposeArgs, format: Format) -> Out {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    let params = resolve_kernel(&a.model)?;
    let map = FourHotMap::new(spec.n(), &params)?;
    let dec = ridge_primal(&map, &build_training_set(&spec), params.c())?;
    let config = json!({"command": "decompose", "task": spec, "kernel": params});
    emit(format, "decomposition", &config, &dec, |w| write_decomposition_csv(w, &config, &dec))
}

pub fn features(a: &FeaturesArgs, format: Format) -> Out {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    let rows = width_sweep(&spec, &a.widths, &a.seeds, a.nonlinearity, a.c)?;
    let config = json!({
        "command": "features",
        "task": spec,
        "widths": a.widths,
        "seeds": a.seeds,
        "nonlinearity": a.nonlinearity,
        "c": a.c,
    });
    emit(format, "width_sweep", &config, &rows, |w| write_width_sweep_csv(w, &config, &rows))
}
