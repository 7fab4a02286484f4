use std::fs::File;
use std::io::{BufReader, Write};

use serde::Serialize;
use serde_json::{json, Value};

use relkern::export::{fmt_f64, write_config_line, write_json};
use relkern::TaskSpec;
use relkern_poker::{
    generalization_proportions, heads_up_equity, sample_hierarchy, verify_sample, Band, EquityMatrix, EquityMethod,
    HierarchySample, HoleClass, PokerError,
};

use crate::args::*;
use crate::commands::{default_task, resolve_task, Out};
use crate::CliError;

pub fn run(cmd: &PokerCommand, format: Format) -> Out {
    match cmd {
        PokerCommand::Equity(a) => equity(a, format),
        PokerCommand::Matchup(a) => matchup(a, format),
        PokerCommand::Hierarchy(a) => hierarchy(a, format),
        PokerCommand::Proportions(a) => proportions(a, format),
    }
}

fn method(m: MethodArg, samples: u64, seed: u64) -> EquityMethod {
    match m {
        MethodArg::Exact => EquityMethod::Exact,
        MethodArg::Mc => EquityMethod::MonteCarlo { samples, seed },
    }
}

fn equity(a: &EquityArgs, format: Format) -> Out {
    if a.method == MethodArg::Exact {
        return Err(CliError::Usage(
            "the full matrix is Monte Carlo only; use `poker matchup --method exact` for single matchups".into(),
        ));
    }
    let eq = EquityMatrix::monte_carlo(a.samples, a.seed)?;
    let config = json!({"command": "poker equity", "method": eq.method()});
    let mut buf = Vec::new();
    match format {
        Format::Csv => eq.write(&mut buf, &config)?,
        Format::Json => {
            let classes: Vec<String> = HoleClass::all().map(|c| c.to_string()).collect();
            let rows: Vec<&[f64]> = eq.values().chunks(classes.len()).collect();
            write_json(&mut buf, "equity_matrix", &config, &json!({"classes": classes, "values": rows}))?;
        }
    }
    Ok(buf)
}

#[derive(Serialize)]
struct MatchupRow {
    a: HoleClass,
    b: HoleClass,
    equity: f64,
    wins: bool,
}

fn matchup(a: &MatchupArgs, format: Format) -> Out {
    let m = method(a.method, a.samples, a.seed);
    let e = heads_up_equity(a.a, a.b, m)?;
    let row = MatchupRow {
        a: a.a,
        b: a.b,
        equity: e,
        wins: e > 0.5,
    };
    let config = json!({"command": "poker matchup", "a": a.a, "b": a.b, "method": m});
    let mut buf = Vec::new();
    match format {
        Format::Json => write_json(&mut buf, "matchup", &config, &row)?,
        Format::Csv => {
            write_config_line(&mut buf, &config)?;
            writeln!(buf, "a,b,equity,wins")?;
            writeln!(buf, "{},{},{},{}", row.a, row.b, fmt_f64(row.equity), row.wins)?;
        }
    }
    Ok(buf)
}

fn load_matrix(a: &HierarchyArgs) -> Result<(EquityMatrix, Value), CliError> {
    match &a.matrix {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let eq = EquityMatrix::read(BufReader::new(file))?;
            let source = json!({"file": path.display().to_string(), "method": eq.method()});
            Ok((eq, source))
        }
        None => {
            let eq = EquityMatrix::monte_carlo(a.samples, a.matrix_seed)?;
            let source = json!({"method": eq.method()});
            Ok((eq, source))
        }
    }
}

#[derive(Serialize)]
struct SampleOutcome {
    seed: u64,
    #[serde(flatten)]
    result: SampleResult,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum SampleResult {
    Ok(HierarchySample),
    Failed { attempts: usize },
}

struct Hierarchies {
    spec: TaskSpec,
    eq: EquityMatrix,
    config: Value,
    outcomes: Vec<SampleOutcome>,
}

fn sample_all(a: &HierarchyArgs, command: &str) -> Result<Hierarchies, CliError> {
    let spec = resolve_task(&a.task, Some(default_task()))?;
    let band = Band::new(a.band_lo, a.band_hi)?;
    let (eq, source) = load_matrix(a)?;
    let mut outcomes = Vec::new();
    for seed in a.first_seed..a.first_seed + a.count {
        let result = match sample_hierarchy(&spec, &eq, band, seed, a.max_restarts) {
            Ok(s) => {
                verify_sample(&spec, &eq, band, &s)?;
                SampleResult::Ok(s)
            }
            Err(PokerError::SamplingFailed { attempts, .. }) => SampleResult::Failed { attempts },
            Err(e) => return Err(e.into()),
        };
        outcomes.push(SampleOutcome { seed, result });
    }
    let config = json!({
        "command": command,
        "task": spec,
        "matrix": source,
        "band": band,
        "first_seed": a.first_seed,
        "count": a.count,
        "max_restarts": a.max_restarts,
    });
    Ok(Hierarchies {
        spec,
        eq,
        config,
        outcomes,
    })
}

fn hierarchy(a: &HierarchyArgs, format: Format) -> Out {
    let h = sample_all(a, "poker hierarchy")?;
    let mut buf = Vec::new();
    match format {
        Format::Json => write_json(&mut buf, "hierarchies", &h.config, &h.outcomes)?,
        Format::Csv => {
            write_config_line(&mut buf, &h.config)?;
            let items: Vec<String> = (1..=h.spec.n()).map(|i| format!("h{i}")).collect();
            writeln!(buf, "seed,status,attempts,{}", items.join(","))?;
            for o in &h.outcomes {
                match &o.result {
                    SampleResult::Ok(s) => {
                        let hands: Vec<String> = s.hands.iter().map(|c| c.to_string()).collect();
                        writeln!(buf, "{},ok,{},{}", o.seed, s.attempts, hands.join(","))?;
                    }
                    SampleResult::Failed { attempts } => {
                        writeln!(buf, "{},failed,{attempts},{}", o.seed, vec![""; h.spec.n()].join(","))?;
                    }
                }
            }
        }
    }
    Ok(buf)
}

fn proportions(a: &HierarchyArgs, format: Format) -> Out {
    let h = sample_all(a, "poker proportions")?;
    let samples: Vec<HierarchySample> = h
        .outcomes
        .into_iter()
        .filter_map(|o| match o.result {
            SampleResult::Ok(s) => Some(s),
            SampleResult::Failed { .. } => None,
        })
        .collect();
    let p = generalization_proportions(&samples, &h.eq, &h.spec)?;
    let section_mean = p.section_mean(&h.spec).ok();
    let mut buf = Vec::new();
    match format {
        Format::Json => write_json(
            &mut buf,
            "proportions",
            &h.config,
            &json!({"matrix": p, "section_mean": section_mean}),
        )?,
        Format::Csv => {
            write_config_line(&mut buf, &h.config)?;
            writeln!(buf, "# samples: {}", p.samples)?;
            if let Some(m) = section_mean {
                writeln!(buf, "# section_mean: {}", fmt_f64(m))?;
            }
            let cols: Vec<String> = (1..=p.n).map(|j| format!("j{j}")).collect();
            writeln!(buf, "i,{}", cols.join(","))?;
            for i in 1..=p.n {
                let row: Vec<String> = (1..=p.n).map(|j| p.get(i, j).map_or(String::new(), fmt_f64)).collect();
                writeln!(buf, "{i},{}", row.join(","))?;
            }
        }
    }
    Ok(buf)
}
