use std::fs;
use std::path::PathBuf;

use relkern::analysis::{
    default_alpha_grid, default_creg_inv_grid, margin_curves, margins, phase_diagram, sweep_task_params,
    CellOutcome, CurveAxis, Predictor,
};
use relkern::export::write_phase_csv;
use relkern::tasks::SplitName;
use relkern::{ItemPair, TaskSpec};

fn pair(j: usize, k: usize) -> ItemPair {
    ItemPair::new(j, k).unwrap()
}

fn reference() -> TaskSpec {
    TaskSpec::ti_exc(9, 6, 4).unwrap()
}

#[test]
fn predictors_agree_on_every_flag() {
    for spec in [reference(), TaskSpec::ti_exc(11, 7, 5).unwrap(), TaskSpec::ti(8).unwrap()] {
        let (a, c) = (default_alpha_grid(), default_creg_inv_grid());
        let cf = phase_diagram(&spec, &a, &c, Predictor::ClosedForm).unwrap();
        let or = phase_diagram(&spec, &a, &c, Predictor::Oracle).unwrap();
        for (x, y) in cf.cells.iter().zip(&or.cells) {
            for name in SplitName::ALL {
                assert_eq!(x.success(name), y.success(name), "{spec} alpha={} c={} {name}", x.alpha, x.creg_inv);
            }
        }
    }
}

#[test]
fn within_section_always_generalizes() {
    for spec in [reference(), TaskSpec::ti_exc(11, 8, 4).unwrap(), TaskSpec::ti_exc(12, 9, 2).unwrap()] {
        let pd = phase_diagram(&spec, &default_alpha_grid(), &default_creg_inv_grid(), Predictor::ClosedForm).unwrap();
        for cell in &pd.cells {
            assert_eq!(cell.success(SplitName::WithinSection), Some(true), "{spec} {} {}", cell.alpha, cell.creg_inv);
        }
    }
}

#[test]
fn ti_and_tp_never_err() {
    let alphas: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    let cregs = [0.0, 0.01, 0.1, 1.0, 10.0];
    for n in 4..=9 {
        for spec in [TaskSpec::ti(n).unwrap(), TaskSpec::tp(n).unwrap()] {
            let pd = phase_diagram(&spec, &alphas, &cregs, Predictor::Oracle).unwrap();
            for cell in &pd.cells {
                match &cell.outcome {
                    CellOutcome::Ok { splits, .. } => {
                        assert!(splits.iter().all(|s| s.success), "{spec} {} {}", cell.alpha, cell.creg_inv)
                    }
                    CellOutcome::Error { message } => panic!("{spec}: {message}"),
                }
            }
        }
    }
}

#[test]
fn reference_task_has_both_regimes() {
    let pd = phase_diagram(&reference(), &default_alpha_grid(), &default_creg_inv_grid(), Predictor::ClosedForm).unwrap();
    let case_a = pd.cells.iter().any(|c| {
        c.success(SplitName::MemIntransitive) == Some(true) && c.success(SplitName::CrossSection) == Some(false)
    });
    let case_c = pd
        .cells
        .iter()
        .any(|c| SplitName::ALL.iter().all(|&n| c.success(n) == Some(true)));
    assert!(case_a && case_c);
    let negative_cross = pd
        .cells
        .iter()
        .any(|c| c.summary(SplitName::CrossSection).is_some_and(|s| s.min_margin < 0.0));
    assert!(negative_cross);
}

#[test]
fn cross_section_pair_flips_with_alpha() {
    let alphas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let t = margin_curves(&reference(), CurveAxis::Alpha { creg_inv: 0.0 }, &alphas, &[pair(3, 7)]).unwrap();
    assert_eq!(t.crossings.len(), 1);
    let x = t.crossings[0];
    assert!(x.falling);
    // The flip sits at alpha = 1/3 for this task.
    assert!((x.location - 1.0 / 3.0).abs() < 2e-6, "{}", x.location);
}

#[test]
fn loop_pairs_flip_with_regularization_but_exception_holds() {
    let cregs: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
    let pairs = [pair(4, 5), pair(5, 6), pair(6, 4)];
    let t = margin_curves(&reference(), CurveAxis::CregInv { alpha: 0.15 }, &cregs, &pairs).unwrap();
    assert!(t.margins[0][0] > 0.0 && t.margins[1][0] > 0.0);
    assert!(*t.margins[0].last().unwrap() < 0.0 && *t.margins[1].last().unwrap() < 0.0);
    assert!(t.margins[2].iter().all(|&m| m > 0.0));
    assert!(t.crossings.iter().all(|c| c.pair != pair(6, 4)));
}

#[test]
fn more_transitive_items_shrink_cross_section_area() {
    let specs = [
        reference(),
        TaskSpec::ti_exc(11, 7, 5).unwrap(),
        TaskSpec::ti_exc(11, 8, 4).unwrap(),
    ];
    let areas = sweep_task_params(&specs, &default_alpha_grid(), &default_creg_inv_grid()).unwrap();
    let cross: Vec<f64> = areas.iter().map(|a| a.fraction(SplitName::CrossSection)).collect();
    assert!(cross[0] > cross[1]);
    assert!((cross[0] - cross[2]).abs() < (cross[0] - cross[1]).abs());
}

#[test]
fn margins_report_fallback_on_boundary() {
    let r = margins(&reference(), 0.0, 0.0, Predictor::ClosedForm).unwrap();
    assert!(r.fell_back);
    let r = margins(&reference(), 0.2, 0.0, Predictor::ClosedForm).unwrap();
    assert!(!r.fell_back);
}

fn regression_grid() -> (Vec<f64>, Vec<f64>) {
    let alphas = (0..20).map(|i| (i as f64 + 0.5) / 20.0).collect();
    let cregs = (0..20).map(|i| i as f64 / 2.0).collect();
    (alphas, cregs)
}

fn artifact_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/phase_tiexc_9_6_4_20x20.csv")
}

/// Rewrites the pinned artifact from the dual oracle.
#[test]
#[ignore]
fn regenerate_phase_artifact() {
    let (a, c) = regression_grid();
    let pd = phase_diagram(&reference(), &a, &c, Predictor::Oracle).unwrap();
    let mut buf = Vec::new();
    write_phase_csv(&mut buf, &serde_json::json!({"task": reference(), "predictor": "oracle"}), &pd).unwrap();
    fs::write(artifact_path(), buf).unwrap();
}

#[test]
fn closed_form_reproduces_pinned_oracle_grid() {
    let text = fs::read_to_string(artifact_path()).unwrap();
    let (a, c) = regression_grid();
    let pd = phase_diagram(&reference(), &a, &c, Predictor::ClosedForm).unwrap();
    let mut rows = text.lines().filter(|l| !l.starts_with('#')).skip(1);
    for cell in &pd.cells {
        for name in SplitName::ALL {
            let row = rows.next().expect("artifact has fewer rows than the grid");
            let f: Vec<&str> = row.split(',').collect();
            let s = cell.summary(name).unwrap();
            assert_eq!(f[0].parse::<f64>().unwrap(), cell.alpha);
            assert_eq!(f[1].parse::<f64>().unwrap(), cell.creg_inv);
            assert_eq!(f[2], name.as_str());
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1.0);
            assert!(close(s.min_margin, f[3].parse().unwrap()), "{row}");
            assert!(close(s.mean_margin, f[4].parse().unwrap()), "{row}");
            assert_eq!(s.success.to_string(), f[5]);
        }
    }
    assert!(rows.next().is_none());
}
