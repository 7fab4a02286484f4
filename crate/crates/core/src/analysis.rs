//! Margins `y f(x)` on scored pairs, phase diagrams over `(alpha, c~^-1)`,
//! task-parameter sweeps and margin curves with located zero crossings.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{rank_profile, ClosedFormParams, RankProfile};
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::oracle::{dual_solve, DualSolution};
use crate::tasks::{
    build_eval_splits, build_training_set, expected_label, EvalSplit, ItemPair, SplitName,
    TaskKind, TaskSpec,
};

/// Margins at or below this count as failures.
pub const SUCCESS_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predictor {
    ClosedForm,
    Oracle,
}

impl Predictor {
    pub fn as_str(self) -> &'static str {
        match self {
            Predictor::ClosedForm => "closed-form",
            Predictor::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" | "closed_form" => Ok(Predictor::ClosedForm),
            "oracle" => Ok(Predictor::Oracle),
            other => Err(Error::Parse(format!("unknown predictor '{other}'"))),
        }
    }
}

/// A fitted model of either kind.
#[derive(Debug, Clone)]
pub enum Model {
    ClosedForm(RankProfile),
    Oracle(DualSolution),
}

impl Model {
    /// Fits the requested predictor. The closed form falls back to the oracle
    /// on TP and on the degenerate boundary; the second value reports that.
    pub fn fit(spec: &TaskSpec, alpha: f64, creg_inv: f64, predictor: Predictor) -> Result<(Model, bool)> {
        if predictor == Predictor::ClosedForm && spec.kind() != TaskKind::Tp {
            let cfp = ClosedFormParams::new(*spec, alpha, creg_inv)?;
            match rank_profile(&cfp) {
                Ok(profile) => return Ok((Model::ClosedForm(profile), false)),
                Err(Error::Degenerate(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let params = KernelParams::from_alpha(alpha, creg_inv)?;
        let sol = dual_solve(&params, &build_training_set(spec))?;
        Ok((Model::Oracle(sol), predictor == Predictor::ClosedForm))
    }

    pub fn predict(&self, pair: ItemPair) -> f64 {
        match self {
            Model::ClosedForm(p) => p.predict(pair),
            Model::Oracle(s) => s.predict(pair),
        }
    }

    pub fn predictor(&self) -> Predictor {
        match self {
            Model::ClosedForm(_) => Predictor::ClosedForm,
            Model::Oracle(_) => Predictor::Oracle,
        }
    }
}

/// Scored pairs per split.
///
/// TIExc uses its four evaluation splits. TI scores its training pairs as
/// transitive memorization and every other pair as within-section
/// generalization, the whole list being one section. TP only scores its
/// training pairs, all of which are intransitive memorization.
pub fn scored_splits(spec: &TaskSpec) -> Result<Vec<EvalSplit>> {
    let train = build_training_set(spec);
    let train_pairs: Vec<(ItemPair, i8)> = train.examples.iter().map(|e| (e.pair, e.label)).collect();
    match spec.kind() {
        TaskKind::TiExc => build_eval_splits(spec),
        TaskKind::Tp => Ok(vec![EvalSplit {
            name: SplitName::MemIntransitive,
            pairs: train_pairs,
        }]),
        TaskKind::Ti => {
            let test = spec
                .all_pairs()
                .filter(|p| !train.contains(*p))
                .map(|p| (p, if p.j < p.k { 1 } else { -1 }))
                .collect();
            Ok(vec![
                EvalSplit {
                    name: SplitName::MemTransitive,
                    pairs: train_pairs,
                },
                EvalSplit {
                    name: SplitName::WithinSection,
                    pairs: test,
                },
            ])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMargin {
    pub pair: ItemPair,
    pub label: i8,
    pub prediction: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitMargins {
    pub name: SplitName,
    pub pairs: Vec<PairMargin>,
    /// `+inf` for an empty split.
    pub min_margin: f64,
    /// `NaN` for an empty split.
    pub mean_margin: f64,
    pub success: bool,
}

impl SplitMargins {
    fn new(name: SplitName, pairs: Vec<PairMargin>) -> Self {
        let min_margin = pairs.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
        let mean_margin = pairs.iter().map(|m| m.margin).sum::<f64>() / pairs.len() as f64;
        SplitMargins {
            name,
            success: min_margin > SUCCESS_THRESHOLD,
            pairs,
            min_margin,
            mean_margin,
        }
    }

    pub fn summary(&self) -> SplitSummary {
        SplitSummary {
            name: self.name,
            count: self.pairs.len(),
            min_margin: self.min_margin,
            mean_margin: self.mean_margin,
            success: self.success,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSummary {
    pub name: SplitName,
    pub count: usize,
    pub min_margin: f64,
    pub mean_margin: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub spec: TaskSpec,
    pub alpha: f64,
    pub creg_inv: f64,
    pub requested: Predictor,
    pub used: Predictor,
    /// The closed form was requested but the oracle answered.
    pub fell_back: bool,
    pub splits: Vec<SplitMargins>,
}

impl MarginReport {
    pub fn split(&self, name: SplitName) -> Option<&SplitMargins> {
        self.splits.iter().find(|s| s.name == name)
    }

    pub fn success(&self, name: SplitName) -> Option<bool> {
        self.split(name).map(|s| s.success)
    }
}

/// Margins on every scored pair of `spec` at `(alpha, creg_inv)`.
pub fn margins(spec: &TaskSpec, alpha: f64, creg_inv: f64, predictor: Predictor) -> Result<MarginReport> {
    let (model, fell_back) = Model::fit(spec, alpha, creg_inv, predictor)?;
    let splits = scored_splits(spec)?
        .into_iter()
        .map(|split| {
            let pairs = split
                .pairs
                .iter()
                .map(|&(pair, label)| {
                    let prediction = model.predict(pair);
                    PairMargin {
                        pair,
                        label,
                        prediction,
                        margin: f64::from(label) * prediction,
                    }
                })
                .collect();
            SplitMargins::new(split.name, pairs)
        })
        .collect();
    Ok(MarginReport {
        spec: *spec,
        alpha,
        creg_inv,
        requested: predictor,
        used: model.predictor(),
        fell_back,
        splits,
    })
}

/// `alpha` in `{0.02, 0.04, ..., 0.98}`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..50).map(|i| i as f64 / 50.0).collect()
}

/// `0` followed by 21 log-spaced points from `1e-3` to `1e1`.
pub fn default_creg_inv_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..=20).map(|i| 10f64.powf(-3.0 + i as f64 / 5.0)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CellOutcome {
    Ok {
        used: Predictor,
        fell_back: bool,
        splits: Vec<SplitSummary>,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub alpha_index: usize,
    pub creg_index: usize,
    pub alpha: f64,
    pub creg_inv: f64,
    pub outcome: CellOutcome,
}

impl PhaseCell {
    pub fn success(&self, name: SplitName) -> Option<bool> {
        match &self.outcome {
            CellOutcome::Ok { splits, .. } => splits.iter().find(|s| s.name == name).map(|s| s.success),
            CellOutcome::Error { .. } => None,
        }
    }

    pub fn summary(&self, name: SplitName) -> Option<&SplitSummary> {
        match &self.outcome {
            CellOutcome::Ok { splits, .. } => splits.iter().find(|s| s.name == name),
            CellOutcome::Error { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub spec: TaskSpec,
    pub predictor: Predictor,
    pub alphas: Vec<f64>,
    pub creg_invs: Vec<f64>,
    /// Alpha-major, `creg_inv`-minor.
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, alpha_index: usize, creg_index: usize) -> &PhaseCell {
        &self.cells[alpha_index * self.creg_invs.len() + creg_index]
    }

    /// Fraction of cells, errors included in the denominator, where `name`
    /// succeeds.
    pub fn success_fraction(&self, name: SplitName) -> f64 {
        let hits = self.cells.iter().filter(|c| c.success(name) == Some(true)).count();
        hits as f64 / self.cells.len() as f64
    }
}

fn check_grids(alphas: &[f64], creg_invs: &[f64]) -> Result<()> {
    if alphas.is_empty() || creg_invs.is_empty() {
        return Err(Error::Domain("phase diagram grids must be nonempty".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..1.0).contains(*a)) {
        return Err(Error::Domain(format!("alpha grid value {a} outside [0, 1)")));
    }
    if let Some(c) = creg_invs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::Domain(format!("creg_inv grid value {c} outside [0, inf)")));
    }
    Ok(())
}

/// Evaluates [`margins`] on every grid cell. A failing cell is recorded with
/// its error and does not stop the sweep.
pub fn phase_diagram(
    spec: &TaskSpec,
    alphas: &[f64],
    creg_invs: &[f64],
    predictor: Predictor,
) -> Result<PhaseDiagram> {
    check_grids(alphas, creg_invs)?;
    let cells = (0..alphas.len() * creg_invs.len())
        .into_par_iter()
        .map(|idx| {
            let (ai, ci) = (idx / creg_invs.len(), idx % creg_invs.len());
            let (alpha, creg_inv) = (alphas[ai], creg_invs[ci]);
            let outcome = match margins(spec, alpha, creg_inv, predictor) {
                Ok(report) => CellOutcome::Ok {
                    used: report.used,
                    fell_back: report.fell_back,
                    splits: report.splits.iter().map(SplitMargins::summary).collect(),
                },
                Err(e) => CellOutcome::Error {
                    message: e.to_string(),
                },
            };
            PhaseCell {
                alpha_index: ai,
                creg_index: ci,
                alpha,
                creg_inv,
                outcome,
            }
        })
        .collect();
    Ok(PhaseDiagram {
        spec: *spec,
        predictor,
        alphas: alphas.to_vec(),
        creg_invs: creg_invs.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaSummary {
    pub spec: TaskSpec,
    /// Success fraction per split, in [`SplitName::ALL`] order.
    pub fractions: Vec<(SplitName, f64)>,
}

impl AreaSummary {
    pub fn fraction(&self, name: SplitName) -> f64 {
        self.fractions
            .iter()
            .find(|(n, _)| *n == name)
            .map_or(0.0, |(_, f)| *f)
    }
}

/// Success-area fractions of each TIExc task on a shared grid.
pub fn sweep_task_params(specs: &[TaskSpec], alphas: &[f64], creg_invs: &[f64]) -> Result<Vec<AreaSummary>> {
    if let Some(bad) = specs.iter().find(|s| s.kind() != TaskKind::TiExc) {
        return Err(Error::UnsupportedTask(format!(
            "task sweeps compare tiexc tasks, got {bad}"
        )));
    }
    specs
        .iter()
        .map(|spec| {
            let diagram = phase_diagram(spec, alphas, creg_invs, Predictor::ClosedForm)?;
            Ok(AreaSummary {
                spec: *spec,
                fractions: SplitName::ALL
                    .iter()
                    .map(|&name| (name, diagram.success_fraction(name)))
                    .collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveAxis {
    /// Vary `alpha` at fixed `creg_inv`.
    Alpha { creg_inv: f64 },
    /// Vary `creg_inv` at fixed `alpha`.
    CregInv { alpha: f64 },
}

impl CurveAxis {
    fn point(&self, x: f64) -> (f64, f64) {
        match *self {
            CurveAxis::Alpha { creg_inv } => (x, creg_inv),
            CurveAxis::CregInv { alpha } => (alpha, x),
        }
    }

    pub fn varied_name(&self) -> &'static str {
        match self {
            CurveAxis::Alpha { .. } => "alpha",
            CurveAxis::CregInv { .. } => "creg_inv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub pair: ItemPair,
    /// Last sample before and first sample after the sign change.
    pub bracket: (f64, f64),
    pub location: f64,
    /// `true` when the margin goes from positive to non-positive.
    pub falling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub spec: TaskSpec,
    pub axis: CurveAxis,
    pub samples: Vec<f64>,
    pub pairs: Vec<ItemPair>,
    /// `margins[i][s]` is the margin of `pairs[i]` at `samples[s]`.
    pub margins: Vec<Vec<f64>>,
    pub crossings: Vec<Crossing>,
}

/// Bisection tolerance for zero crossings, in the varied parameter.
pub const CROSSING_TOL: f64 = 1e-6;

fn margin_at(spec: &TaskSpec, axis: CurveAxis, x: f64, pair: ItemPair, label: i8) -> Result<f64> {
    let (alpha, creg_inv) = axis.point(x);
    let (model, _) = Model::fit(spec, alpha, creg_inv, Predictor::ClosedForm)?;
    Ok(f64::from(label) * model.predict(pair))
}

/// Margins of `pairs` along `samples` of the varied parameter, with each sign
/// change between consecutive samples refined by bisection.
pub fn margin_curves(
    spec: &TaskSpec,
    axis: CurveAxis,
    samples: &[f64],
    pairs: &[ItemPair],
) -> Result<CurveTable> {
    if samples.is_empty() {
        return Err(Error::Domain("margin curves need at least one sample".into()));
    }
    if samples.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("curve samples must be strictly increasing".into()));
    }
    let labels = pairs
        .iter()
        .map(|&p| {
            expected_label(spec, p)
                .ok_or_else(|| Error::Domain(format!("pair {p} has no expected label in {spec}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let columns = samples
        .par_iter()
        .map(|&x| {
            let (alpha, creg_inv) = axis.point(x);
            let (model, _) = Model::fit(spec, alpha, creg_inv, Predictor::ClosedForm)?;
            Ok(pairs
                .iter()
                .zip(&labels)
                .map(|(&p, &y)| f64::from(y) * model.predict(p))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let margins: Vec<Vec<f64>> = (0..pairs.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();

    let mut crossings = Vec::new();
    for (i, (&pair, &label)) in pairs.iter().zip(&labels).enumerate() {
        for s in 1..samples.len() {
            let (m0, m1) = (margins[i][s - 1], margins[i][s]);
            let positive = |m: f64| m > SUCCESS_THRESHOLD;
            if positive(m0) == positive(m1) {
                continue;
            }
            let (mut lo, mut hi) = (samples[s - 1], samples[s]);
            let lo_positive = positive(m0);
            while hi - lo > CROSSING_TOL {
                let mid = 0.5 * (lo + hi);
                if positive(margin_at(spec, axis, mid, pair, label)?) == lo_positive {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(Crossing {
                pair,
                bracket: (samples[s - 1], samples[s]),
                location: 0.5 * (lo + hi),
                falling: lo_positive,
            });
        }
    }
    Ok(CurveTable {
        spec: *spec,
        axis,
        samples: samples.to_vec(),
        pairs: pairs.to_vec(),
        margins,
        crossings,
    })
}
