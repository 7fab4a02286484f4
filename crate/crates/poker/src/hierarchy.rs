//! Sampling hand hierarchies that realize a relational task, and measuring
//! how the untrained pairs come out.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use relkern::tasks::SplitName;
use relkern::{build_eval_splits, build_training_set, TaskKind, TaskSpec};

use crate::class::{HoleClass, NUM_CLASSES};
use crate::equity::EquityMatrix;
use crate::error::{PokerError, Result};

pub const DEFAULT_BAND: (f64, f64) = (0.51, 0.60);
pub const DEFAULT_MAX_RESTARTS: usize = 1000;

/// Closed interval of allowed winner equities on training pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Band> {
        if !(lo > 0.5 && lo <= hi && hi < 1.0) {
            return Err(PokerError::Validation(format!(
                "band [{lo}, {hi}] must satisfy 0.5 < lo <= hi < 1"
            )));
        }
        Ok(Band { lo, hi })
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo <= e && e <= self.hi
    }
}

impl Default for Band {
    fn default() -> Band {
        Band {
            lo: DEFAULT_BAND.0,
            hi: DEFAULT_BAND.1,
        }
    }
}

/// A training constraint: item `winner` must beat item `loser` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub winner: usize,
    pub loser: usize,
    pub equity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySample {
    pub hands: Vec<HoleClass>,
    pub constraints: Vec<Constraint>,
    /// Attempts used, counting the successful one.
    pub attempts: usize,
}

/// Winner/loser item pairs of the training set, from its positively labelled
/// examples.
fn training_constraints(spec: &TaskSpec) -> Vec<(usize, usize)> {
    build_training_set(spec)
        .examples
        .iter()
        .filter(|e| e.label > 0)
        .map(|e| (e.pair.j, e.pair.k))
        .collect()
}

fn check_spec(spec: &TaskSpec) -> Result<()> {
    match spec.kind() {
        TaskKind::Ti | TaskKind::TiExc => Ok(()),
        TaskKind::Tp => Err(PokerError::Validation(format!(
            "hierarchies are sampled for ti and tiexc tasks, got {spec}"
        ))),
    }
}

/// Draws hands `h_1..h_n` one at a time, each uniformly among the unused
/// classes that satisfy every training constraint with the hands already
/// placed. TI additionally requires every earlier hand to beat the new one.
/// A dead end restarts from a fresh first hand.
pub fn sample_hierarchy(
    spec: &TaskSpec,
    eq: &EquityMatrix,
    band: Band,
    seed: u64,
    max_restarts: usize,
) -> Result<HierarchySample> {
    check_spec(spec)?;
    let n = spec.n();
    if n > NUM_CLASSES {
        return Err(PokerError::Validation(format!("n = {n} exceeds the {NUM_CLASSES} hand classes")));
    }
    let transitive = spec.kind() == TaskKind::Ti;
    let constraints = training_constraints(spec);
    // Constraints that become checkable when item `i` is placed.
    let mut due: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
    for &(w, l) in &constraints {
        due[w.max(l)].push((w, l));
    }

    let all: Vec<HoleClass> = HoleClass::all().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(NUM_CLASSES);
    for attempt in 1..=max_restarts + 1 {
        let mut hands: Vec<HoleClass> = vec![*all.choose(&mut rng).expect("classes exist")];
        while hands.len() < n {
            let i = hands.len() + 1;
            candidates.clear();
            candidates.extend(all.iter().copied().filter(|c| {
                let hand = |item: usize| if item == i { *c } else { hands[item - 1] };
                !hands.contains(c)
                    && due[i].iter().all(|&(w, l)| band.contains(eq.equity(hand(w), hand(l))))
                    && (!transitive || hands.iter().all(|&h| eq.winningness(h, *c)))
            }));
            match candidates.choose(&mut rng) {
                Some(&c) => hands.push(c),
                None => break,
            }
        }
        if hands.len() == n {
            let constraints = constraints
                .iter()
                .map(|&(w, l)| Constraint {
                    winner: w,
                    loser: l,
                    equity: eq.equity(hands[w - 1], hands[l - 1]),
                })
                .collect();
            return Ok(HierarchySample {
                hands,
                constraints,
                attempts: attempt,
            });
        }
    }
    Err(PokerError::SamplingFailed {
        attempts: max_restarts + 1,
        reason: format!("no hierarchy for {spec} within band [{}, {}]", band.lo, band.hi),
    })
}

/// Re-checks a sample from scratch: distinct hands, every training
/// constraint within the band and, for TI, the full pairwise order.
pub fn verify_sample(spec: &TaskSpec, eq: &EquityMatrix, band: Band, sample: &HierarchySample) -> Result<()> {
    check_spec(spec)?;
    let n = spec.n();
    let fail = |m: String| Err(PokerError::Validation(m));
    if sample.hands.len() != n {
        return fail(format!("expected {n} hands, got {}", sample.hands.len()));
    }
    for (i, a) in sample.hands.iter().enumerate() {
        if sample.hands[i + 1..].contains(a) {
            return fail(format!("hand {a} appears twice"));
        }
    }
    let h = |item: usize| sample.hands[item - 1];
    for (w, l) in training_constraints(spec) {
        let e = eq.equity(h(w), h(l));
        if !band.contains(e) {
            return fail(format!("item {w} ({}) vs item {l} ({}) has equity {e}", h(w), h(l)));
        }
    }
    if spec.kind() == TaskKind::Ti {
        for j in 1..=n {
            for k in j + 1..=n {
                if !eq.winningness(h(j), h(k)) {
                    return fail(format!("item {j} ({}) does not beat item {k} ({})", h(j), h(k)));
                }
            }
        }
    }
    Ok(())
}

/// `n x n` matrix of the fraction of samples in which item `i` beats item
/// `j`; the diagonal is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionMatrix {
    pub n: usize,
    pub samples: usize,
    pub values: Vec<Option<f64>>,
}

impl ProportionMatrix {
    /// Entry for 1-based items `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[(i - 1) * self.n + (j - 1)]
    }

    /// Mean proportion over the within- and cross-section test pairs, each
    /// taken in its expected winning direction.
    pub fn section_mean(&self, spec: &TaskSpec) -> Result<f64> {
        let splits = build_eval_splits(spec)?;
        let cells: Vec<f64> = splits
            .iter()
            .filter(|s| matches!(s.name, SplitName::WithinSection | SplitName::CrossSection))
            .flat_map(|s| s.pairs.iter())
            .filter(|(_, label)| *label > 0)
            .filter_map(|(p, _)| self.get(p.j, p.k))
            .collect();
        if cells.is_empty() {
            return Err(PokerError::Validation(format!("{spec} has no section test pairs")));
        }
        Ok(cells.iter().sum::<f64>() / cells.len() as f64)
    }
}

pub fn generalization_proportions(
    samples: &[HierarchySample],
    eq: &EquityMatrix,
    spec: &TaskSpec,
) -> Result<ProportionMatrix> {
    let n = spec.n();
    if samples.is_empty() {
        return Err(PokerError::Validation("need at least one sample".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.hands.len() != n) {
        return Err(PokerError::Validation(format!("sample of length {} for n = {n}", s.hands.len())));
    }
    let mut counts = vec![0usize; n * n];
    for s in samples {
        for i in 0..n {
            for j in 0..n {
                if i != j && eq.winningness(s.hands[i], s.hands[j]) {
                    counts[i * n + j] += 1;
                }
            }
        }
    }
    let values = counts
        .iter()
        .enumerate()
        .map(|(idx, &c)| (idx / n != idx % n).then(|| c as f64 / samples.len() as f64))
        .collect();
    Ok(ProportionMatrix {
        n,
        samples: samples.len(),
        values,
    })
}
