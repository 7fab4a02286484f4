//! Relational task family: transitive inference (TI), transverse patterning
//! (TP) and transitive inference with a single exception pair (TIExc).
//!
//! Items are indexed `1..=n` and the underlying order is `I_1 > I_2 > ... > I_n`.
//! A pair `(j, k)` carries label `+1` when the model should answer `I_j > I_k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the item count. The dual system has at most `2n` rows.
pub const MAX_ITEMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Ti,
    Tp,
    TiExc,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Ti => "ti",
            TaskKind::Tp => "tp",
            TaskKind::TiExc => "tiexc",
        })
    }
}

/// A validated task specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTaskSpec", into = "RawTaskSpec")]
pub struct TaskSpec {
    n: usize,
    kind: TaskKind,
    exception: Option<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTaskSpec {
    n: usize,
    kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
}

impl TryFrom<RawTaskSpec> for TaskSpec {
    type Error = Error;

    fn try_from(raw: RawTaskSpec) -> Result<Self> {
        match (raw.kind, raw.p, raw.q) {
            (TaskKind::TiExc, Some(p), Some(q)) => TaskSpec::ti_exc(raw.n, p, q),
            (TaskKind::TiExc, _, _) => Err(Error::InvalidTask(
                "kind \"tiexc\" requires both p and q".into(),
            )),
            (kind, None, None) => TaskSpec::new(raw.n, kind),
            (kind, _, _) => Err(Error::InvalidTask(format!(
                "p and q are only allowed for kind \"tiexc\", got kind \"{kind}\""
            ))),
        }
    }
}

impl From<TaskSpec> for RawTaskSpec {
    fn from(spec: TaskSpec) -> Self {
        RawTaskSpec {
            n: spec.n,
            kind: spec.kind,
            p: spec.exception.map(|(p, _)| p),
            q: spec.exception.map(|(_, q)| q),
        }
    }
}

impl TaskSpec {
    /// Builds a TI or TP spec. Use [`TaskSpec::ti_exc`] for exceptions.
    pub fn new(n: usize, kind: TaskKind) -> Result<Self> {
        if kind == TaskKind::TiExc {
            return Err(Error::InvalidTask(
                "use TaskSpec::ti_exc to supply the exception pair".into(),
            ));
        }
        check_item_count(n)?;
        Ok(TaskSpec {
            n,
            kind,
            exception: None,
        })
    }

    pub fn ti(n: usize) -> Result<Self> {
        Self::new(n, TaskKind::Ti)
    }

    pub fn tp(n: usize) -> Result<Self> {
        Self::new(n, TaskKind::Tp)
    }

    /// TI with the exception `I_p > I_q`, requiring `1 <= q < p <= n` and `p - q >= 2`.
    pub fn ti_exc(n: usize, p: usize, q: usize) -> Result<Self> {
        check_item_count(n)?;
        if q < 1 || p > n || q >= p {
            return Err(Error::InvalidTask(format!(
                "exception indices must satisfy 1 <= q < p <= n, got n={n}, p={p}, q={q}"
            )));
        }
        if p - q < 2 {
            return Err(Error::InvalidTask(format!(
                "exception pair must not be adjacent (p - q >= 2), got p={p}, q={q}"
            )));
        }
        Ok(TaskSpec {
            n,
            kind: TaskKind::TiExc,
            exception: Some((p, q)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    /// `(p, q)` for TIExc, `None` otherwise.
    pub fn exception(&self) -> Option<(usize, usize)> {
        self.exception
    }

    /// Validates a pair against this spec's item range.
    pub fn pair(&self, j: usize, k: usize) -> Result<ItemPair> {
        let pair = ItemPair::new(j, k)?;
        if k > self.n || j > self.n {
            return Err(Error::InvalidTask(format!(
                "pair ({j},{k}) out of range for n={}",
                self.n
            )));
        }
        Ok(pair)
    }

    /// All ordered pairs `(j, k)` with `j != k`, row-major.
    pub fn all_pairs(&self) -> impl Iterator<Item = ItemPair> + '_ {
        let n = self.n;
        (1..=n).flat_map(move |j| {
            (1..=n)
                .filter(move |&k| k != j)
                .map(move |k| ItemPair { j, k })
        })
    }

    /// The ordered sections and the loop for TIExc: `({1..q-1}, {q..p}, {p+1..n})`.
    fn sections(&self) -> Option<Sections> {
        self.exception.map(|(p, q)| Sections { n: self.n, p, q })
    }
}

impl fmt::Display for TaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exception {
            Some((p, q)) => write!(f, "tiexc(n={}, p={p}, q={q})", self.n),
            None => write!(f, "{}(n={})", self.kind, self.n),
        }
    }
}

fn check_item_count(n: usize) -> Result<()> {
    if !(3..=MAX_ITEMS).contains(&n) {
        return Err(Error::InvalidTask(format!(
            "item count must lie in 3..={MAX_ITEMS}, got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Sections {
    n: usize,
    p: usize,
    q: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Before,
    Loop,
    After,
}

impl Sections {
    fn region(&self, item: usize) -> Region {
        debug_assert!(item >= 1 && item <= self.n);
        if item < self.q {
            Region::Before
        } else if item <= self.p {
            Region::Loop
        } else {
            Region::After
        }
    }
}

/// An ordered pair of distinct items, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemPair {
    pub j: usize,
    pub k: usize,
}

impl ItemPair {
    pub fn new(j: usize, k: usize) -> Result<Self> {
        if j == 0 || k == 0 {
            return Err(Error::InvalidTask(format!(
                "items are 1-based, got ({j},{k})"
            )));
        }
        if j == k {
            return Err(Error::InvalidTask(format!(
                "a pair needs two distinct items, got ({j},{k})"
            )));
        }
        Ok(ItemPair { j, k })
    }

    /// The same items with the slots exchanged.
    pub fn swapped(self) -> Self {
        ItemPair {
            j: self.k,
            k: self.j,
        }
    }
}

impl fmt::Display for ItemPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// A training example. `label` is `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub pair: ItemPair,
    pub label: i8,
}

impl LabeledPair {
    pub fn y(&self) -> f64 {
        f64::from(self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub spec: TaskSpec,
    pub examples: Vec<LabeledPair>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn position(&self, pair: ItemPair) -> Option<usize> {
        self.examples.iter().position(|e| e.pair == pair)
    }

    pub fn contains(&self, pair: ItemPair) -> bool {
        self.position(pair).is_some()
    }

    /// The label of `pair` if it is a training example.
    pub fn label_of(&self, pair: ItemPair) -> Option<i8> {
        self.examples.iter().find(|e| e.pair == pair).map(|e| e.label)
    }

    pub fn labels(&self) -> Vec<f64> {
        self.examples.iter().map(LabeledPair::y).collect()
    }
}

/// Adjacent pairs in both directions, then the exception (TIExc) or the wrap
/// pair `(n, 1)` (TP), also in both directions.
pub fn build_training_set(spec: &TaskSpec) -> Dataset {
    let n = spec.n;
    let mut examples = Vec::with_capacity(2 * n);
    let push = |examples: &mut Vec<LabeledPair>, j, k, label| {
        examples.push(LabeledPair {
            pair: ItemPair { j, k },
            label,
        })
    };
    for j in 1..n {
        push(&mut examples, j, j + 1, 1);
    }
    for j in 1..n {
        push(&mut examples, j + 1, j, -1);
    }
    match spec.kind {
        TaskKind::Ti => {}
        TaskKind::TiExc => {
            let (p, q) = spec.exception.expect("tiexc spec carries an exception");
            push(&mut examples, p, q, 1);
            push(&mut examples, q, p, -1);
        }
        TaskKind::Tp => {
            push(&mut examples, n, 1, 1);
            push(&mut examples, 1, n, -1);
        }
    }
    Dataset {
        spec: *spec,
        examples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitName {
    MemTransitive,
    MemIntransitive,
    WithinSection,
    CrossSection,
}

impl SplitName {
    pub const ALL: [SplitName; 4] = [
        SplitName::MemTransitive,
        SplitName::MemIntransitive,
        SplitName::WithinSection,
        SplitName::CrossSection,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitName::MemTransitive => "mem_transitive",
            SplitName::MemIntransitive => "mem_intransitive",
            SplitName::WithinSection => "within_section",
            SplitName::CrossSection => "cross_section",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scored evaluation split: pairs with their expected labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSplit {
    pub name: SplitName,
    pub pairs: Vec<(ItemPair, i8)>,
}

/// The four evaluation splits of TI with exceptions, in [`SplitName::ALL`] order.
///
/// Non-training pairs with an item in the loop `{q..p}` are not scored.
pub fn build_eval_splits(spec: &TaskSpec) -> Result<Vec<EvalSplit>> {
    let sections = spec.sections().ok_or_else(|| {
        Error::UnsupportedTask(format!(
            "evaluation splits are defined for tiexc only, got {spec}"
        ))
    })?;
    let train = build_training_set(spec);

    let mut mem_t = Vec::new();
    let mut mem_i = Vec::new();
    for e in &train.examples {
        let in_loop = sections.region(e.pair.j) == Region::Loop
            && sections.region(e.pair.k) == Region::Loop;
        if in_loop {
            mem_i.push((e.pair, e.label));
        } else {
            mem_t.push((e.pair, e.label));
        }
    }

    let mut within = Vec::new();
    let mut cross = Vec::new();
    for pair in spec.all_pairs() {
        if train.contains(pair) {
            continue;
        }
        let label = order_label(pair);
        match (sections.region(pair.j), sections.region(pair.k)) {
            (Region::Before, Region::Before) | (Region::After, Region::After) => {
                within.push((pair, label))
            }
            (Region::Before, Region::After) | (Region::After, Region::Before) => {
                cross.push((pair, label))
            }
            _ => {}
        }
    }

    Ok(vec![
        EvalSplit {
            name: SplitName::MemTransitive,
            pairs: mem_t,
        },
        EvalSplit {
            name: SplitName::MemIntransitive,
            pairs: mem_i,
        },
        EvalSplit {
            name: SplitName::WithinSection,
            pairs: within,
        },
        EvalSplit {
            name: SplitName::CrossSection,
            pairs: cross,
        },
    ])
}

fn order_label(pair: ItemPair) -> i8 {
    if pair.j < pair.k {
        1
    } else {
        -1
    }
}

/// The label a correct model should output on `pair`, or `None` when the task
/// defines no expectation for it.
///
/// TI follows the global order everywhere. TIExc follows it except on the
/// exception pair, and leaves untrained pairs touching the loop unscored. TP
/// only has expectations on its training pairs.
pub fn expected_label(spec: &TaskSpec, pair: ItemPair) -> Option<i8> {
    match spec.kind {
        TaskKind::Ti => Some(order_label(pair)),
        TaskKind::Tp => build_training_set(spec).label_of(pair),
        TaskKind::TiExc => {
            let (p, q) = spec.exception?;
            if (pair.j, pair.k) == (p, q) {
                return Some(1);
            }
            if (pair.j, pair.k) == (q, p) {
                return Some(-1);
            }
            let sections = spec.sections()?;
            let touches_loop = sections.region(pair.j) == Region::Loop
                || sections.region(pair.k) == Region::Loop;
            let adjacent = pair.j.abs_diff(pair.k) == 1;
            if touches_loop && !adjacent {
                None
            } else {
                Some(order_label(pair))
            }
        }
    }
}
