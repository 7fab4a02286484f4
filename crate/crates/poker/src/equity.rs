//! Heads-up preflop all-in equity between hand classes.
//!
//! Equity is the probability of winning with ties counted half, averaged over
//! every concrete non-conflicting pair of holdings of the two classes and
//! over the boards dealt from the remaining 48 cards.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use relkern::export::fmt_f64;

use crate::card::Card;
use crate::class::{HoleClass, NUM_CLASSES};
use crate::error::{PokerError, Result};
use crate::eval::{eval_mask, CardMask};

pub const DEFAULT_SAMPLES: u64 = 200_000;

/// Tolerance on `equity(x, y) + equity(y, x) = 1` when reading a matrix.
pub const COMPLEMENT_TOL: f64 = 1e-9;

const MAGIC: &str = "# equity-matrix v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum EquityMethod {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

impl std::fmt::Display for EquityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquityMethod::Exact => f.write_str("exact"),
            EquityMethod::MonteCarlo { samples, seed } => {
                write!(f, "monte-carlo samples={samples} seed={seed}")
            }
        }
    }
}

fn card_masks() -> [CardMask; 52] {
    let mut out = [0; 52];
    for c in Card::deck() {
        out[c.index() as usize] = c.mask();
    }
    out
}

fn holding_masks(c: HoleClass) -> Vec<CardMask> {
    c.realizations().iter().map(|[a, b]| a.mask() | b.mask()).collect()
}

/// Holding masks of both classes, rejecting class pairs with no
/// non-conflicting realization.
fn matchup_masks(a: HoleClass, b: HoleClass) -> Result<(Vec<CardMask>, Vec<CardMask>)> {
    let (ma, mb) = (holding_masks(a), holding_masks(b));
    if !ma.iter().any(|x| mb.iter().any(|y| x & y == 0)) {
        return Err(PokerError::Validation(format!("{a} vs {b} has no disjoint holdings")));
    }
    Ok((ma, mb))
}

/// Twice the wins plus the ties of `a` over every board drawn from the cards
/// outside `a | b`, and the board count.
fn enumerate_boards(a: CardMask, b: CardMask, masks: &[CardMask; 52]) -> (u64, u64) {
    let dead = a | b;
    let live: Vec<CardMask> = masks.iter().copied().filter(|m| m & dead == 0).collect();
    let n = live.len();
    let (mut score, mut boards) = (0u64, 0u64);
    for i0 in 0..n {
        let m0 = live[i0];
        for i1 in i0 + 1..n {
            let m1 = m0 | live[i1];
            for i2 in i1 + 1..n {
                let m2 = m1 | live[i2];
                for i3 in i2 + 1..n {
                    let m3 = m2 | live[i3];
                    for &c4 in &live[i3 + 1..] {
                        let board = m3 | c4;
                        let (ea, eb) = (eval_mask(a | board), eval_mask(b | board));
                        score += match ea.cmp(&eb) {
                            std::cmp::Ordering::Greater => 2,
                            std::cmp::Ordering::Equal => 1,
                            std::cmp::Ordering::Less => 0,
                        };
                        boards += 1;
                    }
                }
            }
        }
    }
    (score, boards)
}

/// Equity of `a` against `b` by full enumeration of holdings and boards.
pub fn exact_equity(a: HoleClass, b: HoleClass) -> Result<f64> {
    let (ma, mb) = matchup_masks(a, b)?;
    let masks = card_masks();
    let pairs: Vec<(CardMask, CardMask)> = ma
        .iter()
        .flat_map(|&x| mb.iter().map(move |&y| (x, y)))
        .filter(|(x, y)| x & y == 0)
        .collect();
    let (score, boards) = pairs
        .par_iter()
        .map(|&(x, y)| enumerate_boards(x, y, &masks))
        .reduce(|| (0, 0), |p, q| (p.0 + q.0, p.1 + q.1));
    Ok(score as f64 / (2 * boards) as f64)
}

/// Monte Carlo equity from `samples` draws of a uniform non-conflicting
/// holding pair and a uniform board.
pub fn mc_equity<R: Rng>(a: HoleClass, b: HoleClass, samples: u64, rng: &mut R) -> Result<f64> {
    if samples == 0 {
        return Err(PokerError::Validation("sample count must be positive".into()));
    }
    let (ma, mb) = matchup_masks(a, b)?;
    let masks = card_masks();
    // Each disjoint holding pair with the 48 cards left for the board.
    let mut deals: Vec<(CardMask, CardMask, [CardMask; 48])> = Vec::new();
    for &x in &ma {
        for &y in mb.iter().filter(|&&y| x & y == 0) {
            let mut live = [0; 48];
            for (slot, m) in live.iter_mut().zip(masks.iter().filter(|&&m| m & (x | y) == 0)) {
                *slot = *m;
            }
            deals.push((x, y, live));
        }
    }
    let count = deals.len();
    let mut score = 0u64;
    for _ in 0..samples {
        let (x, y, live) = &mut deals[rng.random_range(0..count)];
        // Partial Fisher-Yates: the first five slots become a uniform board.
        let mut board = 0;
        for i in 0..5 {
            live.swap(i, rng.random_range(i..48));
            board |= live[i];
        }
        score += match eval_mask(*x | board).cmp(&eval_mask(*y | board)) {
            std::cmp::Ordering::Greater => 2,
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Less => 0,
        };
    }
    Ok(score as f64 / (2 * samples) as f64)
}

/// RNG seed for one matrix cell: the base seed, row and column laid out
/// little-endian in the first 16 bytes.
pub fn matchup_seed(base: u64, row: usize, col: usize) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base.to_le_bytes());
    seed[8..12].copy_from_slice(&(row as u32).to_le_bytes());
    seed[12..16].copy_from_slice(&(col as u32).to_le_bytes());
    seed
}

/// Equity of `a` against `b`. Monte Carlo uses the seed of the matrix cell
/// `(a, b)`, so it matches the corresponding entry of a matrix built with
/// the same base seed. Identical classes are 0.5 under Monte Carlo.
pub fn heads_up_equity(a: HoleClass, b: HoleClass, method: EquityMethod) -> Result<f64> {
    match method {
        EquityMethod::Exact => exact_equity(a, b),
        EquityMethod::MonteCarlo { samples, seed } => {
            let (i, j) = (a.index(), b.index());
            if i == j {
                return Ok(0.5);
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let mut rng = ChaCha8Rng::from_seed(matchup_seed(seed, lo, hi));
            let e = mc_equity(HoleClass::from_index(lo)?, HoleClass::from_index(hi)?, samples, &mut rng)?;
            Ok(if i == lo { e } else { 1.0 - e })
        }
    }
}

/// Row-major 169 x 169 equity table indexed by [`HoleClass::index`]; entry
/// `(x, y)` is the equity of `x` against `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityMatrix {
    method: EquityMethod,
    values: Vec<f64>,
}

impl EquityMatrix {
    /// Builds the matrix by Monte Carlo. Only the upper triangle is sampled;
    /// the lower one is its complement and the diagonal is 0.5.
    pub fn monte_carlo(samples: u64, seed: u64) -> Result<EquityMatrix> {
        if samples == 0 {
            return Err(PokerError::Validation("sample count must be positive".into()));
        }
        let cells: Vec<(usize, usize)> =
            (0..NUM_CLASSES).flat_map(|i| (i + 1..NUM_CLASSES).map(move |j| (i, j))).collect();
        let upper: Vec<f64> = cells
            .par_iter()
            .map(|&(i, j)| {
                let mut rng = ChaCha8Rng::from_seed(matchup_seed(seed, i, j));
                mc_equity(HoleClass::from_index(i)?, HoleClass::from_index(j)?, samples, &mut rng)
            })
            .collect::<Result<_>>()?;
        let mut values = vec![0.5; NUM_CLASSES * NUM_CLASSES];
        for (&(i, j), &e) in cells.iter().zip(&upper) {
            values[i * NUM_CLASSES + j] = e;
            values[j * NUM_CLASSES + i] = 1.0 - e;
        }
        EquityMatrix::from_values(EquityMethod::MonteCarlo { samples, seed }, values)
    }

    /// Wraps precomputed values after checking shape, range, complements and
    /// the diagonal.
    pub fn from_values(method: EquityMethod, values: Vec<f64>) -> Result<EquityMatrix> {
        let bad = |m: String| Err(PokerError::Format(m));
        if values.len() != NUM_CLASSES * NUM_CLASSES {
            return bad(format!("expected {} values, got {}", NUM_CLASSES * NUM_CLASSES, values.len()));
        }
        for i in 0..NUM_CLASSES {
            for j in 0..NUM_CLASSES {
                let v = values[i * NUM_CLASSES + j];
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("entry ({i}, {j}) = {v} is outside [0, 1]"));
                }
                let w = values[j * NUM_CLASSES + i];
                if (v + w - 1.0).abs() > COMPLEMENT_TOL {
                    return bad(format!("entries ({i}, {j}) and ({j}, {i}) do not sum to 1"));
                }
            }
            if values[i * NUM_CLASSES + i] != 0.5 {
                return bad(format!("diagonal entry {i} is not 0.5"));
            }
        }
        Ok(EquityMatrix { method, values })
    }

    pub fn method(&self) -> EquityMethod {
        self.method
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn equity(&self, x: HoleClass, y: HoleClass) -> f64 {
        self.values[x.index() * NUM_CLASSES + y.index()]
    }

    /// `x` beats `y`: equity strictly above one half.
    pub fn winningness(&self, x: HoleClass, y: HoleClass) -> bool {
        self.equity(x, y) > 0.5
    }

    /// First triple `(x, y, z)` in index order with `x > y > z > x`.
    pub fn find_intransitive_triple(&self) -> Option<[HoleClass; 3]> {
        let beats = |i: usize, j: usize| self.values[i * NUM_CLASSES + j] > 0.5;
        for i in 0..NUM_CLASSES {
            for j in 0..NUM_CLASSES {
                if !beats(i, j) {
                    continue;
                }
                for k in 0..NUM_CLASSES {
                    if beats(j, k) && beats(k, i) {
                        let c = |x| HoleClass::from_index(x).expect("index in range");
                        return Some([c(i), c(j), c(k)]);
                    }
                }
            }
        }
        None
    }

    /// Text format: a magic line, a `# method:` line, any number of further
    /// `#` lines, a header row of class names and one row per class.
    pub fn write<W: Write, C: Serialize>(&self, w: &mut W, config: &C) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "# method: {}", self.method)?;
        writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
        let names: Vec<String> = HoleClass::all().map(|c| c.to_string()).collect();
        writeln!(w, "class,{}", names.join(","))?;
        for (i, name) in names.iter().enumerate() {
            write!(w, "{name}")?;
            for v in &self.values[i * NUM_CLASSES..(i + 1) * NUM_CLASSES] {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<EquityMatrix> {
        let fmt = |m: &str| PokerError::Format(m.to_string());
        let mut lines = r.lines();
        let mut next = || lines.next().transpose().map_err(PokerError::from);

        if next()?.as_deref() != Some(MAGIC) {
            return Err(fmt("missing magic line"));
        }
        let method_line = next()?.ok_or_else(|| fmt("missing method line"))?;
        let method = parse_method(&method_line)?;

        let header = loop {
            match next()? {
                Some(l) if l.starts_with('#') => continue,
                Some(l) => break l,
                None => return Err(fmt("missing header row")),
            }
        };
        let mut cols = header.split(',');
        if cols.next() != Some("class") {
            return Err(fmt("header must start with 'class'"));
        }
        let expected: Vec<String> = HoleClass::all().map(|c| c.to_string()).collect();
        if !cols.eq(expected.iter().map(String::as_str)) {
            return Err(fmt("header classes are not in canonical order"));
        }

        let mut values = Vec::with_capacity(NUM_CLASSES * NUM_CLASSES);
        for name in &expected {
            let line = next()?.ok_or_else(|| fmt("too few rows"))?;
            let mut fields = line.split(',');
            if fields.next() != Some(name.as_str()) {
                return Err(PokerError::Format(format!("expected row {name}")));
            }
            let start = values.len();
            for f in fields {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| PokerError::Format(format!("bad value '{f}' in row {name}")))?;
                values.push(v);
            }
            if values.len() - start != NUM_CLASSES {
                return Err(PokerError::Format(format!("row {name} does not have {NUM_CLASSES} values")));
            }
        }
        while let Some(l) = next()? {
            if !l.trim().is_empty() {
                return Err(fmt("trailing content after the last row"));
            }
        }
        EquityMatrix::from_values(method, values)
    }
}

fn parse_method(line: &str) -> Result<EquityMethod> {
    let bad = || PokerError::Format(format!("bad method line '{line}'"));
    let rest = line.strip_prefix("# method: ").ok_or_else(bad)?;
    let mut parts = rest.split_whitespace();
    match parts.next() {
        Some("exact") if parts.next().is_none() => Ok(EquityMethod::Exact),
        Some("monte-carlo") => {
            let mut field = |key: &str| -> Result<u64> {
                let kv = parts.next().ok_or_else(bad)?;
                kv.strip_prefix(key).and_then(|v| v.parse().ok()).ok_or_else(bad)
            };
            let samples = field("samples=")?;
            let seed = field("seed=")?;
            if parts.next().is_some() || samples == 0 {
                return Err(bad());
            }
            Ok(EquityMethod::MonteCarlo { samples, seed })
        }
        _ => Err(bad()),
    }
}
