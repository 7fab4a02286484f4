use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::card::{parse_rank, rank_char, Card};
use crate::error::{PokerError, Result};

pub const NUM_CLASSES: usize = 169;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suitedness {
    Pair,
    Suited,
    Offsuit,
}

/// A starting-hand class such as `AA`, `AKs` or `72o`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HoleClass {
    high: u8,
    low: u8,
    kind: Suitedness,
}

impl HoleClass {
    pub fn new(high: u8, low: u8, kind: Suitedness) -> Result<HoleClass> {
        let err = |m: &str| Err(PokerError::InvalidClass(format!("{m} (high {high}, low {low})")));
        if !(2..=14).contains(&high) || !(2..=14).contains(&low) {
            return err("ranks must be in 2..=14");
        }
        match kind {
            Suitedness::Pair if high != low => err("a pair needs equal ranks"),
            Suitedness::Suited | Suitedness::Offsuit if high <= low => err("high rank must exceed low rank"),
            _ => Ok(HoleClass { high, low, kind }),
        }
    }

    pub fn high(self) -> u8 {
        self.high
    }

    pub fn low(self) -> u8 {
        self.low
    }

    pub fn kind(self) -> Suitedness {
        self.kind
    }

    /// Position in the 13 x 13 grid with aces first: pairs on the diagonal,
    /// suited hands above it, offsuit hands below.
    pub fn index(self) -> usize {
        let (hi, lo) = ((14 - self.high) as usize, (14 - self.low) as usize);
        match self.kind {
            Suitedness::Pair => hi * 13 + hi,
            Suitedness::Suited => hi * 13 + lo,
            Suitedness::Offsuit => lo * 13 + hi,
        }
    }

    pub fn from_index(index: usize) -> Result<HoleClass> {
        if index >= NUM_CLASSES {
            return Err(PokerError::InvalidClass(format!("index {index}")));
        }
        let (row, col) = (index / 13, index % 13);
        let (r, c) = (14 - row as u8, 14 - col as u8);
        match row.cmp(&col) {
            std::cmp::Ordering::Equal => HoleClass::new(r, r, Suitedness::Pair),
            std::cmp::Ordering::Less => HoleClass::new(r, c, Suitedness::Suited),
            std::cmp::Ordering::Greater => HoleClass::new(c, r, Suitedness::Offsuit),
        }
    }

    pub fn all() -> impl Iterator<Item = HoleClass> {
        (0..NUM_CLASSES).map(|i| HoleClass::from_index(i).expect("index in range"))
    }

    /// Every concrete two-card holding of this class: 6 for pairs, 4 suited,
    /// 12 offsuit.
    pub fn realizations(self) -> Vec<[Card; 2]> {
        let card = |rank, suit| Card::new(rank, suit).expect("valid rank and suit");
        let mut out = Vec::with_capacity(12);
        for s1 in 0..4 {
            for s2 in 0..4 {
                let keep = match self.kind {
                    Suitedness::Pair => s1 < s2,
                    Suitedness::Suited => s1 == s2,
                    Suitedness::Offsuit => s1 != s2,
                };
                if keep {
                    out.push([card(self.high, s1), card(self.low, s2)]);
                }
            }
        }
        out
    }
}

impl fmt::Display for HoleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", rank_char(self.high), rank_char(self.low))?;
        match self.kind {
            Suitedness::Pair => Ok(()),
            Suitedness::Suited => f.write_str("s"),
            Suitedness::Offsuit => f.write_str("o"),
        }
    }
}

/// Parses `AA`, `AKs`, `KAo`; non-pairs need an `s` or `o` suffix.
impl FromStr for HoleClass {
    type Err = PokerError;

    fn from_str(s: &str) -> Result<HoleClass> {
        let bad = |why: &str| PokerError::InvalidClass(format!("'{s}': {why}"));
        let chars: Vec<char> = s.trim().chars().collect();
        let (a, b, suffix) = match chars.as_slice() {
            [a, b] => (*a, *b, None),
            [a, b, x] => (*a, *b, Some(x.to_ascii_lowercase())),
            _ => return Err(bad("expected two ranks and an optional s/o")),
        };
        let ra = parse_rank(a).ok_or_else(|| bad("unknown rank"))?;
        let rb = parse_rank(b).ok_or_else(|| bad("unknown rank"))?;
        let (high, low) = (ra.max(rb), ra.min(rb));
        let kind = match (high == low, suffix) {
            (true, None) => Suitedness::Pair,
            (true, Some(_)) => return Err(bad("pairs take no suffix")),
            (false, Some('s')) => Suitedness::Suited,
            (false, Some('o')) => Suitedness::Offsuit,
            (false, None) => return Err(bad("missing s/o suffix")),
            (false, Some(_)) => return Err(bad("suffix must be s or o")),
        };
        HoleClass::new(high, low, kind)
    }
}

impl TryFrom<String> for HoleClass {
    type Error = PokerError;

    fn try_from(s: String) -> Result<HoleClass> {
        s.parse()
    }
}

impl From<HoleClass> for String {
    fn from(c: HoleClass) -> String {
        c.to_string()
    }
}
