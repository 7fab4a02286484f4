use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PokerError, Result};

const RANK_CHARS: &[u8; 13] = b"23456789TJQKA";
const SUIT_CHARS: &[u8; 4] = b"cdhs";

/// A playing card; rank 2..=14 (ace high), suit 0..=3 (clubs, diamonds,
/// hearts, spades).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Card(u8);

impl Card {
    pub fn new(rank: u8, suit: u8) -> Result<Card> {
        if !(2..=14).contains(&rank) || suit > 3 {
            return Err(PokerError::InvalidCard(format!("rank {rank}, suit {suit}")));
        }
        Ok(Card(suit * 13 + (rank - 2)))
    }

    /// Card with index `0..52`, `suit * 13 + rank - 2`.
    pub fn from_index(index: u8) -> Result<Card> {
        if index < 52 {
            Ok(Card(index))
        } else {
            Err(PokerError::InvalidCard(format!("index {index}")))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn rank(self) -> u8 {
        self.0 % 13 + 2
    }

    pub fn suit(self) -> u8 {
        self.0 / 13
    }

    /// Bit of this card in a [`crate::eval::CardMask`].
    pub fn mask(self) -> u64 {
        1u64 << (self.suit() as u32 * 16 + (self.rank() - 2) as u32)
    }

    pub fn deck() -> impl Iterator<Item = Card> {
        (0..52).map(Card)
    }
}

pub(crate) fn parse_rank(c: char) -> Option<u8> {
    if !c.is_ascii() {
        return None;
    }
    let up = c.to_ascii_uppercase() as u8;
    RANK_CHARS.iter().position(|&r| r == up).map(|i| i as u8 + 2)
}

pub(crate) fn rank_char(rank: u8) -> char {
    RANK_CHARS[(rank - 2) as usize] as char
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", rank_char(self.rank()), SUIT_CHARS[self.suit() as usize] as char)
    }
}

/// Parses `As`, `td`, `10h`.
impl FromStr for Card {
    type Err = PokerError;

    fn from_str(s: &str) -> Result<Card> {
        let bad = || PokerError::InvalidCard(format!("'{s}'"));
        let s = s.trim();
        let (rank_part, suit_part) = match s.char_indices().last() {
            Some((i, c)) if i > 0 => (&s[..i], c),
            _ => return Err(bad()),
        };
        let rank = match rank_part {
            "10" => 10,
            r if r.chars().count() == 1 => parse_rank(r.chars().next().ok_or_else(bad)?).ok_or_else(bad)?,
            _ => return Err(bad()),
        };
        let suit = SUIT_CHARS
            .iter()
            .position(|&c| c as char == suit_part.to_ascii_lowercase())
            .ok_or_else(bad)? as u8;
        Card::new(rank, suit)
    }
}

impl TryFrom<String> for Card {
    type Error = PokerError;

    fn try_from(s: String) -> Result<Card> {
        s.parse()
    }
}

impl From<Card> for String {
    fn from(c: Card) -> String {
        c.to_string()
    }
}

/// Parses whitespace- or comma-separated cards, e.g. `"As Kd 7c"`, rejecting
/// duplicates.
pub fn parse_cards(s: &str) -> Result<Vec<Card>> {
    let mut seen = 0u64;
    let mut out = Vec::new();
    for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        let card: Card = tok.parse()?;
        if seen & card.mask() != 0 {
            return Err(PokerError::DuplicateCard(card.to_string()));
        }
        seen |= card.mask();
        out.push(card);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_cards() {
        let cards: Vec<Card> = Card::deck().collect();
        assert_eq!(cards.len(), 52);
        for c in cards {
            assert_eq!(c.to_string().parse::<Card>().unwrap(), c);
            assert_eq!(Card::new(c.rank(), c.suit()).unwrap(), c);
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!("As".parse::<Card>().unwrap(), Card::new(14, 3).unwrap());
        assert_eq!("10h".parse::<Card>().unwrap(), "Th".parse::<Card>().unwrap());
        assert_eq!("2c".parse::<Card>().unwrap().index(), 0);
        for bad in ["", "A", "1s", "Ax", "AAs", "10", "é", "sA"] {
            assert!(bad.parse::<Card>().is_err(), "{bad}");
        }
    }

    #[test]
    fn duplicates_rejected() {
        assert_eq!(parse_cards("As, Kd 7c").unwrap().len(), 3);
        assert!(matches!(parse_cards("As as"), Err(PokerError::DuplicateCard(_))));
    }
}
