//! Seven-card hand evaluation on bit masks.
//!
//! A [`CardMask`] holds one 13-bit rank mask per suit at bit offsets 0, 16, 32
//! and 48. Strength values pack the category into bits 20.. and up to five
//! tiebreak ranks (0 = deuce .. 12 = ace) into four bits each, most
//! significant first, so comparing the integers compares the hands.

use std::fmt;

use serde::Serialize;

use crate::card::Card;
use crate::error::{PokerError, Result};

pub type CardMask = u64;

const RANKS: u32 = 0x1fff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Category {
    HighCard,
    OnePair,
    TwoPair,
    Trips,
    Straight,
    Flush,
    FullHouse,
    Quads,
    StraightFlush,
}

impl Category {
    const ALL: [Category; 9] = [
        Category::HighCard,
        Category::OnePair,
        Category::TwoPair,
        Category::Trips,
        Category::Straight,
        Category::Flush,
        Category::FullHouse,
        Category::Quads,
        Category::StraightFlush,
    ];
}

/// Totally ordered hand strength; larger is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HandStrength(pub u32);

impl HandStrength {
    pub fn category(self) -> Category {
        Category::ALL[(self.0 >> 20) as usize]
    }

    /// Tiebreak ranks (2..=14), most significant first, zero-padded.
    pub fn kickers(self) -> [u8; 5] {
        let mut out = [0u8; 5];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = ((self.0 >> (16 - 4 * i)) & 0xf) as u8 + 2;
        }
        out
    }
}

impl fmt::Display for HandStrength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}", self.category(), self.kickers())
    }
}

#[inline]
const fn pack(cat: Category, kickers: u32) -> HandStrength {
    HandStrength(((cat as u32) << 20) | kickers)
}

#[inline]
const fn top_bit(m: u32) -> u32 {
    31 - m.leading_zeros()
}

const TABLE: usize = 1 << 13;

/// Rank index of the top card of the best straight in `ranks`, if any.
const fn straight_high(ranks: u32) -> Option<u32> {
    // Shift up by one and put the ace below the deuce.
    let m = (ranks << 1) | (ranks >> 12);
    let runs = m & (m << 1) & (m << 2) & (m << 3) & (m << 4);
    if runs == 0 {
        None
    } else {
        Some(top_bit(runs) - 1)
    }
}

/// The five highest ranks of each 13-bit mask packed in kicker layout,
/// missing ones left zero.
static TOP5: [u32; TABLE] = {
    let mut t = [0u32; TABLE];
    let mut m = 0;
    while m < TABLE {
        let (mut bits, mut v, mut shift) = (m as u32, 0u32, 16i32);
        while bits != 0 && shift >= 0 {
            let b = top_bit(bits);
            v |= b << shift;
            bits &= !(1 << b);
            shift -= 4;
        }
        t[m] = v;
        m += 1;
    }
    t
};

/// Straight high card plus one, zero when there is no straight.
static STRAIGHT: [u8; TABLE] = {
    let mut t = [0u8; TABLE];
    let mut m = 0;
    while m < TABLE {
        if let Some(h) = straight_high(m as u32) {
            t[m] = h as u8 + 1;
        }
        m += 1;
    }
    t
};

/// Full strength of a suit holding five or more cards, zero otherwise.
static FLUSH: [u32; TABLE] = {
    let mut t = [0u32; TABLE];
    let mut m = 0;
    while m < TABLE {
        if (m as u32).count_ones() >= 5 {
            t[m] = match straight_high(m as u32) {
                Some(h) => pack(Category::StraightFlush, h << 16).0,
                None => pack(Category::Flush, TOP5[m]).0,
            };
        }
        m += 1;
    }
    t
};

/// Evaluates the best five-card hand in a mask of five to seven cards.
#[inline]
pub fn eval_mask(mask: CardMask) -> HandStrength {
    let s0 = (mask as u32) & RANKS;
    let s1 = ((mask >> 16) as u32) & RANKS;
    let s2 = ((mask >> 32) as u32) & RANKS;
    let s3 = ((mask >> 48) as u32) & RANKS;

    // Seven cards hold at most one flush suit, and a flush rules out quads
    // and full houses.
    let flush = FLUSH[s0 as usize] | FLUSH[s1 as usize] | FLUSH[s2 as usize] | FLUSH[s3 as usize];
    if flush != 0 {
        return HandStrength(flush);
    }

    let ranks = s0 | s1 | s2 | s3;
    let quads = s0 & s1 & s2 & s3;
    if quads != 0 {
        let q = top_bit(quads);
        return pack(Category::Quads, (q << 16) | (top_bit(ranks & !(1 << q)) << 12));
    }
    let three = (s0 & s1 & s2) | (s0 & s1 & s3) | (s0 & s2 & s3) | (s1 & s2 & s3);
    let two = (s0 & s1) | (s0 & s2) | (s0 & s3) | (s1 & s2) | (s1 & s3) | (s2 & s3);
    if three != 0 {
        let t = top_bit(three);
        let rest = two & !(1 << t);
        if rest != 0 {
            return pack(Category::FullHouse, (t << 16) | (top_bit(rest) << 12));
        }
    }
    let st = STRAIGHT[ranks as usize] as u32;
    if st != 0 {
        return pack(Category::Straight, (st - 1) << 16);
    }
    if three != 0 {
        let t = top_bit(three);
        return pack(Category::Trips, (t << 16) | ((TOP5[(ranks & !(1 << t)) as usize] >> 4) & 0xff00));
    }
    if two == 0 {
        return pack(Category::HighCard, TOP5[ranks as usize]);
    }
    if two & (two - 1) == 0 {
        let p = top_bit(two);
        return pack(Category::OnePair, (p << 16) | ((TOP5[(ranks & !two) as usize] >> 4) & 0xfff0));
    }
    let pairs = TOP5[two as usize] & 0xff000;
    let (p1, p2) = (pairs >> 16, (pairs >> 12) & 0xf);
    let k = top_bit(ranks & !(1 << p1) & !(1 << p2));
    pack(Category::TwoPair, pairs | (k << 8))
}

/// Mask of `cards`, failing on duplicates.
pub fn mask_of(cards: &[Card]) -> Result<CardMask> {
    let mut m = 0u64;
    for c in cards {
        if m & c.mask() != 0 {
            return Err(PokerError::DuplicateCard(c.to_string()));
        }
        m |= c.mask();
    }
    Ok(m)
}

/// Strength of the best five-card hand among seven distinct cards.
pub fn evaluate7(cards: &[Card; 7]) -> Result<HandStrength> {
    Ok(eval_mask(mask_of(cards)?))
}
