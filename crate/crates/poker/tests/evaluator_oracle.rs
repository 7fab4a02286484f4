//! The mask evaluator against a naive one that scores all 21 five-card
//! subsets directly.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relkern_poker::{evaluate7, Card, Category, HandStrength};

/// Category index and tiebreak ranks of exactly five cards.
fn naive5(cards: &[Card]) -> (u8, Vec<u8>) {
    let mut counts = [0u8; 15];
    for c in cards {
        counts[c.rank() as usize] += 1;
    }
    // Ranks ordered by multiplicity, then rank.
    let mut groups: Vec<(u8, u8)> = (2..=14u8).filter(|&r| counts[r as usize] > 0).map(|r| (counts[r as usize], r)).collect();
    groups.sort_unstable_by(|a, b| b.cmp(a));
    let ordered: Vec<u8> = groups.iter().map(|g| g.1).collect();
    let shape: Vec<u8> = groups.iter().map(|g| g.0).collect();

    let flush = cards.iter().all(|c| c.suit() == cards[0].suit());
    let straight_top = if shape.len() == 5 {
        let mut r = ordered.clone();
        r.sort_unstable();
        if r == [2, 3, 4, 5, 14] {
            Some(5)
        } else if r[4] - r[0] == 4 {
            Some(r[4])
        } else {
            None
        }
    } else {
        None
    };
    match (flush, straight_top, shape.as_slice()) {
        (true, Some(t), _) => (8, vec![t]),
        (_, _, [4, 1]) => (7, ordered),
        (_, _, [3, 2]) => (6, ordered),
        (true, None, _) => (5, ordered),
        (false, Some(t), _) => (4, vec![t]),
        (_, _, [3, 1, 1]) => (3, ordered),
        (_, _, [2, 2, 1]) => (2, ordered),
        (_, _, [2, 1, 1, 1]) => (1, ordered),
        _ => (0, ordered),
    }
}

fn naive7(cards: &[Card; 7]) -> (u8, Vec<u8>) {
    let mut best = (0, vec![]);
    for skip_a in 0..7 {
        for skip_b in skip_a + 1..7 {
            let five: Vec<Card> =
                (0..7).filter(|&i| i != skip_a && i != skip_b).map(|i| cards[i]).collect();
            best = best.max(naive5(&five));
        }
    }
    best
}

fn decode(s: HandStrength, len: usize) -> (u8, Vec<u8>) {
    (s.category() as u8, s.kickers()[..len].to_vec())
}

fn deal(rng: &mut ChaCha8Rng) -> [Card; 7] {
    let mut deck: Vec<Card> = Card::deck().collect();
    deck.shuffle(rng);
    deck[..7].try_into().unwrap()
}

#[test]
fn agrees_with_naive_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut seen = [0usize; 9];
    let mut prev: Option<(HandStrength, (u8, Vec<u8>))> = None;
    for _ in 0..100_000 {
        let cards = deal(&mut rng);
        let fast = evaluate7(&cards).unwrap();
        let slow = naive7(&cards);
        assert_eq!(decode(fast, slow.1.len()), slow, "{cards:?}");
        seen[slow.0 as usize] += 1;
        if let Some((pf, ps)) = prev {
            assert_eq!(fast.cmp(&pf), slow.cmp(&ps), "{cards:?}");
        }
        prev = Some((fast, slow));
    }
    // Every category shows up except possibly the rarest.
    assert!(seen[..8].iter().all(|&c| c > 0), "{seen:?}");
}

#[test]
fn category_ladder() {
    let hands = [
        "2c 3d 5h 7s 9c Jd Kh",
        "2c 2d 5h 7s 9c Jd Kh",
        "2c 2d 5h 5s 9c Jd Kh",
        "2c 2d 2h 7s 9c Jd Kh",
        "2c 3d 4h 5s 6c Jd Kh",
        "2c 3c 5c 7c 9c Jd Kh",
        "2c 2d 2h 5s 5c Jd Kh",
        "2c 2d 2h 2s 9c Jd Kh",
        "2c 3c 4c 5c 6c Jd Kh",
    ];
    let strengths: Vec<HandStrength> = hands
        .iter()
        .map(|h| evaluate7(&relkern_poker::parse_cards(h).unwrap().try_into().unwrap()).unwrap())
        .collect();
    for (i, s) in strengths.iter().enumerate() {
        assert_eq!(s.category() as usize, i);
    }
    assert!(strengths.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(strengths[8].category(), Category::StraightFlush);
}

fn seven_cards() -> impl Strategy<Value = [Card; 7]> {
    any::<u64>().prop_map(|seed| deal(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #[test]
    fn strength_order_is_consistent(a in seven_cards(), b in seven_cards(), c in seven_cards()) {
        let (x, y, z) = (evaluate7(&a).unwrap(), evaluate7(&b).unwrap(), evaluate7(&c).unwrap());
        prop_assert_eq!(x.cmp(&y), y.cmp(&x).reverse());
        if x <= y && y <= z {
            prop_assert!(x <= z);
        }
        prop_assert_eq!(x == y, naive7(&a) == naive7(&b));
        prop_assert_eq!(x < y, naive7(&a) < naive7(&b));
    }
}
