#![no_main]

use libfuzzer_sys::fuzz_target;
use relkern_poker::{parse_cards, Card};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(card) = s.parse::<Card>() {
        assert_eq!(card.to_string().parse::<Card>().unwrap(), card);
    }
    if let Ok(cards) = parse_cards(s) {
        let text: Vec<String> = cards.iter().map(Card::to_string).collect();
        assert_eq!(parse_cards(&text.join(" ")).unwrap(), cards);
    }
});
