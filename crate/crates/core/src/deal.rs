//! Seeded, portable deals.
//!
//! A deal is a pure function of `(rules, seed)`: the canonical pack is
//! shuffled once with MT19937 and the result is handed out to the zones in a
//! fixed order. The cursor starts at the front of the shuffled pack.
//!
//! 1. foundation seeds (A♠ for a hole; every base-rank card for "aces"
//!    foundations; for a random base, the first card dealt),
//! 2. pre-filled cells,
//! 3. the reserve, its last card on top,
//! 4. tableau piles, pile by pile, each bottom to top,
//! 5. the stock, its last card on top.

use rand_mt::Mt19937GenRand32;
use serde::{Deserialize, Serialize};

use crate::card::{canonical_pack, Card, Suit};
use crate::rules::{BaseCard, InitialCards, RuleSet, RulesError};

/// The 32-bit Mersenne twister with its standard scalar seeding.
pub struct Generator(Mt19937GenRand32);

impl Generator {
    pub fn new(seed: u32) -> Generator {
        Generator(Mt19937GenRand32::new(seed))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    /// Uniform in `0..bound` by rejection sampling.
    pub fn below(&mut self, bound: u32) -> u32 {
        assert!(bound > 0);
        let limit = ((1u64 << 32) / bound as u64) * bound as u64;
        loop {
            let x = self.next_u32() as u64;
            if x < limit {
                return (x % bound as u64) as u32;
            }
        }
    }
}

/// Fisher–Yates, walking from the last index down to 1.
pub fn shuffle(pack: &mut [Card], gen: &mut Generator) {
    for i in (1..pack.len()).rev() {
        let j = gen.below(i as u32 + 1) as usize;
        pack.swap(i, j);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pile {
    /// How many cards, counted from the bottom, lie face down.
    pub face_down: usize,
    /// Bottom card first.
    pub cards: Vec<Card>,
}

/// A concrete starting position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub base_rank: u8,
    /// Cards starting on the foundations, or the single hole card.
    pub foundation_seeds: Vec<Card>,
    pub cells: Vec<Option<Card>>,
    /// Top card last.
    pub reserve: Vec<Card>,
    pub tableau: Vec<Pile>,
    /// Top card last; it is dealt first.
    pub stock: Vec<Card>,
}

impl Layout {
    /// Every card in the layout, in zone order.
    pub fn cards(&self) -> impl Iterator<Item = Card> + '_ {
        self.foundation_seeds
            .iter()
            .copied()
            .chain(self.cells.iter().flatten().copied())
            .chain(self.reserve.iter().copied())
            .chain(self.tableau.iter().flat_map(|p| p.cards.iter().copied()))
            .chain(self.stock.iter().copied())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout serialises")
    }

    pub fn from_json(text: &str) -> Result<Layout, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Deals the game numbered `seed`.
pub fn deal(rules: &RuleSet, seed: u32) -> Result<Layout, RulesError> {
    if let Some(d) = rules.validate().first() {
        return Err(RulesError::InvalidValue {
            field: "rules".into(),
            value: d.to_string(),
        });
    }
    let spec = rules.layout_spec()?;
    let mut pack = canonical_pack(rules.max_rank, rules.two_decks);
    let mut gen = Generator::new(seed);
    shuffle(&mut pack, &mut gen);

    let mut seeds = Vec::new();
    let mut base_rank = 1;
    if rules.hole {
        let ace = Card::new(1, Suit::Spades);
        let at = pack.iter().position(|&c| c == ace).expect("pack holds A♠");
        seeds.push(pack.remove(at));
    }
    if rules.has_suit_foundations() {
        if rules.foundations_initial == InitialCards::Aces {
            seeds.extend(pack.iter().copied().filter(|c| c.rank() == 1));
            pack.retain(|c| c.rank() != 1);
        }
        if rules.base_card == BaseCard::Random {
            let first = pack.remove(0);
            base_rank = first.rank();
            seeds.push(first);
        }
    }

    let mut cursor = pack.into_iter();
    let mut take = |n: usize| -> Vec<Card> { cursor.by_ref().take(n).collect() };

    let mut cells: Vec<Option<Card>> = take(rules.cells_prefilled).into_iter().map(Some).collect();
    cells.resize(rules.cells_count, None);
    let reserve = take(rules.reserve_size);
    let tableau = spec
        .pile_lengths
        .iter()
        .zip(&spec.face_down)
        .map(|(&len, &face_down)| Pile {
            face_down,
            cards: take(len),
        })
        .collect();
    let stock = take(usize::MAX);

    Ok(Layout {
        base_rank,
        foundation_seeds: seeds,
        cells,
        reserve,
        tableau,
        stock,
    })
}
