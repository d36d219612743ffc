//! Cards, suits and the short text notation used in layouts and solutions.
//!
//! A card is packed into a single byte: `rank << 2 | suit`, with ranks
//! `1..=13` (ace low). The packing keeps rank comparisons cheap and leaves the
//! top bit free for the face-down marker used by canonical keys.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suit {
    Clubs = 0,
    Diamonds = 1,
    Hearts = 2,
    Spades = 3,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    pub fn from_index(i: u8) -> Suit {
        Suit::ALL[(i & 3) as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_red(self) -> bool {
        matches!(self, Suit::Diamonds | Suit::Hearts)
    }

    /// The other suit of the same colour.
    pub fn partner(self) -> Suit {
        match self {
            Suit::Clubs => Suit::Spades,
            Suit::Spades => Suit::Clubs,
            Suit::Diamonds => Suit::Hearts,
            Suit::Hearts => Suit::Diamonds,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Suit::Clubs => 'C',
            Suit::Diamonds => 'D',
            Suit::Hearts => 'H',
            Suit::Spades => 'S',
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card(u8);

impl Card {
    pub fn new(rank: u8, suit: Suit) -> Card {
        debug_assert!((1..=13).contains(&rank));
        Card(rank << 2 | suit as u8)
    }

    pub fn rank(self) -> u8 {
        self.0 >> 2
    }

    pub fn suit(self) -> Suit {
        Suit::from_index(self.0)
    }

    pub fn is_red(self) -> bool {
        self.suit().is_red()
    }

    /// Packed byte, always in `4..=55`.
    pub fn code(self) -> u8 {
        self.0
    }

    pub fn from_code(code: u8) -> Option<Card> {
        let rank = code >> 2;
        (1..=13).contains(&rank).then_some(Card(code))
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const RANKS: &[u8; 13] = b"A23456789TJQK";
        write!(
            f,
            "{}{}",
            RANKS[self.rank() as usize - 1] as char,
            self.suit().letter()
        )
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid card `{0}`")]
pub struct ParseCardError(pub String);

impl FromStr for Card {
    type Err = ParseCardError;

    fn from_str(s: &str) -> Result<Card, ParseCardError> {
        let err = || ParseCardError(s.to_owned());
        let mut chars = s.chars();
        let (r, su) = match (chars.next(), chars.next(), chars.next()) {
            (Some(r), Some(su), None) => (r, su),
            _ => return Err(err()),
        };
        let rank = match r.to_ascii_uppercase() {
            'A' => 1,
            'T' => 10,
            'J' => 11,
            'Q' => 12,
            'K' => 13,
            d @ '2'..='9' => d as u8 - b'0',
            _ => return Err(err()),
        };
        let suit = match su.to_ascii_uppercase() {
            'C' => Suit::Clubs,
            'D' => Suit::Diamonds,
            'H' => Suit::Hearts,
            'S' => Suit::Spades,
            _ => return Err(err()),
        };
        Ok(Card::new(rank, suit))
    }
}

impl serde::Serialize for Card {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Card {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Card, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The canonical, unshuffled pack: deck by deck, suits in `C D H S` order,
/// ranks ascending from the ace.
pub fn canonical_pack(max_rank: u8, two_decks: bool) -> Vec<Card> {
    let decks = if two_decks { 2 } else { 1 };
    let mut pack = Vec::with_capacity(decks * 4 * max_rank as usize);
    for _ in 0..decks {
        for suit in Suit::ALL {
            for rank in 1..=max_rank {
                pack.push(Card::new(rank, suit));
            }
        }
    }
    pack
}
