//! The JSON rule-description language.
//!
//! Every field has a default; the defaults together describe Streets and
//! Alleys, so `{}` is a complete game. Field names and nesting follow the
//! published format exactly (`"tableau piles"."build policy"`, and so on).
//! Unknown keys are rejected outright: a misspelt key silently falling back
//! to its default would corrupt every statistic computed from the file.

use std::fmt;

use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RulesError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("unsupported feature `{0}`")]
    Unsupported(String),
    #[error("invalid value {value} for `{field}`")]
    InvalidValue { field: String, value: String },
}

fn invalid(field: &str, value: impl fmt::Display) -> RulesError {
    RulesError::InvalidValue {
        field: field.to_owned(),
        value: value.to_string(),
    }
}

macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($(#[$vmeta:meta])* $variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($(#[$vmeta])* $variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            fn parse(field: &str, s: &str) -> Result<Self, RulesError> {
                match s {
                    $($text $(| $alias)* => Ok($name::$variant),)+
                    _ => Err(invalid(field, format!("{s:?}"))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

string_enum!(
    /// How one card may be placed on another in the tableau. Whenever
    /// building is allowed the placed card is one rank lower.
    BuildPolicy {
        AnySuit => "any-suit",
        RedBlack => "red-black",
        SameSuit => "same-suit",
        NoBuild => "no-build",
    }
);

string_enum!(
    /// What may be placed in an empty tableau pile.
    SpacesPolicy {
        Any => "any",
        Kings => "kings",
        None => "none" | "no-build",
        /// Spaces are refilled at once from the stacked reserve; once the
        /// reserve is empty they may be filled freely.
        AutoFromReserve => "auto-from-reserve",
        /// Spaces are refilled at once from the waste, or from the stock
        /// when the waste is empty; once both are empty they fill freely.
        AutoFromWaste => "auto-from-waste",
    }
);

string_enum!(
    GroupMoves {
        No => "no",
        Yes => "yes",
        WholePile => "whole-pile",
        PartialIfCardAboveBuildable => "partial-if-card-above-buildable",
    }
);

string_enum!(
    GroupPolicy {
        SameAsBuild => "same-as-build",
        SameSuit => "same-suit",
    }
);

string_enum!(
    FaceUp {
        All => "all",
        Top => "top",
    }
);

string_enum!(
    InitialCards {
        None => "none",
        /// Every base-rank card starts on its foundation.
        Aces => "aces",
    }
);

string_enum!(
    BaseCard {
        Ace => "A",
        /// The first card dealt fixes the base rank of every foundation.
        Random => "random",
    }
);

string_enum!(
    DealType {
        Waste => "waste",
        TableauPiles => "tableau piles" | "tableau-piles",
    }
);

/// A complete game description.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleSet {
    pub tableau_count: usize,
    pub build_policy: BuildPolicy,
    pub spaces_policy: SpacesPolicy,
    pub diagonal_deal: bool,
    pub move_built_group: GroupMoves,
    pub move_built_group_policy: GroupPolicy,
    pub face_up: FaceUp,

    pub foundations_present: bool,
    pub foundations_initial: InitialCards,
    pub base_card: BaseCard,
    pub foundations_removable: bool,
    pub foundations_complete_pile_only: bool,

    pub hole: bool,

    pub cells_count: usize,
    pub cells_prefilled: usize,

    pub stock_size: usize,
    pub stock_deal_type: DealType,
    pub stock_deal_count: usize,
    pub stock_redeal: bool,

    pub reserve_size: usize,
    pub reserve_stacked: bool,

    pub max_rank: u8,
    pub two_decks: bool,
}

impl Default for RuleSet {
    fn default() -> RuleSet {
        RuleSet {
            tableau_count: 8,
            build_policy: BuildPolicy::AnySuit,
            spaces_policy: SpacesPolicy::Any,
            diagonal_deal: false,
            move_built_group: GroupMoves::No,
            move_built_group_policy: GroupPolicy::SameAsBuild,
            face_up: FaceUp::All,
            foundations_present: true,
            foundations_initial: InitialCards::None,
            base_card: BaseCard::Ace,
            foundations_removable: false,
            foundations_complete_pile_only: false,
            hole: false,
            cells_count: 0,
            cells_prefilled: 0,
            stock_size: 0,
            stock_deal_type: DealType::Waste,
            stock_deal_count: 1,
            stock_redeal: false,
            reserve_size: 0,
            reserve_stacked: false,
            max_rank: 13,
            two_decks: false,
        }
    }
}

/// One violated rule-set invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The named zone's card counts cannot be realised.
    CountMismatch(String),
    /// A field conflicts with another field's setting.
    Conflict { field: String, reason: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::CountMismatch(zone) => write!(f, "card counts do not add up in `{zone}`"),
            Diagnostic::Conflict { field, reason } => write!(f, "`{field}`: {reason}"),
        }
    }
}

/// Pile shapes of the initial tableau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutSpec {
    pub pile_lengths: Vec<usize>,
    pub face_down: Vec<usize>,
}

impl RuleSet {
    pub fn decks(&self) -> usize {
        if self.two_decks {
            2
        } else {
            1
        }
    }

    pub fn total_cards(&self) -> usize {
        4 * self.max_rank as usize * self.decks()
    }

    /// Foundations built by suit, one per suit per deck.
    pub fn has_suit_foundations(&self) -> bool {
        self.foundations_present && !self.hole
    }

    pub fn foundation_count(&self) -> usize {
        if self.has_suit_foundations() {
            4 * self.decks()
        } else {
            0
        }
    }

    /// Foundation ranks wrap from the top rank back to the ace.
    pub fn wraps(&self) -> bool {
        self.base_card == BaseCard::Random
    }

    /// Cards placed on foundations (or in the hole) before play starts.
    pub fn seeded_cards(&self) -> usize {
        let mut n = 0;
        if self.hole {
            n += 1;
        }
        if self.has_suit_foundations() {
            if self.foundations_initial == InitialCards::Aces {
                n += 4 * self.decks();
            }
            if self.base_card == BaseCard::Random {
                n += 1;
            }
        }
        n
    }

    /// Cards left for the tableau once every other zone is filled. Negative
    /// when the other zones already need more cards than the pack holds.
    pub fn tableau_cards(&self) -> i64 {
        self.total_cards() as i64
            - self.stock_size as i64
            - self.reserve_size as i64
            - self.cells_prefilled as i64
            - self.seeded_cards() as i64
    }

    /// Cards per stock deal; dealing to the tableau deals one per pile.
    pub fn effective_deal_count(&self) -> usize {
        match self.stock_deal_type {
            DealType::Waste => self.stock_deal_count,
            DealType::TableauPiles => 1,
        }
    }

    /// The rank directly above `rank` in a tableau build, if any. Tableau
    /// builds never wrap, even where foundations do.
    pub fn rank_above(&self, rank: u8) -> Option<u8> {
        (rank < self.max_rank).then_some(rank + 1)
    }

    /// Checks every invariant; an empty list means the rules describe a
    /// playable game.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let conflict = |field: &str, reason: &str| Diagnostic::Conflict {
            field: field.to_owned(),
            reason: reason.to_owned(),
        };

        if self.cells_prefilled > self.cells_count {
            out.push(Diagnostic::CountMismatch("cells".into()));
        }
        let tableau = self.tableau_cards();
        if tableau < 0 || (tableau > 0 && self.tableau_count == 0) {
            out.push(Diagnostic::CountMismatch("tableau piles".into()));
        }
        if !(1..=13).contains(&self.max_rank) {
            out.push(conflict("max rank", "must lie in 1..=13"));
        }
        if self.hole && self.foundations_present {
            out.push(conflict(
                "hole",
                "a hole replaces the foundations; set foundations.present to false",
            ));
        }
        if !self.hole && !self.foundations_present {
            out.push(conflict(
                "foundations.present",
                "game has neither foundations nor a hole to win on",
            ));
        }
        if self.move_built_group == GroupMoves::No
            && self.move_built_group_policy != GroupPolicy::SameAsBuild
        {
            out.push(conflict(
                "tableau piles.move built group policy",
                "only meaningful when groups may move",
            ));
        }
        if self.stock_deal_count == 0 {
            out.push(conflict("stock.deal count", "must be at least 1"));
        }
        if self.spaces_policy == SpacesPolicy::AutoFromReserve
            && (self.reserve_size == 0 || !self.reserve_stacked)
        {
            out.push(conflict(
                "tableau piles.spaces policy",
                "auto-from-reserve needs a stacked reserve",
            ));
        }
        if self.spaces_policy == SpacesPolicy::AutoFromWaste
            && (self.stock_size == 0 || self.stock_deal_type != DealType::Waste)
        {
            out.push(conflict(
                "tableau piles.spaces policy",
                "auto-from-waste needs a stock dealt to waste",
            ));
        }
        if self.stock_size > 0
            && self.stock_deal_type == DealType::TableauPiles
            && self.tableau_count == 0
        {
            out.push(conflict("stock.deal type", "no tableau piles to deal to"));
        }
        if self.has_suit_foundations() {
            if self.base_card == BaseCard::Random && self.foundations_initial != InitialCards::None
            {
                out.push(conflict(
                    "foundations.base card",
                    "a random base deals its own first foundation card",
                ));
            }
            if self.foundations_complete_pile_only
                && (self.foundations_removable
                    || self.base_card != BaseCard::Ace
                    || self.foundations_initial != InitialCards::None)
            {
                out.push(conflict(
                    "foundations.only complete pile moves",
                    "complete-pile foundations start empty, from the ace, and are not removable",
                ));
            }
        }
        out
    }

    /// Pile lengths and face-down counts of the initial tableau.
    ///
    /// Square layouts spread the tableau cards evenly, earlier piles taking
    /// the extra cards. A diagonal deal lays rows that start one pile further
    /// right each time (pile `i` of a full triangle holds `i + 1` cards) and
    /// continues with full rows once the triangle is complete.
    pub fn layout_spec(&self) -> Result<LayoutSpec, RulesError> {
        let cards = self.tableau_cards();
        if cards < 0 {
            return Err(invalid("tableau piles", format!("{cards} cards")));
        }
        let cards = cards as usize;
        let n = self.tableau_count;
        if n == 0 {
            if cards > 0 {
                return Err(invalid("tableau piles.count", 0));
            }
            return Ok(LayoutSpec {
                pile_lengths: vec![],
                face_down: vec![],
            });
        }

        let mut lengths = vec![0usize; n];
        if self.diagonal_deal {
            let mut left = cards;
            let mut row = 0;
            while left > 0 {
                let start = if row < n { row } else { 0 };
                for len in &mut lengths[start..] {
                    if left == 0 {
                        break;
                    }
                    *len += 1;
                    left -= 1;
                }
                row += 1;
            }
        } else {
            let (base, extra) = (cards / n, cards % n);
            for (i, len) in lengths.iter_mut().enumerate() {
                *len = base + usize::from(i < extra);
            }
        }
        let face_down = lengths
            .iter()
            .map(|&len| match self.face_up {
                FaceUp::All => 0,
                FaceUp::Top => len.saturating_sub(1),
            })
            .collect();
        Ok(LayoutSpec {
            pile_lengths: lengths,
            face_down,
        })
    }

    /// A reduced-deck version of the same game: ranks `A..=max_rank` in
    /// every suit, with pile, stock, reserve and cell counts scaled in
    /// proportion and the tableau absorbing whatever is left.
    pub fn with_max_rank(&self, max_rank: u8) -> RuleSet {
        assert!((1..=13).contains(&max_rank));
        let f = max_rank as f64 / self.max_rank as f64;
        let scale = |n: usize| -> usize {
            if n == 0 {
                0
            } else {
                ((n as f64 * f).round() as usize).max(1)
            }
        };
        let mut r = self.clone();
        r.max_rank = max_rank;
        r.tableau_count = scale(self.tableau_count);
        r.stock_size = scale(self.stock_size);
        r.reserve_size = scale(self.reserve_size);
        r.cells_prefilled = if self.cells_prefilled == 0 {
            0
        } else {
            ((self.cells_prefilled as f64 * f).round() as usize).max(1)
        };
        r.cells_count = scale(self.cells_count).max(r.cells_prefilled);
        while r.tableau_cards() < 0 {
            if r.stock_size > 1 {
                r.stock_size -= 1;
            } else if r.reserve_size > 1 {
                r.reserve_size -= 1;
            } else if r.cells_prefilled > 0 {
                r.cells_prefilled -= 1;
            } else {
                break;
            }
        }
        r
    }

    /// The complete explicit document for these rules.
    pub fn to_json(&self) -> Value {
        json!({
            "tableau piles": {
                "count": self.tableau_count,
                "build policy": self.build_policy.as_str(),
                "spaces policy": self.spaces_policy.as_str(),
                "diagonal deal": self.diagonal_deal,
                "move built group": self.move_built_group.as_str(),
                "move built group policy": self.move_built_group_policy.as_str(),
                "face up cards": self.face_up.as_str(),
            },
            "foundations": {
                "present": self.foundations_present,
                "initial cards": self.foundations_initial.as_str(),
                "base card": self.base_card.as_str(),
                "removable": self.foundations_removable,
                "only complete pile moves": self.foundations_complete_pile_only,
            },
            "hole": self.hole,
            "cells": {
                "count": self.cells_count,
                "pre-filled": self.cells_prefilled,
            },
            "stock": {
                "size": self.stock_size,
                "deal type": self.stock_deal_type.as_str(),
                "deal count": self.stock_deal_count,
                "redeal": self.stock_redeal,
            },
            "reserve": {
                "size": self.reserve_size,
                "stacked": self.reserve_stacked,
            },
            "accordion": {
                "size": 0,
                "moves": [],
                "build policies": [],
            },
            "sequences": {
                "count": 0,
                "direction": "L",
                "build policy": "same-suit",
                "fixed suit": false,
            },
            "max rank": self.max_rank,
            "two decks": self.two_decks,
        })
    }
}

/// Parses a rule document, filling unspecified fields with their defaults.
pub fn parse_rules(text: &str) -> Result<RuleSet, RulesError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| RulesError::MalformedJson(e.to_string()))?;
    let root = doc
        .as_object()
        .ok_or_else(|| RulesError::MalformedJson("top level must be an object".into()))?;
    let mut rules = RuleSet::default();

    for (key, value) in root {
        match key.as_str() {
            "tableau piles" => parse_tableau(&mut rules, section(key, value)?)?,
            "foundations" => parse_foundations(&mut rules, section(key, value)?)?,
            "hole" => rules.hole = boolean(key, value)?,
            "cells" => {
                for (k, v) in section(key, value)? {
                    let path = format!("cells.{k}");
                    match k.as_str() {
                        "count" => rules.cells_count = count(&path, v)?,
                        "pre-filled" => rules.cells_prefilled = count(&path, v)?,
                        _ => return Err(RulesError::UnknownField(path)),
                    }
                }
            }
            "stock" => {
                for (k, v) in section(key, value)? {
                    let path = format!("stock.{k}");
                    match k.as_str() {
                        "size" => rules.stock_size = count(&path, v)?,
                        "deal type" => {
                            rules.stock_deal_type = DealType::parse(&path, string(&path, v)?)?
                        }
                        "deal count" => rules.stock_deal_count = count(&path, v)?,
                        "redeal" => rules.stock_redeal = boolean(&path, v)?,
                        _ => return Err(RulesError::UnknownField(path)),
                    }
                }
            }
            "reserve" => {
                for (k, v) in section(key, value)? {
                    let path = format!("reserve.{k}");
                    match k.as_str() {
                        "size" => rules.reserve_size = count(&path, v)?,
                        "stacked" => rules.reserve_stacked = boolean(&path, v)?,
                        _ => return Err(RulesError::UnknownField(path)),
                    }
                }
            }
            "accordion" => parse_accordion(section(key, value)?)?,
            "sequences" => parse_sequences(section(key, value)?)?,
            "max rank" => {
                let r = count(key, value)?;
                if !(1..=13).contains(&r) {
                    return Err(invalid(key, r));
                }
                rules.max_rank = r as u8;
            }
            "two decks" => rules.two_decks = boolean(key, value)?,
            _ => return Err(RulesError::UnknownField(key.clone())),
        }
    }
    if rules.stock_deal_type == DealType::TableauPiles {
        rules.stock_deal_count = 1;
    }
    Ok(rules)
}

fn parse_tableau(rules: &mut RuleSet, obj: &Map<String, Value>) -> Result<(), RulesError> {
    for (k, v) in obj {
        let path = format!("tableau piles.{k}");
        match k.as_str() {
            "count" => rules.tableau_count = count(&path, v)?,
            "build policy" => rules.build_policy = BuildPolicy::parse(&path, string(&path, v)?)?,
            "spaces policy" => rules.spaces_policy = SpacesPolicy::parse(&path, string(&path, v)?)?,
            "diagonal deal" => rules.diagonal_deal = boolean(&path, v)?,
            "move built group" => {
                rules.move_built_group = GroupMoves::parse(&path, string(&path, v)?)?
            }
            "move built group policy" => {
                rules.move_built_group_policy = GroupPolicy::parse(&path, string(&path, v)?)?
            }
            "face up cards" => rules.face_up = FaceUp::parse(&path, string(&path, v)?)?,
            _ => return Err(RulesError::UnknownField(path)),
        }
    }
    Ok(())
}

fn parse_foundations(rules: &mut RuleSet, obj: &Map<String, Value>) -> Result<(), RulesError> {
    for (k, v) in obj {
        let path = format!("foundations.{k}");
        match k.as_str() {
            "present" => rules.foundations_present = boolean(&path, v)?,
            "initial cards" => {
                rules.foundations_initial = InitialCards::parse(&path, string(&path, v)?)?
            }
            "base card" => rules.base_card = BaseCard::parse(&path, string(&path, v)?)?,
            "removable" => rules.foundations_removable = boolean(&path, v)?,
            "only complete pile moves" => rules.foundations_complete_pile_only = boolean(&path, v)?,
            _ => return Err(RulesError::UnknownField(path)),
        }
    }
    Ok(())
}

fn parse_accordion(obj: &Map<String, Value>) -> Result<(), RulesError> {
    for (k, v) in obj {
        let path = format!("accordion.{k}");
        match k.as_str() {
            "size" => {
                if count(&path, v)? > 0 {
                    return Err(RulesError::Unsupported("accordion".into()));
                }
            }
            "moves" | "build policies" => {
                if !v.is_array() {
                    return Err(invalid(&path, v));
                }
            }
            _ => return Err(RulesError::UnknownField(path)),
        }
    }
    Ok(())
}

fn parse_sequences(obj: &Map<String, Value>) -> Result<(), RulesError> {
    for (k, v) in obj {
        let path = format!("sequences.{k}");
        match k.as_str() {
            "count" => {
                if count(&path, v)? > 0 {
                    return Err(RulesError::Unsupported("sequences".into()));
                }
            }
            "direction" | "build policy" => {
                string(&path, v)?;
            }
            "fixed suit" => {
                boolean(&path, v)?;
            }
            _ => return Err(RulesError::UnknownField(path)),
        }
    }
    Ok(())
}

fn section<'a>(path: &str, v: &'a Value) -> Result<&'a Map<String, Value>, RulesError> {
    v.as_object().ok_or_else(|| invalid(path, v))
}

fn boolean(path: &str, v: &Value) -> Result<bool, RulesError> {
    v.as_bool().ok_or_else(|| invalid(path, v))
}

fn string<'a>(path: &str, v: &'a Value) -> Result<&'a str, RulesError> {
    v.as_str().ok_or_else(|| invalid(path, v))
}

fn count(path: &str, v: &Value) -> Result<usize, RulesError> {
    v.as_u64()
        .filter(|&n| n <= 1 << 16)
        .map(|n| n as usize)
        .ok_or_else(|| invalid(path, v))
}
