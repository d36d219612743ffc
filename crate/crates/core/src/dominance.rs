//! Safe foundation moves and the partial-pile restriction.

use thiserror::Error;

use crate::engine::{group_link, GameState, Move, Zone};
use crate::rules::{BaseCard, BuildPolicy, GroupMoves, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DominanceConfig {
    pub auto_foundation_same_suit: bool,
    pub auto_foundation_red_black: bool,
    pub partial_pile_restriction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DominanceError {
    #[error("dominance `{0}` does not apply to these rules")]
    ConfigConflict(String),
    #[error("unknown dominance `{0}`")]
    Unknown(String),
}

pub const NAMES: [&str; 3] = ["same-suit", "red-black", "partial-pile"];

fn ascending_suit_foundations(rules: &RuleSet) -> bool {
    rules.has_suit_foundations()
        && !rules.foundations_complete_pile_only
        && !rules.two_decks
        && rules.base_card == BaseCard::Ace
}

fn same_suit_applies(rules: &RuleSet) -> bool {
    rules.build_policy == BuildPolicy::SameSuit && ascending_suit_foundations(rules)
}

fn red_black_applies(rules: &RuleSet) -> bool {
    rules.build_policy == BuildPolicy::RedBlack && ascending_suit_foundations(rules)
}

/// Preconditions of the partial-pile restriction: one pack, red-black
/// building, suit foundations, partial groups movable, and no cells for
/// tableau cards to escape to.
fn partial_pile_applies(rules: &RuleSet) -> bool {
    !rules.two_decks
        && rules.build_policy == BuildPolicy::RedBlack
        && rules.has_suit_foundations()
        && !rules.foundations_complete_pile_only
        && matches!(
            rules.move_built_group,
            GroupMoves::Yes | GroupMoves::PartialIfCardAboveBuildable
        )
        && rules.cells_count == 0
}

/// Every dominance the rules admit, with the partial-pile restriction on
/// only when the rules ask for it.
pub fn applicable_dominances(rules: &RuleSet) -> Result<DominanceConfig, DominanceError> {
    let requested = rules.move_built_group == GroupMoves::PartialIfCardAboveBuildable;
    if requested && !partial_pile_applies(rules) {
        return Err(DominanceError::ConfigConflict("partial-pile".into()));
    }
    Ok(DominanceConfig {
        auto_foundation_same_suit: same_suit_applies(rules),
        auto_foundation_red_black: red_black_applies(rules),
        partial_pile_restriction: requested,
    })
}

/// Applies `name=on|off` style overrides on top of the defaults.
pub fn with_overrides(
    rules: &RuleSet,
    mut cfg: DominanceConfig,
    overrides: &[(String, bool)],
) -> Result<DominanceConfig, DominanceError> {
    for (name, on) in overrides {
        let (slot, ok) = match name.as_str() {
            "same-suit" => (&mut cfg.auto_foundation_same_suit, same_suit_applies(rules)),
            "red-black" => (&mut cfg.auto_foundation_red_black, red_black_applies(rules)),
            "partial-pile" => (
                &mut cfg.partial_pile_restriction,
                partial_pile_applies(rules),
            ),
            _ => return Err(DominanceError::Unknown(name.clone())),
        };
        if *on && !ok {
            return Err(DominanceError::ConfigConflict(name.clone()));
        }
        *slot = *on;
    }
    Ok(cfg)
}

fn source_allowed(rules: &RuleSet, from: Zone) -> bool {
    match from {
        Zone::Tableau(_) | Zone::Cell(_) | Zone::Reserve(_) => true,
        Zone::Waste => rules.effective_deal_count() == 1,
        _ => false,
    }
}

/// A foundation build that can be committed to without losing a win.
pub fn safe_foundation_move(
    state: &GameState,
    rules: &RuleSet,
    cfg: &DominanceConfig,
    scratch: &mut Vec<Move>,
) -> Option<Move> {
    if !(cfg.auto_foundation_same_suit || cfg.auto_foundation_red_black) {
        return None;
    }
    if state.is_won(rules) || state.forced_refill(rules).is_some() {
        return None;
    }
    scratch.clear();
    state.foundation_moves(rules, scratch);
    scratch.iter().copied().find(|m| {
        if !source_allowed(rules, m.from) {
            return false;
        }
        if cfg.auto_foundation_same_suit {
            return true;
        }
        let Zone::Foundation(f) = m.to else {
            return false;
        };
        let suit = f as usize % 4;
        let k = state.foundations[f as usize] as i32 + 1;
        let count = |s: usize| state.foundations[s] as i32;
        let red = matches!(suit, 1 | 2);
        let (opp, partner) = if red {
            ([0, 3], 3 - suit)
        } else {
            ([1, 2], 3 - suit)
        };
        opp.iter().all(|&o| count(o) >= k - 1) && count(partner) >= k - 2
    })
}

/// Whether the partial-pile restriction keeps `mv`.
pub fn partial_pile_allows(state: &GameState, rules: &RuleSet, mv: Move) -> bool {
    let (Zone::Tableau(i), Zone::Tableau(_)) = (mv.from, mv.to) else {
        return true;
    };
    let p = &state.piles[i as usize];
    let k = mv.count as usize;
    if k >= p.cards.len() {
        return true;
    }
    let below = p.cards.len() - k - 1;
    if below < p.hidden {
        return true;
    }
    let under = p.cards[below];
    if !group_link(rules, p.cards[below + 1], under) {
        return true;
    }
    state.foundation_for(under).is_some()
}

/// Removes the moves the partial-pile restriction forbids from
/// `moves[start..]`, keeping order.
pub fn filter_partial_pile_moves(
    state: &GameState,
    rules: &RuleSet,
    cfg: &DominanceConfig,
    moves: &mut Vec<Move>,
    start: usize,
) {
    if !cfg.partial_pile_restriction {
        return;
    }
    let mut keep = start;
    for i in start..moves.len() {
        if partial_pile_allows(state, rules, moves[i]) {
            moves[keep] = moves[i];
            keep += 1;
        }
    }
    moves.truncate(keep);
}
