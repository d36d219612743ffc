//! Exhaustive solver for patience games described in a JSON rule language.

pub mod card;
pub mod deal;
pub mod dominance;
pub mod engine;
pub mod rules;
pub mod search;
pub mod stats;
pub mod table;
