//! Positions, moves and canonical keys.
//!
//! Face-down cards sit contiguously at the bottom of a pile; `hidden`
//! counts them. A nonempty pile always shows its top card. Foundations are
//! stored as card counts, one per suit per deck, since their contents follow
//! from the base rank.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::card::{canonical_pack, Card, Suit};
use crate::deal::Layout;
use crate::rules::{
    BaseCard, BuildPolicy, DealType, GroupMoves, GroupPolicy, RuleSet, SpacesPolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    Tableau(u8),
    Foundation(u8),
    Cell(u8),
    Reserve(u8),
    Waste,
    Stock,
    Hole,
    /// Every tableau pile at once; the target of a stock deal.
    Piles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Zone,
    pub to: Zone,
    pub count: u8,
}

impl Move {
    pub fn new(from: Zone, to: Zone, count: usize) -> Move {
        Move {
            from,
            to,
            count: count as u8,
        }
    }

    pub fn is_foundation_build(self) -> bool {
        matches!(self.to, Zone::Foundation(_) | Zone::Hole)
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Zone::Tableau(i) => write!(f, "t{i}"),
            Zone::Foundation(i) => write!(f, "f{i}"),
            Zone::Cell(i) => write!(f, "c{i}"),
            Zone::Reserve(i) => write!(f, "r{i}"),
            Zone::Waste => f.write_str("w"),
            Zone::Stock => f.write_str("s"),
            Zone::Hole => f.write_str("h"),
            Zone::Piles => f.write_str("p"),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)?;
        if self.count != 1 {
            write!(f, "x{}", self.count)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad move notation `{0}`")]
pub struct ParseMoveError(pub String);

impl FromStr for Zone {
    type Err = ParseMoveError;

    fn from_str(s: &str) -> Result<Zone, ParseMoveError> {
        let err = || ParseMoveError(s.to_owned());
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(err)?;
        let rest = chars.as_str();
        let index = || -> Result<u8, ParseMoveError> {
            if rest.is_empty() || rest.len() > 3 || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            rest.parse().map_err(|_| err())
        };
        let bare = |z: Zone| if rest.is_empty() { Ok(z) } else { Err(err()) };
        match head {
            't' => Ok(Zone::Tableau(index()?)),
            'f' => Ok(Zone::Foundation(index()?)),
            'c' => Ok(Zone::Cell(index()?)),
            'r' => Ok(Zone::Reserve(index()?)),
            'w' => bare(Zone::Waste),
            's' => bare(Zone::Stock),
            'h' => bare(Zone::Hole),
            'p' => bare(Zone::Piles),
            _ => Err(err()),
        }
    }
}

impl FromStr for Move {
    type Err = ParseMoveError;

    fn from_str(s: &str) -> Result<Move, ParseMoveError> {
        let err = || ParseMoveError(s.to_owned());
        let (from, rest) = s.trim().split_once("->").ok_or_else(err)?;
        let (to, count) = match rest.split_once('x') {
            Some((to, n)) => {
                if n.is_empty() || n.len() > 3 || !n.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(err());
                }
                let n: u8 = n.parse().map_err(|_| err())?;
                if n < 2 {
                    return Err(err());
                }
                (to, n)
            }
            None => (rest, 1),
        };
        Ok(Move {
            from: from.parse().map_err(|_| err())?,
            to: to.parse().map_err(|_| err())?,
            count,
        })
    }
}

/// Parses a solution file: one move per line, blank lines and `#` comments
/// ignored.
pub fn parse_solution(text: &str) -> Result<Vec<Move>, ParseMoveError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

pub fn format_solution(moves: &[Move]) -> String {
    let mut s = String::new();
    for m in moves {
        s.push_str(&m.to_string());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("illegal move {0}")]
    IllegalMove(Move),
    #[error("undo applied out of order")]
    UndoOrderViolation,
    #[error("layout does not fit the rules: {0}")]
    InconsistentLayout(String),
}

#[derive(Debug, PartialEq, Eq, Hash, Default)]
pub struct Pile {
    pub cards: Vec<Card>,
    pub hidden: usize,
}

impl Clone for Pile {
    fn clone(&self) -> Pile {
        Pile {
            cards: self.cards.clone(),
            hidden: self.hidden,
        }
    }

    fn clone_from(&mut self, other: &Pile) {
        self.cards.clone_from(&other.cards);
        self.hidden = other.hidden;
    }
}

impl Pile {
    pub fn top(&self) -> Option<Card> {
        self.cards.last().copied()
    }

    pub fn face_up(&self) -> &[Card] {
        &self.cards[self.hidden..]
    }
}

/// Everything needed to reverse one applied move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Undo {
    mv: Move,
    flipped: bool,
    depth: u32,
}

impl Clone for GameState {
    fn clone(&self) -> GameState {
        let mut s = GameState {
            piles: Vec::new(),
            foundations: Vec::new(),
            hole: Vec::new(),
            cells: Vec::new(),
            stock: Vec::new(),
            waste: Vec::new(),
            reserve: Vec::new(),
            base_rank: 0,
            max_rank: 0,
            depth: 0,
        };
        s.clone_from(self);
        s
    }

    /// Reuses existing allocations.
    fn clone_from(&mut self, o: &GameState) {
        self.piles.clone_from(&o.piles);
        self.foundations.clone_from(&o.foundations);
        self.hole.clone_from(&o.hole);
        self.cells.clone_from(&o.cells);
        self.stock.clone_from(&o.stock);
        self.waste.clone_from(&o.waste);
        self.reserve.clone_from(&o.reserve);
        self.base_rank = o.base_rank;
        self.max_rank = o.max_rank;
        self.depth = o.depth;
    }
}

impl Undo {
    pub fn mv(&self) -> Move {
        self.mv
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct GameState {
    pub piles: Vec<Pile>,
    /// Cards on each foundation, indexed `deck * 4 + suit`.
    pub foundations: Vec<u8>,
    /// The hole, last card on top.
    pub hole: Vec<Card>,
    pub cells: Vec<Option<Card>>,
    /// Top card last.
    pub stock: Vec<Card>,
    /// Top card last.
    pub waste: Vec<Card>,
    /// Top card last.
    pub reserve: Vec<Card>,
    pub base_rank: u8,
    pub max_rank: u8,
    depth: u32,
}

fn multiset(cards: impl Iterator<Item = Card>) -> [u16; 64] {
    let mut m = [0u16; 64];
    for c in cards {
        m[c.code() as usize] += 1;
    }
    m
}

impl GameState {
    pub fn initial(rules: &RuleSet, layout: &Layout) -> Result<GameState, EngineError> {
        let bad = |s: &str| Err(EngineError::InconsistentLayout(s.to_owned()));
        if layout.tableau.len() != rules.tableau_count {
            return bad("tableau pile count");
        }
        if layout.cells.len() != rules.cells_count {
            return bad("cell count");
        }
        let max = rules.max_rank;
        if layout.cards().any(|c| c.rank() > max) {
            return bad("card outside the pack");
        }
        if multiset(layout.cards()) != multiset(canonical_pack(max, rules.two_decks).into_iter()) {
            return bad("cards are not exactly one pack");
        }
        if !(1..=max).contains(&layout.base_rank)
            || (rules.base_card == BaseCard::Ace && layout.base_rank != 1)
        {
            return bad("base rank");
        }
        for p in &layout.tableau {
            if p.face_down > 0 && p.face_down >= p.cards.len() {
                return bad("face-down cards must lie under a face-up card");
            }
        }

        let mut s = GameState {
            piles: layout
                .tableau
                .iter()
                .map(|p| Pile {
                    cards: p.cards.clone(),
                    hidden: p.face_down,
                })
                .collect(),
            foundations: vec![0; rules.foundation_count()],
            hole: Vec::new(),
            cells: layout.cells.clone(),
            stock: layout.stock.clone(),
            waste: Vec::new(),
            reserve: layout.reserve.clone(),
            base_rank: layout.base_rank,
            max_rank: max,
            depth: 0,
        };
        if rules.hole {
            if layout.foundation_seeds.len() > 1 {
                return bad("a hole starts with at most one card");
            }
            s.hole = layout.foundation_seeds.clone();
        } else {
            if !rules.foundations_present && !layout.foundation_seeds.is_empty() {
                return bad("foundation cards without foundations");
            }
            for &c in &layout.foundation_seeds {
                match s.foundation_for(c) {
                    Some(f) => s.foundations[f] += 1,
                    None => return bad("foundation cards out of sequence"),
                }
            }
        }
        Ok(s)
    }

    fn decks(&self) -> usize {
        self.foundations.len() / 4
    }

    /// Rank of the next card foundation `f` accepts.
    pub fn foundation_next(&self, f: usize) -> Option<u8> {
        let n = self.foundations[f];
        (n < self.max_rank).then(|| (self.base_rank - 1 + n) % self.max_rank + 1)
    }

    pub fn foundation_top(&self, f: usize) -> Option<Card> {
        let n = self.foundations[f];
        (n > 0).then(|| {
            Card::new(
                (self.base_rank - 1 + n - 1) % self.max_rank + 1,
                Suit::from_index(f as u8 % 4),
            )
        })
    }

    /// The foundation that accepts `card` next, if any.
    pub fn foundation_for(&self, card: Card) -> Option<usize> {
        (0..self.decks())
            .map(|d| d * 4 + card.suit().index())
            .find(|&f| self.foundation_next(f) == Some(card.rank()))
    }

    pub fn cards_home(&self) -> usize {
        self.hole.len() + self.foundations.iter().map(|&n| n as usize).sum::<usize>()
    }

    pub fn is_won(&self, rules: &RuleSet) -> bool {
        self.cards_home() == rules.total_cards()
    }

    pub fn first_empty_pile(&self) -> Option<usize> {
        self.piles.iter().position(|p| p.cards.is_empty())
    }

    fn first_empty_cell(&self) -> Option<usize> {
        self.cells.iter().position(Option::is_none)
    }

    /// Whether tableau piles may be permuted freely. A stock dealt across
    /// the piles gives each position its own future cards.
    pub fn piles_interchangeable(&self, rules: &RuleSet) -> bool {
        rules.stock_deal_type != DealType::TableauPiles || self.stock.is_empty()
    }

    fn hole_accepts(&self, card: Card) -> bool {
        match self.hole.last() {
            None => true,
            Some(top) => {
                let (a, b) = (top.rank(), card.rank());
                a.abs_diff(b) == 1 || (a.min(b) == 1 && a.max(b) == self.max_rank && a != b)
            }
        }
    }

    /// Reserve positions whose cards may be played.
    fn reserve_available(&self, rules: &RuleSet) -> std::ops::Range<usize> {
        let n = self.reserve.len();
        if rules.reserve_stacked {
            n.saturating_sub(1)..n
        } else {
            0..n
        }
    }

    /// Whether empty piles currently accept cards, ignoring forced refills.
    fn spaces_open(&self, rules: &RuleSet) -> bool {
        match rules.spaces_policy {
            SpacesPolicy::None => false,
            SpacesPolicy::Any | SpacesPolicy::Kings => true,
            SpacesPolicy::AutoFromReserve => self.reserve.is_empty(),
            SpacesPolicy::AutoFromWaste => self.waste.is_empty() && self.stock.is_empty(),
        }
    }

    /// The forced refill of a space, when one is due.
    pub fn forced_refill(&self, rules: &RuleSet) -> Option<Move> {
        let space = self.first_empty_pile()? as u8;
        match rules.spaces_policy {
            SpacesPolicy::AutoFromReserve if !self.reserve.is_empty() => Some(Move::new(
                Zone::Reserve(self.reserve.len() as u8 - 1),
                Zone::Tableau(space),
                1,
            )),
            SpacesPolicy::AutoFromWaste if !self.waste.is_empty() => {
                Some(Move::new(Zone::Waste, Zone::Tableau(space), 1))
            }
            SpacesPolicy::AutoFromWaste if !self.stock.is_empty() => {
                Some(Move::new(Zone::Stock, Zone::Tableau(space), 1))
            }
            _ => None,
        }
    }

    /// Length of the movable run on top of pile `i`.
    pub fn run_length(&self, rules: &RuleSet, i: usize) -> usize {
        let p = &self.piles[i];
        let up = p.face_up();
        if up.is_empty() {
            return 0;
        }
        let mut k = 1;
        while k < up.len() && group_link(rules, up[up.len() - k], up[up.len() - k - 1]) {
            k += 1;
        }
        k
    }

    fn group_sizes(&self, rules: &RuleSet, i: usize) -> std::ops::RangeInclusive<usize> {
        match rules.move_built_group {
            GroupMoves::No => 1..=1,
            _ if rules.build_policy == BuildPolicy::NoBuild => 1..=1,
            GroupMoves::Yes | GroupMoves::PartialIfCardAboveBuildable => {
                1..=self.run_length(rules, i)
            }
            GroupMoves::WholePile => {
                let r = self.run_length(rules, i);
                r..=r
            }
        }
    }

    /// Appends every legal move, in generation order, to `out`.
    pub fn legal_moves(&self, rules: &RuleSet, out: &mut Vec<Move>) {
        if self.is_won(rules) {
            return;
        }
        if let Some(m) = self.forced_refill(rules) {
            out.push(m);
            return;
        }
        self.foundation_moves(rules, out);
        self.tableau_moves(rules, out);
        self.stock_moves(rules, out);
    }

    /// Builds to the foundations or the hole.
    pub fn foundation_moves(&self, rules: &RuleSet, out: &mut Vec<Move>) {
        if rules.hole {
            let mut offer = |from: Zone, c: Card| {
                if self.hole_accepts(c) {
                    out.push(Move::new(from, Zone::Hole, 1));
                }
            };
            for (i, p) in self.piles.iter().enumerate() {
                if let Some(c) = p.top() {
                    offer(Zone::Tableau(i as u8), c);
                }
            }
            for (i, c) in self.cells.iter().enumerate() {
                if let Some(c) = *c {
                    offer(Zone::Cell(i as u8), c);
                }
            }
            for i in self.reserve_available(rules) {
                offer(Zone::Reserve(i as u8), self.reserve[i]);
            }
            if let Some(&c) = self.waste.last() {
                offer(Zone::Waste, c);
            }
            return;
        }
        if !rules.has_suit_foundations() {
            return;
        }
        if rules.foundations_complete_pile_only {
            let m = self.max_rank as usize;
            for (i, p) in self.piles.iter().enumerate() {
                let up = p.face_up();
                if up.len() < m {
                    continue;
                }
                let run = &up[up.len() - m..];
                let suit = run[0].suit();
                let complete = run
                    .iter()
                    .enumerate()
                    .all(|(k, c)| c.suit() == suit && c.rank() as usize == m - k);
                if !complete {
                    continue;
                }
                if let Some(f) = (0..self.decks())
                    .map(|d| d * 4 + suit.index())
                    .find(|&f| self.foundations[f] == 0)
                {
                    out.push(Move::new(
                        Zone::Tableau(i as u8),
                        Zone::Foundation(f as u8),
                        m,
                    ));
                }
            }
            return;
        }
        let mut offer = |from: Zone, c: Card| {
            if let Some(f) = self.foundation_for(c) {
                out.push(Move::new(from, Zone::Foundation(f as u8), 1));
            }
        };
        for (i, p) in self.piles.iter().enumerate() {
            if let Some(c) = p.top() {
                offer(Zone::Tableau(i as u8), c);
            }
        }
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(c) = *c {
                offer(Zone::Cell(i as u8), c);
            }
        }
        for i in self.reserve_available(rules) {
            offer(Zone::Reserve(i as u8), self.reserve[i]);
        }
        if let Some(&c) = self.waste.last() {
            offer(Zone::Waste, c);
        }
    }

    fn tableau_moves(&self, rules: &RuleSet, out: &mut Vec<Move>) {
        let swap = self.piles_interchangeable(rules);
        let open = self.spaces_open(rules);
        let first_space = self.first_empty_pile();
        let kings_only = rules.spaces_policy == SpacesPolicy::Kings;
        let max = self.max_rank;
        // Empty piles a card may enter.
        let space_ok = |j: usize, bottom: Card| -> bool {
            open && (!swap || Some(j) == first_space) && (!kings_only || bottom.rank() == max)
        };
        // Offers a single card from `from` to every pile that takes it.
        let single = |from: Zone, c: Card, out: &mut Vec<Move>| {
            for (j, q) in self.piles.iter().enumerate() {
                let fits = match q.top() {
                    Some(t) => builds(rules, c, t),
                    None => space_ok(j, c),
                };
                if fits {
                    out.push(Move::new(from, Zone::Tableau(j as u8), 1));
                }
            }
        };

        for (i, p) in self.piles.iter().enumerate() {
            if p.cards.is_empty() {
                continue;
            }
            let sizes = self.group_sizes(rules, i);
            for (j, q) in self.piles.iter().enumerate() {
                if i == j {
                    continue;
                }
                match q.top() {
                    Some(t) => {
                        for k in sizes.clone() {
                            if builds(rules, p.cards[p.cards.len() - k], t) {
                                out.push(Move::new(
                                    Zone::Tableau(i as u8),
                                    Zone::Tableau(j as u8),
                                    k,
                                ));
                            }
                        }
                    }
                    None => {
                        for k in sizes.clone() {
                            if swap && k == p.cards.len() {
                                continue;
                            }
                            if space_ok(j, p.cards[p.cards.len() - k]) {
                                out.push(Move::new(
                                    Zone::Tableau(i as u8),
                                    Zone::Tableau(j as u8),
                                    k,
                                ));
                            }
                        }
                    }
                }
            }
        }

        if let Some(cell) = self.first_empty_cell() {
            for (i, p) in self.piles.iter().enumerate() {
                if !p.cards.is_empty() {
                    out.push(Move::new(Zone::Tableau(i as u8), Zone::Cell(cell as u8), 1));
                }
            }
        }
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(c) = *c {
                single(Zone::Cell(i as u8), c, out);
            }
        }
        for i in self.reserve_available(rules) {
            single(Zone::Reserve(i as u8), self.reserve[i], out);
        }
        if let Some(&c) = self.waste.last() {
            single(Zone::Waste, c, out);
        }
        if rules.foundations_removable
            && rules.has_suit_foundations()
            && !rules.foundations_complete_pile_only
        {
            for f in 0..self.foundations.len() {
                if let Some(c) = self.foundation_top(f) {
                    single(Zone::Foundation(f as u8), c, out);
                }
            }
        }
    }

    fn stock_moves(&self, rules: &RuleSet, out: &mut Vec<Move>) {
        match rules.stock_deal_type {
            DealType::Waste => {
                if !self.stock.is_empty() {
                    let n = rules.stock_deal_count.min(self.stock.len());
                    out.push(Move::new(Zone::Stock, Zone::Waste, n));
                } else if rules.stock_redeal && !self.waste.is_empty() {
                    out.push(Move::new(Zone::Waste, Zone::Stock, self.waste.len()));
                }
            }
            DealType::TableauPiles => {
                if !self.stock.is_empty() && !self.piles.is_empty() {
                    let n = self.piles.len().min(self.stock.len());
                    out.push(Move::new(Zone::Stock, Zone::Piles, n));
                }
            }
        }
    }

    /// `mv` rewritten to target the first empty pile or cell, as generated
    /// moves do.
    fn normalised(&self, rules: &RuleSet, mut mv: Move) -> Move {
        match mv.to {
            Zone::Tableau(j)
                if self.piles_interchangeable(rules)
                    && self
                        .piles
                        .get(j as usize)
                        .is_some_and(|p| p.cards.is_empty()) =>
            {
                if let Some(first) = self.first_empty_pile() {
                    mv.to = Zone::Tableau(first as u8);
                }
            }
            Zone::Cell(j) if self.cells.get(j as usize).is_some_and(Option::is_none) => {
                if let Some(first) = self.first_empty_cell() {
                    mv.to = Zone::Cell(first as u8);
                }
            }
            _ => {}
        }
        mv
    }

    pub fn is_legal(&self, rules: &RuleSet, mv: Move) -> bool {
        let norm = self.normalised(rules, mv);
        // A whole pile moving into another space is a no-op up to symmetry,
        // so generation skips it; it is still a legal move.
        if let (Zone::Tableau(i), Zone::Tableau(j)) = (mv.from, mv.to) {
            let (i, j) = (i as usize, j as usize);
            if i != j
                && i < self.piles.len()
                && j < self.piles.len()
                && self.piles[j].cards.is_empty()
                && mv.count as usize == self.piles[i].cards.len()
                && self.forced_refill(rules).is_none()
                && self.spaces_open(rules)
                && self.group_sizes(rules, i).contains(&(mv.count as usize))
                && (rules.spaces_policy != SpacesPolicy::Kings
                    || self.piles[i].cards[0].rank() == self.max_rank)
            {
                return true;
            }
        }
        let mut moves = Vec::new();
        self.legal_moves(rules, &mut moves);
        moves.contains(&norm)
    }

    /// Applies a move after checking it is legal.
    pub fn apply(&mut self, rules: &RuleSet, mv: Move) -> Result<Undo, EngineError> {
        if !self.is_legal(rules, mv) {
            return Err(EngineError::IllegalMove(mv));
        }
        Ok(self.apply_unchecked(mv))
    }

    /// Applies a move known to be legal.
    pub fn apply_unchecked(&mut self, mv: Move) -> Undo {
        let mut flipped = false;
        let n = mv.count as usize;
        match (mv.from, mv.to) {
            (Zone::Tableau(i), Zone::Tableau(j)) => {
                let (i, j) = (i as usize, j as usize);
                let (src, dst) = two_mut(&mut self.piles, i, j);
                let at = src.cards.len() - n;
                dst.cards.extend_from_slice(&src.cards[at..]);
                src.cards.truncate(at);
                flipped = flip(src);
            }
            (Zone::Tableau(i), Zone::Foundation(f)) if n > 1 => {
                let p = &mut self.piles[i as usize];
                p.cards.truncate(p.cards.len() - n);
                flipped = flip(p);
                self.foundations[f as usize] += n as u8;
            }
            (Zone::Stock, Zone::Waste) => {
                for _ in 0..n {
                    let c = self.stock.pop().expect("stock card");
                    self.waste.push(c);
                }
            }
            (Zone::Waste, Zone::Stock) => {
                while let Some(c) = self.waste.pop() {
                    self.stock.push(c);
                }
            }
            (Zone::Stock, Zone::Piles) => {
                for j in 0..n {
                    let c = self.stock.pop().expect("stock card");
                    self.piles[j].cards.push(c);
                }
            }
            (from, to) => {
                let c = self.take(from);
                if let Zone::Tableau(i) = from {
                    flipped = flip(&mut self.piles[i as usize]);
                }
                self.put(to, c);
            }
        }
        self.depth += 1;
        Undo {
            mv,
            flipped,
            depth: self.depth,
        }
    }

    pub fn undo(&mut self, token: Undo) -> Result<(), EngineError> {
        if token.depth != self.depth {
            return Err(EngineError::UndoOrderViolation);
        }
        self.undo_unchecked(token);
        Ok(())
    }

    pub fn undo_unchecked(&mut self, token: Undo) {
        let mv = token.mv;
        let n = mv.count as usize;
        let unflip = |p: &mut Pile| {
            if token.flipped {
                p.hidden += 1;
            }
        };
        match (mv.from, mv.to) {
            (Zone::Tableau(i), Zone::Tableau(j)) => {
                let (src, dst) = two_mut(&mut self.piles, i as usize, j as usize);
                unflip(src);
                let at = dst.cards.len() - n;
                src.cards.extend_from_slice(&dst.cards[at..]);
                dst.cards.truncate(at);
            }
            (Zone::Tableau(i), Zone::Foundation(f)) if n > 1 => {
                self.foundations[f as usize] -= n as u8;
                let suit = Suit::from_index(f % 4);
                let p = &mut self.piles[i as usize];
                unflip(p);
                p.cards
                    .extend((1..=n as u8).rev().map(|r| Card::new(r, suit)));
            }
            (Zone::Stock, Zone::Waste) => {
                for _ in 0..n {
                    let c = self.waste.pop().expect("waste card");
                    self.stock.push(c);
                }
            }
            (Zone::Waste, Zone::Stock) => {
                while let Some(c) = self.stock.pop() {
                    self.waste.push(c);
                }
            }
            (Zone::Stock, Zone::Piles) => {
                for j in (0..n).rev() {
                    let c = self.piles[j].cards.pop().expect("dealt card");
                    self.stock.push(c);
                }
            }
            (from, to) => {
                let c = self.take(to);
                if let Zone::Tableau(i) = from {
                    unflip(&mut self.piles[i as usize]);
                }
                self.put(from, c);
            }
        }
        self.depth -= 1;
    }

    fn take(&mut self, z: Zone) -> Card {
        match z {
            Zone::Tableau(i) => self.piles[i as usize].cards.pop().expect("pile card"),
            Zone::Foundation(f) => {
                let c = self.foundation_top(f as usize).expect("foundation card");
                self.foundations[f as usize] -= 1;
                c
            }
            Zone::Cell(i) => self.cells[i as usize].take().expect("cell card"),
            Zone::Reserve(i) => self.reserve.remove(i as usize),
            Zone::Waste => self.waste.pop().expect("waste card"),
            Zone::Stock => self.stock.pop().expect("stock card"),
            Zone::Hole => self.hole.pop().expect("hole card"),
            Zone::Piles => unreachable!("piles are only a deal target"),
        }
    }

    fn put(&mut self, z: Zone, c: Card) {
        match z {
            Zone::Tableau(i) => self.piles[i as usize].cards.push(c),
            Zone::Foundation(f) => self.foundations[f as usize] += 1,
            Zone::Cell(i) => self.cells[i as usize] = Some(c),
            Zone::Reserve(i) => self.reserve.insert(i as usize, c),
            Zone::Waste => self.waste.push(c),
            Zone::Stock => self.stock.push(c),
            Zone::Hole => self.hole.push(c),
            Zone::Piles => unreachable!("piles are only a deal target"),
        }
    }

    /// Human-readable dump of every zone.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let cards = |cs: &[Card]| {
            cs.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        if !self.foundations.is_empty() {
            let tops: Vec<String> = (0..self.foundations.len())
                .map(|f| {
                    self.foundation_top(f)
                        .map_or("--".into(), |c| c.to_string())
                })
                .collect();
            writeln!(s, "foundations: {}", tops.join(" ")).unwrap();
        }
        if let Some(top) = self.hole.last() {
            writeln!(s, "hole: {top} ({} cards)", self.hole.len()).unwrap();
        }
        if !self.cells.is_empty() {
            let cells: Vec<String> = self
                .cells
                .iter()
                .map(|c| c.map_or("..".into(), |c| c.to_string()))
                .collect();
            writeln!(s, "cells: {}", cells.join(" ")).unwrap();
        }
        if !self.reserve.is_empty() {
            writeln!(s, "reserve: {}", cards(&self.reserve)).unwrap();
        }
        if !self.stock.is_empty() || !self.waste.is_empty() {
            writeln!(s, "stock: {}", cards(&self.stock)).unwrap();
            writeln!(s, "waste: {}", cards(&self.waste)).unwrap();
        }
        for (i, p) in self.piles.iter().enumerate() {
            let down = cards(&p.cards[..p.hidden]);
            let up = cards(p.face_up());
            if p.hidden > 0 {
                writeln!(s, "t{i}: [{down}] {up}").unwrap();
            } else {
                writeln!(s, "t{i}: {up}").unwrap();
            }
        }
        s
    }
}

fn two_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

fn flip(p: &mut Pile) -> bool {
    if p.hidden > 0 && p.hidden == p.cards.len() {
        p.hidden -= 1;
        true
    } else {
        false
    }
}

/// Whether `card` may be placed on `target` in the tableau.
pub fn builds(rules: &RuleSet, card: Card, target: Card) -> bool {
    if rules.rank_above(card.rank()) != Some(target.rank()) {
        return false;
    }
    match rules.build_policy {
        BuildPolicy::NoBuild => false,
        BuildPolicy::AnySuit => true,
        BuildPolicy::RedBlack => card.is_red() != target.is_red(),
        BuildPolicy::SameSuit => card.suit() == target.suit(),
    }
}

/// Whether `lower` sitting on `upper` may move with it as one group.
pub fn group_link(rules: &RuleSet, lower: Card, upper: Card) -> bool {
    match rules.move_built_group_policy {
        GroupPolicy::SameAsBuild => builds(rules, lower, upper),
        GroupPolicy::SameSuit => {
            rules.build_policy != BuildPolicy::NoBuild
                && lower.suit() == upper.suit()
                && rules.rank_above(lower.rank()) == Some(upper.rank())
        }
    }
}

/// How much suit information a key keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KeyPlan {
    /// Drop suits everywhere; sound only for suit-blind games.
    pub erase_suits: bool,
    /// Keep only colours on tableau cards.
    pub colour_tableau: bool,
}

impl KeyPlan {
    pub fn for_rules(rules: &RuleSet) -> KeyPlan {
        KeyPlan {
            erase_suits: suit_blind(rules),
            colour_tableau: false,
        }
    }
}

/// Games in which suits play no part at all.
pub fn suit_blind(rules: &RuleSet) -> bool {
    let builds_blind = matches!(
        rules.build_policy,
        BuildPolicy::AnySuit | BuildPolicy::NoBuild
    );
    let groups_blind = rules.move_built_group == GroupMoves::No
        || rules.move_built_group_policy == GroupPolicy::SameAsBuild;
    builds_blind && groups_blind && !rules.has_suit_foundations()
}

/// Builds canonical keys, reusing scratch space between calls.
#[derive(Debug, Default)]
pub struct KeyBuilder {
    pub plan: KeyPlan,
    scratch: Vec<u8>,
    ranges: Vec<(u32, u32)>,
}

impl KeyBuilder {
    pub fn new(plan: KeyPlan) -> KeyBuilder {
        KeyBuilder {
            plan,
            ..KeyBuilder::default()
        }
    }

    fn code(&self, c: Card, tableau: bool) -> u8 {
        if self.plan.erase_suits {
            c.rank() << 2
        } else if tableau && self.plan.colour_tableau {
            c.rank() << 2 | c.is_red() as u8
        } else {
            c.code()
        }
    }

    /// Writes the key of `s` into `out`, replacing its contents. Equal keys
    /// mean positions that play identically.
    pub fn key(&mut self, rules: &RuleSet, s: &GameState, out: &mut Vec<u8>) {
        const END: u8 = 0xFF;
        out.clear();
        self.scratch.clear();
        self.ranges.clear();
        for p in &s.piles {
            let start = self.scratch.len() as u32;
            for (k, &c) in p.cards.iter().enumerate() {
                let hidden = if k < p.hidden { 0x80 } else { 0 };
                let b = self.code(c, true) | hidden;
                self.scratch.push(b);
            }
            self.ranges.push((start, self.scratch.len() as u32));
        }
        if s.piles_interchangeable(rules) {
            let scratch = &self.scratch;
            self.ranges.sort_unstable_by(|a, b| {
                let (x, y) = (
                    &scratch[a.0 as usize..a.1 as usize],
                    &scratch[b.0 as usize..b.1 as usize],
                );
                x.len().cmp(&y.len()).then_with(|| x.cmp(y))
            });
        }
        for &(a, b) in &self.ranges {
            out.extend_from_slice(&self.scratch[a as usize..b as usize]);
            out.push(END);
        }

        let decks = s.foundations.len() / 4;
        if decks == 2 {
            for suit in 0..4 {
                let (a, b) = (s.foundations[suit], s.foundations[suit + 4]);
                out.push(a.min(b));
                out.push(a.max(b));
            }
        } else {
            out.extend_from_slice(&s.foundations);
        }
        if let Some(&top) = s.hole.last() {
            out.push(self.code(top, false));
            out.push(s.hole.len() as u8);
        }

        let cell_start = out.len();
        for c in &s.cells {
            out.push(c.map_or(0, |c| self.code(c, false)));
        }
        out[cell_start..].sort_unstable();

        for &c in &s.stock {
            out.push(self.code(c, false));
        }
        out.push(END);
        for &c in &s.waste {
            out.push(self.code(c, false));
        }
        out.push(END);
        let reserve_start = out.len();
        for &c in &s.reserve {
            out.push(self.code(c, false));
        }
        if !rules.reserve_stacked {
            out[reserve_start..].sort_unstable();
        }
        out.push(END);
    }
}
