//! A deliberately plain second implementation of the move rules, used to
//! cross-check the solver by exhaustive reachability.

use std::collections::HashSet;

use patience::deal::Layout;
use patience::rules::{BuildPolicy, DealType, GroupMoves, GroupPolicy, RuleSet, SpacesPolicy};

/// (rank, suit) with suits 0..4 ordered clubs, diamonds, hearts, spades.
type C = (u8, u8);

fn red(c: C) -> bool {
    c.1 == 1 || c.1 == 2
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
struct Pile {
    down: usize,
    cards: Vec<C>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct S {
    piles: Vec<Pile>,
    /// (suit, deck) slots holding the number of cards built.
    found: Vec<u8>,
    hole_top: Option<u8>,
    hole_len: usize,
    cells: Vec<Option<C>>,
    stock: Vec<C>,
    waste: Vec<C>,
    reserve: Vec<C>,
    /// Foundation slot the previous move built on, tracked only when
    /// worrying that card straight back is banned.
    just_built: Option<usize>,
}

pub struct Oracle<'a> {
    r: &'a RuleSet,
    base: u8,
    max: u8,
    total: usize,
    /// Forbid returning a card to the tableau on the move after it was built.
    pub ban_immediate_worry_back: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reach {
    Won,
    Lost,
    TooBig,
}

impl<'a> Oracle<'a> {
    pub fn new(r: &'a RuleSet, layout: &Layout) -> Oracle<'a> {
        Oracle {
            r,
            base: layout.base_rank,
            max: r.max_rank,
            total: 4 * r.max_rank as usize * if r.two_decks { 2 } else { 1 },
            ban_immediate_worry_back: false,
        }
    }

    fn start(&self, layout: &Layout) -> S {
        let c = |card: &patience::card::Card| (card.rank(), card.suit().index() as u8);
        let decks = if self.r.two_decks { 2 } else { 1 };
        let mut found = vec![0u8; 4 * decks];
        let mut hole_top = None;
        let mut hole_len = 0;
        for s in &layout.foundation_seeds {
            let (rank, suit) = c(s);
            if self.r.hole {
                hole_top = Some(rank);
                hole_len += 1;
            } else {
                let slot = (0..decks)
                    .map(|d| d * 4 + suit as usize)
                    .find(|&i| found[i] == 0)
                    .unwrap();
                found[slot] = 1;
            }
        }
        S {
            piles: layout
                .tableau
                .iter()
                .map(|p| Pile {
                    down: p.face_down,
                    cards: p.cards.iter().map(c).collect(),
                })
                .collect(),
            found,
            hole_top,
            hole_len,
            cells: layout.cells.iter().map(|x| x.as_ref().map(c)).collect(),
            stock: layout.stock.iter().map(c).collect(),
            waste: vec![],
            reserve: layout.reserve.iter().map(c).collect(),
            just_built: None,
        }
    }

    fn home(&self, s: &S) -> usize {
        s.hole_len + s.found.iter().map(|&n| n as usize).sum::<usize>()
    }

    fn next_rank(&self, rank: u8) -> u8 {
        if rank == self.max {
            1
        } else {
            rank + 1
        }
    }

    /// Rank wanted next by a foundation holding `n` cards.
    fn wanted(&self, n: u8) -> Option<u8> {
        if n as usize >= self.max as usize {
            return None;
        }
        let mut rank = self.base;
        for _ in 0..n {
            rank = self.next_rank(rank);
        }
        Some(rank)
    }

    /// Can `c` go on tableau card `t`?
    fn on(&self, c: C, t: C) -> bool {
        if !self.rank_follows(c.0, t.0) {
            return false;
        }
        match self.r.build_policy {
            BuildPolicy::NoBuild => false,
            BuildPolicy::AnySuit => true,
            BuildPolicy::RedBlack => red(c) != red(t),
            BuildPolicy::SameSuit => c.1 == t.1,
        }
    }

    fn linked(&self, lower: C, upper: C) -> bool {
        match self.r.move_built_group_policy {
            GroupPolicy::SameAsBuild => self.on(lower, upper),
            GroupPolicy::SameSuit => {
                self.r.build_policy != BuildPolicy::NoBuild
                    && lower.1 == upper.1
                    && self.rank_follows(lower.0, upper.0)
            }
        }
    }

    fn rank_follows(&self, lower: u8, upper: u8) -> bool {
        upper == lower + 1
    }

    /// Face-up run length on top of a pile under the grouping rule.
    fn run(&self, p: &Pile) -> usize {
        let up = &p.cards[p.down..];
        if up.is_empty() {
            return 0;
        }
        let mut k = 1;
        while k < up.len() && self.linked(up[up.len() - k], up[up.len() - k - 1]) {
            k += 1;
        }
        k
    }

    fn group_sizes(&self, p: &Pile) -> Vec<usize> {
        let run = self.run(p);
        if run == 0 {
            return vec![];
        }
        if self.r.build_policy == BuildPolicy::NoBuild {
            return vec![1];
        }
        match self.r.move_built_group {
            GroupMoves::No => vec![1],
            GroupMoves::Yes | GroupMoves::PartialIfCardAboveBuildable => (1..=run).collect(),
            GroupMoves::WholePile => vec![run],
        }
    }

    fn space_takes(&self, s: &S, bottom: C) -> bool {
        match self.r.spaces_policy {
            SpacesPolicy::None => false,
            SpacesPolicy::Any => true,
            SpacesPolicy::Kings => bottom.0 == self.max,
            SpacesPolicy::AutoFromReserve => s.reserve.is_empty(),
            SpacesPolicy::AutoFromWaste => s.waste.is_empty() && s.stock.is_empty(),
        }
    }

    fn hole_takes(&self, s: &S, c: C) -> bool {
        match s.hole_top {
            None => true,
            Some(t) => {
                let d = t.abs_diff(c.0);
                d == 1 || d == self.max - 1 && self.max > 1
            }
        }
    }

    /// Foundation slots that accept `c` now.
    fn slots_for(&self, s: &S, c: C) -> Vec<usize> {
        if !self.r.foundations_present || self.r.hole || self.r.foundations_complete_pile_only {
            return vec![];
        }
        (0..s.found.len())
            .filter(|&i| i % 4 == c.1 as usize && self.wanted(s.found[i]) == Some(c.0))
            .collect()
    }

    fn flip(p: &mut Pile) {
        if p.down > 0 && p.down >= p.cards.len() {
            p.down = p.cards.len().saturating_sub(1);
        }
    }

    fn successors(&self, prev: &S) -> Vec<S> {
        let r = self.r;
        let mut fresh = prev.clone();
        fresh.just_built = None;
        let s = &fresh;
        let mut out = Vec::new();
        if self.home(s) == self.total {
            return out;
        }
        let spaces: Vec<usize> = (0..s.piles.len())
            .filter(|&j| s.piles[j].cards.is_empty())
            .collect();

        // Refills that must happen before anything else.
        if let Some(&j) = spaces.first() {
            let forced = match r.spaces_policy {
                SpacesPolicy::AutoFromReserve if !s.reserve.is_empty() => {
                    let mut t = s.clone();
                    let c = t.reserve.pop().unwrap();
                    t.piles[j].cards.push(c);
                    Some(t)
                }
                SpacesPolicy::AutoFromWaste if !s.waste.is_empty() => {
                    let mut t = s.clone();
                    let c = t.waste.pop().unwrap();
                    t.piles[j].cards.push(c);
                    Some(t)
                }
                SpacesPolicy::AutoFromWaste if !s.stock.is_empty() => {
                    let mut t = s.clone();
                    let c = t.stock.pop().unwrap();
                    t.piles[j].cards.push(c);
                    Some(t)
                }
                _ => None,
            };
            if let Some(t) = forced {
                return vec![t];
            }
        }

        // Single cards that can leave their zone: (zone tag, index, card).
        #[derive(Clone, Copy)]
        enum From {
            Pile(usize),
            Cell(usize),
            Reserve(usize),
            Waste,
            Found(usize),
        }
        let mut singles: Vec<(From, C)> = Vec::new();
        for (i, p) in s.piles.iter().enumerate() {
            if let Some(&c) = p.cards.last() {
                singles.push((From::Pile(i), c));
            }
        }
        for (i, c) in s.cells.iter().enumerate() {
            if let Some(c) = *c {
                singles.push((From::Cell(i), c));
            }
        }
        let n = s.reserve.len();
        let avail: Vec<usize> = if r.reserve_stacked {
            (n.saturating_sub(1)..n).collect()
        } else {
            (0..n).collect()
        };
        for i in avail {
            singles.push((From::Reserve(i), s.reserve[i]));
        }
        if let Some(&c) = s.waste.last() {
            singles.push((From::Waste, c));
        }
        let take = |t: &mut S, f: From| -> C {
            match f {
                From::Pile(i) => {
                    let c = t.piles[i].cards.pop().unwrap();
                    Self::flip(&mut t.piles[i]);
                    c
                }
                From::Cell(i) => t.cells[i].take().unwrap(),
                From::Reserve(i) => t.reserve.remove(i),
                From::Waste => t.waste.pop().unwrap(),
                From::Found(i) => {
                    t.found[i] -= 1;
                    (0, 0)
                }
            }
        };

        // To foundations or the hole.
        for &(f, c) in &singles {
            if r.hole {
                if self.hole_takes(s, c) {
                    let mut t = s.clone();
                    take(&mut t, f);
                    t.hole_top = Some(c.0);
                    t.hole_len += 1;
                    out.push(t);
                }
                continue;
            }
            for slot in self.slots_for(s, c) {
                let mut t = s.clone();
                take(&mut t, f);
                t.found[slot] += 1;
                if self.ban_immediate_worry_back {
                    t.just_built = Some(slot);
                }
                out.push(t);
            }
        }
        if r.foundations_present && !r.hole && r.foundations_complete_pile_only {
            let m = self.max as usize;
            for (i, p) in s.piles.iter().enumerate() {
                let up = &p.cards[p.down..];
                if up.len() < m {
                    continue;
                }
                let run = &up[up.len() - m..];
                let ok = (0..m).all(|k| run[k].1 == run[0].1 && run[k].0 as usize == m - k);
                if !ok {
                    continue;
                }
                for slot in
                    (0..s.found.len()).filter(|&x| x % 4 == run[0].1 as usize && s.found[x] == 0)
                {
                    let mut t = s.clone();
                    let len = t.piles[i].cards.len();
                    t.piles[i].cards.truncate(len - m);
                    Self::flip(&mut t.piles[i]);
                    t.found[slot] = m as u8;
                    out.push(t);
                }
            }
        }

        // Tableau to tableau, any group size allowed, every empty target.
        for (i, p) in s.piles.iter().enumerate() {
            for k in self.group_sizes(p) {
                let bottom = p.cards[p.cards.len() - k];
                for (j, q) in s.piles.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let ok = match q.cards.last() {
                        Some(&top) => self.on(bottom, top),
                        None => self.space_takes(s, bottom),
                    };
                    if ok {
                        let mut t = s.clone();
                        let at = t.piles[i].cards.len() - k;
                        let moved: Vec<C> = t.piles[i].cards.drain(at..).collect();
                        Self::flip(&mut t.piles[i]);
                        t.piles[j].cards.extend(moved);
                        out.push(t);
                    }
                }
            }
        }

        // Tableau tops into any empty cell.
        for (i, p) in s.piles.iter().enumerate() {
            if p.cards.is_empty() {
                continue;
            }
            for cell in 0..s.cells.len() {
                if s.cells[cell].is_none() {
                    let mut t = s.clone();
                    let c = take(&mut t, From::Pile(i));
                    t.cells[cell] = Some(c);
                    out.push(t);
                }
            }
        }

        // Cells, reserve, waste and (when allowed) foundations onto the tableau.
        let mut feeders: Vec<(From, C)> = singles
            .iter()
            .copied()
            .filter(|(f, _)| !matches!(f, From::Pile(_)))
            .collect();
        if r.foundations_removable
            && r.foundations_present
            && !r.hole
            && !r.foundations_complete_pile_only
        {
            for slot in 0..s.found.len() {
                if s.found[slot] > 0 && prev.just_built != Some(slot) {
                    let mut rank = self.base;
                    for _ in 1..s.found[slot] {
                        rank = self.next_rank(rank);
                    }
                    feeders.push((From::Found(slot), (rank, (slot % 4) as u8)));
                }
            }
        }
        for (f, c) in feeders {
            for (j, q) in s.piles.iter().enumerate() {
                let ok = match q.cards.last() {
                    Some(&top) => self.on(c, top),
                    None => self.space_takes(s, c),
                };
                if ok {
                    let mut t = s.clone();
                    take(&mut t, f);
                    t.piles[j].cards.push(c);
                    out.push(t);
                }
            }
        }

        // The stock.
        match r.stock_deal_type {
            DealType::Waste => {
                if !s.stock.is_empty() {
                    let mut t = s.clone();
                    for _ in 0..r.stock_deal_count.min(s.stock.len()) {
                        let c = t.stock.pop().unwrap();
                        t.waste.push(c);
                    }
                    out.push(t);
                } else if r.stock_redeal && !s.waste.is_empty() {
                    let mut t = s.clone();
                    t.stock = t.waste.drain(..).rev().collect();
                    out.push(t);
                }
            }
            DealType::TableauPiles => {
                if !s.stock.is_empty() && !s.piles.is_empty() {
                    let mut t = s.clone();
                    for j in 0..s.piles.len().min(s.stock.len()) {
                        let c = t.stock.pop().unwrap();
                        t.piles[j].cards.push(c);
                    }
                    out.push(t);
                }
            }
        }
        out
    }

    /// Sorts interchangeable piles and cells; leaves positions alone
    /// while a stock still deals across the piles.
    fn normal(&self, mut s: S) -> S {
        if self.r.stock_deal_type != DealType::TableauPiles || s.stock.is_empty() {
            s.piles.sort();
        }
        s.cells.sort();
        s
    }

    /// Whether a won position is reachable, exploring at most `limit`
    /// distinct positions.
    pub fn solve(&self, layout: &Layout, limit: usize) -> Reach {
        let start = self.normal(self.start(layout));
        let mut seen = HashSet::new();
        let mut stack = vec![start.clone()];
        seen.insert(start);
        while let Some(s) = stack.pop() {
            if self.home(&s) == self.total {
                return Reach::Won;
            }
            for t in self.successors(&s) {
                let t = self.normal(t);
                if seen.insert(t.clone()) {
                    if seen.len() > limit {
                        return Reach::TooBig;
                    }
                    stack.push(t);
                }
            }
        }
        Reach::Lost
    }
}
