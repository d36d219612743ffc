use super::oracle::{Oracle, Reach};
use patience::card::Card;
use patience::deal::Layout;
use patience::engine::{GameState, Move, Zone};
use patience::search::{dfs, verify_solution, SearchLimits, StreamlinerSet, Verdict};

fn layout(text: &str) -> Layout {
    Layout::from_json(text).unwrap()
}

fn cards(s: &str) -> Vec<Card> {
    s.split_whitespace().map(|c| c.parse().unwrap()).collect()
}

/// A reduced Klondike deal that can only be won by returning a card from
/// its foundation on the very next move.
pub fn worry_back_right_after_building() {
    let rules = super::game("klondike").with_max_rank(6);
    let l = layout(include_str!("../golden/worry_back.json"));

    let mut banned = Oracle::new(&rules, &l);
    banned.ban_immediate_worry_back = true;
    assert_eq!(banned.solve(&l, 5_000_000), Reach::Lost);
    assert_eq!(Oracle::new(&rules, &l).solve(&l, 5_000_000), Reach::Won);

    for opts in [super::options(&rules), super::plain()] {
        let out = super::run(&rules, &l, &opts, &SearchLimits::default());
        assert_eq!(out.verdict, Verdict::Winnable);
        let sol = out.solution.unwrap();
        verify_solution(&rules, &l, &sol).unwrap();
        let immediate = sol.windows(2).any(|w| {
            matches!((w[0].to, w[1].from), (Zone::Foundation(a), Zone::Foundation(b)) if a == b)
        });
        assert!(immediate, "the win needs an immediate worry-back");
    }
}

/// Base 5♦, stock opening 3C 6C 6D and closing KC 7D 5H QS. Playing the
/// 5H straight from the stock at the start loses; waiting wins.
pub fn canfield_penultimate_stock_card() {
    let rules = super::game("canfield");
    let l = layout(include_str!("../golden/canfield_5d.json"));
    assert_eq!(l.base_rank, 5);
    assert_eq!(l.foundation_seeds, cards("5D"));
    let n = l.stock.len();
    assert_eq!(l.stock[n - 3..], cards("6D 6C 3C")[..]);
    assert_eq!(l.stock[..4], cards("QS 5H 7D KC")[..]);

    let opts = super::options(&rules);
    let out = super::run(&rules, &l, &opts, &SearchLimits::default());
    assert_eq!(out.verdict, Verdict::Winnable);
    verify_solution(&rules, &l, out.solution.as_ref().unwrap()).unwrap();

    let mut early = GameState::initial(&rules, &l).unwrap();
    let five = early.stock.remove(1);
    assert_eq!(five, "5H".parse().unwrap());
    early.foundations[2] += 1;
    let out = dfs(
        &rules,
        &early,
        &opts.dominances,
        StreamlinerSet::default(),
        &SearchLimits::default(),
        None,
    );
    assert_eq!(out.verdict, Verdict::Unwinnable);
}

pub fn worrying_back_five_of_diamonds() {
    let rules = super::game("klondike");
    let l = patience::deal::deal(&rules, 1).unwrap();
    let mut s = GameState::initial(&rules, &l).unwrap();
    s.foundations = vec![0, 5, 0, 0];
    s.piles[0].cards = cards("6S");
    s.piles[0].hidden = 0;
    let mv = Move::new(Zone::Foundation(1), Zone::Tableau(0), 1);
    let mut moves = Vec::new();
    s.legal_moves(&rules, &mut moves);
    assert!(moves.contains(&mv));
    s.apply_unchecked(mv);
    assert_eq!(s.foundation_top(1), Some("4D".parse().unwrap()));
    assert_eq!(s.piles[0].cards, cards("6S 5D"));
}

/// A single forced line longer than the table can hold.
pub fn all_ancestors_memes_out() {
    let rules = patience::rules::parse_rules(
        r#"{"tableau piles": {"count": 1, "build policy": "no-build", "spaces policy": "none"},
            "max rank": 2}"#,
    )
    .unwrap();
    let l = layout(
        r#"{"base_rank":1,"foundation_seeds":[],"cells":[],"reserve":[],
            "tableau":[{"face_down":0,"cards":["2S","AS","2H","AH","2D","AD","2C","AC"]}],"stock":[]}"#,
    );
    let s = GameState::initial(&rules, &l).unwrap();
    let mut key = Vec::new();
    patience::engine::KeyBuilder::new(Default::default()).key(&rules, &s, &mut key);
    let entry = key.len() + patience::table::ENTRY_OVERHEAD;
    let limits = SearchLimits {
        cache_bytes: 3 * entry,
        ..SearchLimits::default()
    };
    let out = dfs(
        &rules,
        &s,
        &Default::default(),
        StreamlinerSet::default(),
        &limits,
        None,
    );
    assert_eq!(out.verdict, Verdict::MemedOut);
    let roomy = dfs(
        &rules,
        &s,
        &Default::default(),
        StreamlinerSet::default(),
        &SearchLimits::default(),
        None,
    );
    assert_eq!(roomy.verdict, Verdict::Winnable);
    assert_eq!(roomy.solution.unwrap().len(), 8);
}
