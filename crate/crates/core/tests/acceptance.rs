//! One line per acceptance criterion, then a single assertion that all
//! of them passed. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use domineering::cgt::{outcome_of_value, parse_value, render_value, value, GameValue};
use domineering::knowledge::{
    explain, replay, saturate, seeds, tail_theorem, BoundSide, Horizon, KnowledgeBase, Provenance,
    Record, Rule, RuleSet, TraceNode,
};
use domineering::search::{oracle_outcome, ORACLE_MAX_EMPTY};
use domineering::strategy::{
    mirror_strategy, verify_vs_exhaustive, PieceLimits, Recipes, StrategyError, VerifyLimits,
};
use domineering::{
    BoardSpec, OutcomeClass, OutcomeSet, Player, Position, SearchLimits, Solver, Topology,
    ValueLimits,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

fn oc(code: &str) -> OutcomeClass {
    code.parse().expect("outcome code")
}

fn search(spec: BoardSpec) -> Option<OutcomeClass> {
    let pos = Position::empty(spec).expect("board fits");
    Solver::new(SearchLimits::default()).outcome(&pos).outcome
}

fn val(spec: BoardSpec) -> GameValue {
    value(&Position::empty(spec).expect("board fits"), ValueLimits::default()).expect("value within limits")
}

fn within(started: Instant, limit: Duration) -> Result<(), String> {
    let t = started.elapsed();
    if t > limit {
        Err(format!("took {t:?}, over {limit:?}"))
    } else {
        Ok(())
    }
}

fn standard_kb() -> (KnowledgeBase, Vec<Record>, Duration) {
    let records = seeds::standard(SearchLimits::default());
    let mut kb = KnowledgeBase::from_records(records.clone()).expect("seeds agree");
    let t = Instant::now();
    saturate(&mut kb, Horizon::default(), RuleSet::default()).expect("no contradiction");
    (kb, records, t.elapsed())
}

fn width2_golden() -> Check {
    let t = Instant::now();
    let want = "V 1 1 H V 1 1 H V 1 1 H 2";
    let got: Vec<String> = (1..=13)
        .map(|n| search(BoardSpec::rect(2, n)).map_or("?".into(), |c| c.code().to_string()))
        .collect();
    let got = got.join(" ");
    if got != want {
        return Err(format!("got {got}, want {want}"));
    }
    within(t, Duration::from_secs(300))?;
    Ok(format!("2x1..2x13 = {got} in {:?}", t.elapsed()))
}

fn small_boards() -> Check {
    let t = Instant::now();
    let cases = [
        ((3, 4), "H"),
        ((3, 5), "H"),
        ((3, 6), "H"),
        ((3, 7), "H"),
        ((5, 5), "2"),
        ((7, 1), "V"),
        ((7, 2), "1"),
        ((7, 3), "V"),
    ];
    for ((w, l), want) in cases {
        let got = search(BoardSpec::rect(w, l));
        if got != Some(oc(want)) {
            return Err(format!("{w}x{l}: got {got:?}, want {want}"));
        }
    }
    within(t, Duration::from_secs(600))?;
    let core = t.elapsed();
    let stretch = search(BoardSpec::rect(7, 4));
    if stretch != Some(OutcomeClass::H) {
        return Err(format!("7x4: got {stretch:?}, want H"));
    }
    Ok(format!("{} boards in {core:?}; 7x4 = H in {:?}", cases.len(), t.elapsed() - core))
}

fn value_regressions() -> Check {
    let t = Instant::now();
    let cases = [
        ((9, 1), "4"),
        ((9, 2), "3/2|0||-1/2|-5/2"),
        ((11, 1), "5"),
        ((11, 2), "1|{1/2|-1||-3/2|-7/2}"),
    ];
    for ((w, l), want) in cases {
        let got = val(BoardSpec::rect(w, l));
        if got != parse_value(want).expect("notation") {
            return Err(format!("{w}x{l}: got {}, want {want}", render_value(got)));
        }
    }
    let g = val(BoardSpec::rect(9, 2));
    let sum = g.add(g);
    let want = parse_value("1|-1/2||-1|-5/2").expect("notation");
    if sum != want {
        return Err(format!("9x2 + 9x2 = {}", render_value(sum)));
    }
    let half = parse_value("-1/2").expect("notation");
    if !(sum.leq(half) && sum != half) {
        return Err("9x2 + 9x2 is not below -1/2".into());
    }
    within(t, Duration::from_secs(600))?;
    let core = t.elapsed();
    let stretch = val(BoardSpec::rect(9, 3));
    if stretch != parse_value("5|3||11/4|1/4").expect("notation") {
        return Err(format!("9x3 = {}", render_value(stretch)));
    }
    Ok(format!("5 values in {core:?}; 9x3 in {:?}", t.elapsed() - core))
}

fn rules_used(node: &TraceNode, out: &mut BTreeSet<Rule>) {
    for step in &node.steps {
        if let Provenance::Derived { rule, .. } = step.provenance {
            out.insert(rule);
        }
        for p in &step.premises {
            rules_used(p, out);
        }
    }
}

fn derivation(kb: &KnowledgeBase, took: Duration) -> Check {
    let max = Horizon::default().max_length;
    let get = |w: u16, n: u16| kb.get(&BoardSpec::rect(w, n));
    let h = OutcomeSet::from(OutcomeClass::H);

    // (a)
    let row2 = "V 1 1 H V 1 1 H V 1 1 H 2 1 1 H H 1 1 H H H 1 H H H 1";
    for (i, want) in row2.split(' ').enumerate() {
        let n = i as u16 + 1;
        if get(2, n) != oc(want).into() {
            return Err(format!("(a) 2x{n} = {}, want {want}", get(2, n)));
        }
    }
    if let Some(n) = (28..=max).find(|&n| get(2, n) != h) {
        return Err(format!("(a) 2x{n} = {}", get(2, n)));
    }
    // (b), (c)
    for (w, n0, p) in [(3, 4, 4), (5, 6, 2)] {
        match tail_theorem(kb, w) {
            Some(c) if c.n0 == n0 && c.p == p && c.check(kb) => {}
            other => return Err(format!("width {w} tail: {other:?}")),
        }
    }
    // (d)
    for n in [9, 11] {
        if kb.provenance_summary(&BoardSpec::rect(7, n)) != Some("asserted") {
            return Err(format!("(d) 7x{n} is not an asserted seed"));
        }
    }
    if let Some(n) = (8..=max).find(|&n| get(7, n) != h) {
        return Err(format!("(d) 7x{n} = {}", get(7, n)));
    }
    // (e)
    let open: Vec<u16> = (1..=max).filter(|&n| get(4, n).len() > 1).collect();
    if open != [19, 21] {
        return Err(format!("(e) width 4 unsolved at {open:?}"));
    }
    // (f)
    let c9 = tail_theorem(kb, 9).filter(|c| c.check(kb) && c.n0 <= 22);
    let c11 = tail_theorem(kb, 11).filter(|c| c.check(kb) && c.n0 == 56);
    if c9.is_none() || c11.is_none() {
        return Err(format!("(f) tails {:?} {:?}", tail_theorem(kb, 9), tail_theorem(kb, 11)));
    }
    for (w, from) in [(9, 22), (11, 56)] {
        if let Some(n) = (from..=max).find(|&n| get(w, n) != h) {
            return Err(format!("(f) {w}x{n} = {}", get(w, n)));
        }
        let mut rules = BTreeSet::new();
        rules_used(&explain(kb, &BoardSpec::rect(w, from)).expect("known"), &mut rules);
        if !rules.contains(&Rule::ValueSign) {
            return Err(format!("(f) {w}x{from} not derived from value bounds"));
        }
    }
    // (g)
    let k612 = BoardSpec::rect(6, 12);
    let mut rules = BTreeSet::new();
    rules_used(&explain(kb, &k612).expect("known"), &mut rules);
    if kb.get(&k612) != h || !rules.contains(&Rule::Square) || !rules.contains(&Rule::HConcat) {
        return Err(format!("(g) 6x12 = {} via {rules:?}", kb.get(&k612)));
    }
    if took > Duration::from_secs(60) {
        return Err(format!("saturation took {took:?}"));
    }
    Ok(format!(
        "(a)-(g) hold; width 9 tail from {}, width 11 tail period {}; saturation {took:?}",
        c9.map_or(0, |c| c.n0),
        c11.map_or(0, |c| c.p)
    ))
}

fn torus_suite(kb: &KnowledgeBase) -> Check {
    let t = Instant::now();
    let want = ["1", "H", "H", "2", "1", "H", "H", "2", "1", "H", "H", "H"];
    for (i, w) in want.iter().enumerate() {
        let key = BoardSpec::with_topology(Topology::Torus, 2, i as u16 + 2);
        if kb.get(&key) != oc(w).into() {
            return Err(format!("torus {key}: {}, want {w}", kb.get(&key)));
        }
    }
    let t1 = BoardSpec::with_topology(Topology::Torus, 2, 1);
    if search(t1).map(OutcomeSet::from) != Some(kb.get(&t1)) {
        return Err(format!("torus 2x1: {} disagrees with search", kb.get(&t1)));
    }
    for (n, w) in [(1, "2"), (2, "1"), (3, "2"), (4, "1")] {
        let got = search(BoardSpec::with_topology(Topology::Torus, n, n));
        if got != Some(oc(w)) {
            return Err(format!("{n}x{n} torus: {got:?}, want {w}"));
        }
    }
    for n in 1..=4 {
        let v = |top| val(BoardSpec::with_topology(top, 2, n));
        let (ch, r, t, cv) = (
            v(Topology::CylinderH),
            v(Topology::Rectangle),
            v(Topology::Torus),
            v(Topology::CylinderV),
        );
        if !(ch.leq(r) && ch.leq(t) && r.leq(cv) && t.leq(cv)) {
            return Err(format!("topology chain fails at 2x{n}"));
        }
    }
    within(t, Duration::from_secs(900))?;
    Ok(format!("torus 2x1..2x13, square tori 1..4, chain n <= 4 in {:?}", t.elapsed()))
}

fn strategies(kb: &KnowledgeBase) -> Check {
    let t = Instant::now();
    let mut recipes = Recipes::new(kb, PieceLimits::default());
    let mut cases: Vec<(u16, u16, OutcomeClass)> = (8..=12).map(|n| (3, n, OutcomeClass::H)).collect();
    cases.extend([16, 17, 20].map(|n| (2, n, OutcomeClass::H)));
    cases.push((2, 13, OutcomeClass::Second));
    // 2x14 is a first-player win, so Hepzibah's strategy there is the one
    // for moving first
    cases.push((2, 14, OutcomeClass::First));
    let mut checked = 0;
    for (w, n, claim) in cases {
        let spec = BoardSpec::rect(w, n);
        let s = recipes
            .strategy_for(w, n, claim)
            .map_err(|e| format!("{spec}: {e}"))?;
        if s.role(Player::Horizontal).is_none() {
            return Err(format!("{spec}: no side for Hepzibah"));
        }
        match verify_vs_exhaustive(&s, spec, VerifyLimits::default()) {
            Ok(true) => checked += 1,
            other => return Err(format!("{spec} [{}]: {other:?}", s.recipe())),
        }
    }
    if !matches!(
        recipes.strategy_for(2, 14, OutcomeClass::H),
        Err(StrategyError::OutcomeMismatch { .. })
    ) {
        return Err("2x14 accepted as an H board".into());
    }
    for n in [3, 4] {
        let sq = BoardSpec::rect(n, n);
        let s = mirror_strategy(sq, sq).map_err(|e| e.to_string())?;
        if verify_vs_exhaustive(&s, s.spec, VerifyLimits::default()) != Ok(true) {
            return Err(format!("mirror on two {n}x{n} squares fails"));
        }
        checked += 1;
    }
    within(t, Duration::from_secs(1800))?;
    Ok(format!("{checked} strategies won every line in {:?}", t.elapsed()))
}

fn random_position(rng: &mut StdRng, max_cells: u16) -> Position {
    loop {
        let top = Topology::ALL[rng.gen_range(0..4)];
        let w = rng.gen_range(1..=max_cells);
        let l = rng.gen_range(1..=max_cells / w);
        let Ok(spec) = BoardSpec::new(top, w, l) else {
            continue;
        };
        let Ok(empty) = Position::empty(spec) else {
            continue;
        };
        let fill = rng.gen_range(0.0..0.5);
        let mut bits = 0u128;
        for i in 0..spec.cells() {
            if rng.gen_bool(fill) {
                bits |= 1 << i;
            }
        }
        if let Ok(p) = Position::from_occupied(spec, bits) {
            return p;
        }
        return empty;
    }
}

fn properties(kb: &KnowledgeBase, records: &[Record]) -> Check {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut solver = Solver::new(SearchLimits::default());

    // oracle equivalence
    let mut n = 0;
    while n < 600 {
        let p = random_position(&mut rng, 18);
        if p.empty_count() > ORACLE_MAX_EMPTY {
            continue;
        }
        let fast = solver.outcome(&p).outcome;
        if fast != oracle_outcome(&p).ok() {
            return Err(format!("oracle disagrees on {p:?}"));
        }
        n += 1;
    }

    // negation, G - G, value against outcome, quarter turns
    for _ in 0..300 {
        let p = random_position(&mut rng, 14);
        let g = value(&p, ValueLimits::default()).map_err(|e| e.to_string())?;
        if g.neg().neg() != g || g.sub(g) != GameValue::zero() {
            return Err(format!("negation fails on {p:?}"));
        }
        if Some(outcome_of_value(g)) != solver.outcome(&p).outcome {
            return Err(format!("value and search disagree on {p:?}"));
        }
        if let Ok(r) = p.rot90() {
            let h = value(&r, ValueLimits::default()).map_err(|e| e.to_string())?;
            if h != g.neg() {
                return Err(format!("quarter turn does not negate {p:?}"));
            }
        }
    }

    // soundness: every fact small enough to search agrees, and every
    // derivation replays
    let mut swept = 0;
    for (key, set) in kb.facts() {
        if key.cells() <= 24 && set.len() < 4 {
            if let Some(c) = search(*key) {
                if !set.contains(c) {
                    return Err(format!("{key}: base says {set}, search says {c}"));
                }
                swept += 1;
            }
        }
        let tree = explain(kb, key).map_err(|e| e.to_string())?;
        match replay(&tree) {
            Ok(s) if s == *set => {}
            other => return Err(format!("{key}: replay gives {other:?}")),
        }
    }

    // idempotence
    let mut again = kb.clone();
    let report = saturate(&mut again, Horizon::default(), RuleSet::default()).map_err(|e| e.to_string())?;
    if report.refinements != 0 || again.facts().ne(kb.facts()) {
        return Err(format!("second saturation changed the base: {report:?}"));
    }

    // dropping any asserted seed only widens what is known
    let mut dropped = 0;
    for (i, r) in records.iter().enumerate() {
        let asserted = match r {
            Record::Fact(f) => matches!(f.provenance, Provenance::Asserted { .. }),
            Record::Bound(b) => matches!(b.provenance, Provenance::Asserted { .. }),
        };
        if !asserted {
            continue;
        }
        let rest = records.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone());
        let mut weaker = KnowledgeBase::from_records(rest).map_err(|e| e.to_string())?;
        saturate(&mut weaker, Horizon::default(), RuleSet::default())
            .map_err(|e| format!("without seed {i}: {e}"))?;
        for (key, set) in kb.facts() {
            if !set.is_subset(weaker.get(key)) {
                return Err(format!("without seed {i}, {key} narrowed to {}", weaker.get(key)));
            }
        }
        dropped += 1;
    }
    let k31 = BoardSpec::rect(2, 31);
    let without31: Vec<Record> = records
        .iter()
        .filter(|r| !matches!(r, Record::Bound(b) if b.key == k31 && b.side == BoundSide::Exact))
        .cloned()
        .collect();
    let mut weaker = KnowledgeBase::from_records(without31).map_err(|e| e.to_string())?;
    saturate(&mut weaker, Horizon::default(), RuleSet::default()).map_err(|e| e.to_string())?;
    if weaker.get(&k31).len() < 2 {
        return Err(format!("2x31 still {} without its value", weaker.get(&k31)));
    }

    Ok(format!(
        "{n} oracle positions, 300 value checks, {swept} facts searched, {dropped} seeds dropped in {:?}",
        t.elapsed()
    ))
}

#[test]
fn acceptance() {
    let (kb, records, took) = standard_kb();
    let results: Vec<(&str, Check)> = vec![
        ("width-2 golden table", width2_golden()),
        ("small-board golden set", small_boards()),
        ("value regressions", value_regressions()),
        ("derivation reproduction", derivation(&kb, took)),
        ("torus suite", torus_suite(&kb)),
        ("strategy verification", strategies(&kb)),
        ("property suites", properties(&kb, &records)),
    ];
    let mut failed = Vec::new();
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
