use domineering::knowledge::{
    alternatives, atlas, explain, parse_records, replay, saturate, seeds, BoundSide, Horizon,
    KnowledgeBase, Record, Rule, RuleSet,
};
use domineering::{BoardSpec, OutcomeClass, SearchLimits, Topology};

fn saturated(records: Vec<Record>) -> KnowledgeBase {
    let mut kb = KnowledgeBase::from_records(records).unwrap();
    saturate(&mut kb, Horizon::default(), RuleSet::default()).unwrap();
    kb
}

#[test]
fn width_two_row_and_its_traces() {
    let records = seeds::standard(SearchLimits::default());
    let kb = saturated(records.clone());

    let grid = atlas(&kb, Topology::Rectangle, 11, 40);
    let row: Vec<&str> = grid.rows[1].iter().map(|c| c.label.as_str()).collect();
    assert!(row[27..].iter().all(|l| *l == "H"), "{row:?}");
    let four: Vec<u16> = (1..=40)
        .filter(|&n| grid.cell(4, n).unwrap().outcomes.len() > 1)
        .collect();
    assert_eq!(four, [19, 21]);

    // neither split settles 2x26 alone; together they do
    let k26 = BoardSpec::rect(2, 26);
    let splits: Vec<Vec<u16>> = alternatives(&kb, &k26)
        .into_iter()
        .filter(|a| a.rule == Rule::HConcat)
        .map(|a| a.premises.iter().map(|k| k.length).collect())
        .collect();
    assert!(splits.contains(&vec![24, 2]) || splits.contains(&vec![2, 24]), "{splits:?}");
    assert!(splits.contains(&vec![13, 13]), "{splits:?}");

    let tree = explain(&kb, &k26).unwrap();
    assert_eq!(replay(&tree).unwrap(), kb.get(&k26));

    // the base file round-trips
    let text: String = kb.to_records().iter().map(|r| r.to_line() + "\n").collect();
    let back = KnowledgeBase::from_records(parse_records(&text).unwrap()).unwrap();
    assert!(back.facts().eq(kb.facts()));
}

#[test]
fn without_the_value_of_31() {
    let k31 = BoardSpec::rect(2, 31);
    let records: Vec<Record> = seeds::standard(SearchLimits::default())
        .into_iter()
        .filter(|r| !matches!(r, Record::Bound(b) if b.key == k31 && b.side == BoundSide::Exact))
        .collect();
    let kb = saturated(records);
    let cell = kb.get(&k31);
    assert!(cell.len() > 1 && cell.contains(OutcomeClass::H), "{cell}");
    assert_eq!(kb.get(&BoardSpec::rect(2, 30)), OutcomeClass::H.into());
}

#[test]
fn two_row_torus_plays_like_the_glued_cylinder() {
    use domineering::search::outcome;
    use domineering::{Player, Position};
    for n in 1..=9 {
        let torus = Position::empty(BoardSpec::with_topology(Topology::Torus, 2, n)).unwrap();
        let cyl = Position::empty(BoardSpec::with_topology(Topology::CylinderH, 2, n)).unwrap();
        for p in [Player::Vertical, Player::Horizontal] {
            let a: Vec<_> = torus.legal_moves(p).iter().map(|m| m.cells).collect();
            let b: Vec<_> = cyl.legal_moves(p).iter().map(|m| m.cells).collect();
            assert_eq!(a, b, "2x{n} {p}");
        }
        let limits = SearchLimits::default();
        assert_eq!(outcome(&torus, limits).outcome, outcome(&cyl, limits).outcome, "2x{n}");
    }
}
