mod common;

use proptest::prelude::*;
use vwccg::atm::{acceptance_depth, accepting_computation, accepts, analyze, validate_computation, DEFAULT_CONFIG_BUDGET};
use vwccg::derivation::check_certificate;
use vwccg::sat::{brute_force_sat, parse_dimacs, solve_via_ccg, CnfFormula, Literal};
use vwccg::{fixtures, parse, Argument, Atom, Category, Derivation, LexEntry, ParseConfig, Rule, Schema, Slash};

const ATOMS: [&str; 5] = ["A", "B", "C", "S", "NP"];

fn atom() -> impl Strategy<Value = Atom> {
    prop::sample::select(ATOMS.to_vec()).prop_map(|a| Atom::new(a).unwrap())
}

fn slash() -> impl Strategy<Value = Slash> {
    prop_oneof![Just(Slash::Forward), Just(Slash::Backward)]
}

fn category() -> impl Strategy<Value = Category> {
    atom().prop_map(Category::atomic).prop_recursive(3, 24, 3, |inner| {
        (atom(), prop::collection::vec((slash(), inner), 0..4))
            .prop_map(|(t, args)| Category::new(t, args.into_iter().map(|(s, c)| Argument::new(s, c)).collect()))
    })
}

fn schema() -> impl Strategy<Value = Schema> {
    prop_oneof![Just(Schema::Forward), Just(Schema::Backward)]
}

/// A primary `X|Y` and a secondary `Y|Z1..|Zd` that the unrestricted rule
/// with the secondary's slashes must combine.
fn matching_pair() -> impl Strategy<Value = (Schema, Category, Category, Category)> {
    (schema(), category(), category(), prop::collection::vec((slash(), category()), 0..4)).prop_map(
        |(schema, x, y, zs)| {
            let primary = x.extend([Argument::new(schema.slash(), y.clone())]);
            let secondary = y.extend(zs.into_iter().map(|(s, c)| Argument::new(s, c)));
            (schema, x, primary, secondary)
        },
    )
}

fn rename(c: &Category, map: &dyn Fn(Atom) -> Atom) -> Category {
    Category::new(
        map(c.target()),
        c.args()
            .iter()
            .map(|a| Argument::new(a.slash, rename(&a.category, map)))
            .collect(),
    )
}

fn leaf_entry() -> impl Strategy<Value = LexEntry> {
    (prop::option::of(prop::sample::select(vec!["a", "b", "We", "x_1"])), category())
        .prop_map(|(w, c)| LexEntry { word: w.map(String::from), category: c })
}

fn tree() -> impl Strategy<Value = Derivation> {
    leaf_entry().prop_map(Derivation::leaf).prop_recursive(6, 64, 2, |inner| {
        (category(), 0usize..20, inner.clone(), inner).prop_map(|(c, r, l, rt)| Derivation::node(c, r, l, rt))
    })
}

fn formula() -> impl Strategy<Value = CnfFormula> {
    (1usize..=4).prop_flat_map(|n| {
        let literal = (1..=n, any::<bool>()).prop_map(|(v, neg)| if neg { Literal::neg(v) } else { Literal::pos(v) });
        prop::collection::vec(prop::collection::vec(literal, 1..=3), 0..=4).prop_map(move |cs| CnfFormula::new(n, cs))
    })
}

proptest! {
    #[test]
    fn category_text_round_trip(c in category()) {
        let text = c.to_string();
        prop_assert_eq!(Category::parse(&text).unwrap(), c.clone());
        prop_assert!(!text.starts_with('('), "the spine is written without parentheses");
    }

    #[test]
    fn hash_consing_is_structural(c in category()) {
        let again = Category::parse(&c.to_string()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.size(), c.size());
    }

    #[test]
    fn split_top_reassembles(c in category(), d in 0usize..4) {
        match c.split_top(d) {
            Some((y, top)) => {
                prop_assert_eq!(top.len(), d);
                prop_assert_eq!(y.extend(top.iter().cloned()), c);
            }
            None => prop_assert!(d > c.arity()),
        }
    }

    #[test]
    fn size_is_one_plus_argument_sizes(c in category()) {
        prop_assert_eq!(c.size(), 1 + c.args().iter().map(Argument::size).sum::<usize>());
    }

    #[test]
    fn output_arity_law((schema, x, primary, secondary) in matching_pair()) {
        let d = secondary.arity() - primary.top().unwrap().category.arity();
        let slashes: Vec<Slash> = secondary.args()[secondary.arity() - d..].iter().map(|a| a.slash).collect();
        let rule = Rule::new(schema, slashes);
        let out = rule.apply(&primary, &secondary).expect("matching pair combines");
        prop_assert_eq!(out.target(), primary.target());
        prop_assert_eq!(out.arity(), primary.arity() - 1 + d);
        // Every output argument comes from the primary below its top or from
        // the top d arguments of the secondary.
        let (_, zs) = secondary.split_top(d).unwrap();
        for (i, arg) in out.args().iter().enumerate() {
            if i < x.arity() {
                prop_assert_eq!(arg, &x.args()[i]);
            } else {
                prop_assert_eq!(arg, &zs[i - x.arity()]);
            }
        }
    }

    #[test]
    fn unrestricted_rules_commute_with_renaming(
        schema in schema(),
        slashes in prop::collection::vec(slash(), 0..3),
        primary in category(),
        secondary in category(),
        perm in Just((0..ATOMS.len()).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let map = |a: Atom| {
            let i = ATOMS.iter().position(|n| *a.name() == **n).unwrap();
            Atom::new(ATOMS[perm[i]]).unwrap()
        };
        let rule = Rule::new(schema, slashes);
        let before = rule.apply(&primary, &secondary);
        let after = rule.apply(&rename(&primary, &map), &rename(&secondary, &map));
        prop_assert_eq!(before.map(|c| rename(&c, &map)), after);
    }

    #[test]
    fn leaves_exceed_inner_nodes_by_one(t in tree()) {
        let inner = t.node_count() - t.leaf_count();
        prop_assert_eq!(inner + 1, t.leaf_count());
    }

    #[test]
    fn yield_skips_empty_leaves(t in tree()) {
        let words = t.leaves().iter().filter_map(|e| e.word.as_deref()).collect::<Vec<_>>();
        prop_assert_eq!(t.yield_words(), words);
    }

    #[test]
    fn dimacs_round_trip(phi in formula().prop_filter("no empty clauses", |p| p.clauses.iter().all(|c| !c.is_empty()))) {
        prop_assert_eq!(parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivation_json_round_trip(t in tree()) {
        let text = t.to_json_string();
        prop_assert_eq!(Derivation::from_json_str(&text).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sat_reduction_agrees_with_brute_force(phi in formula()) {
        let ours = solve_via_ccg(&phi).unwrap();
        prop_assert_eq!(ours.is_some(), brute_force_sat(&phi).is_some());
        if let Some(a) = ours {
            prop_assert!(a.satisfies(&phi));
        }
    }

    #[test]
    fn parser_is_sound_and_deterministic(
        w in prop::collection::vec(prop::sample::select(vec![
            "Kahn", "blocked", "skillfully", "a", "powerful", "shot", "by", "Rivaldo",
        ]), 1..7)
    ) {
        let g = fixtures::figure3();
        let first = parse(&g, &w, &ParseConfig::default()).unwrap();
        let second = parse(&g, &w, &ParseConfig::default()).unwrap();
        prop_assert_eq!(&first, &second);
        if let Some(t) = &first.derivation {
            prop_assert_eq!(check_certificate(&g, t, &w), Ok(()));
        }
        prop_assert_eq!(first.accepted, first.derivation.is_some());
    }
}

#[test]
fn simulator_invariants_over_pool() {
    for m in common::machine_pool(1, 3) {
        for w in common::machine_inputs(&m, 3) {
            let accepted = accepts(&m, &w).unwrap();
            let tree = accepting_computation(&m, &w).unwrap();
            assert_eq!(accepted, tree.is_some());
            let analysis = analyze(&m, &w, DEFAULT_CONFIG_BUDGET).unwrap();
            assert!(analysis.rounds <= analysis.configs.len() + 1);
            if let Some(t) = tree {
                assert_eq!(validate_computation(&m, &w, &t), Ok(()));
                assert_eq!(acceptance_depth(&m, &w).unwrap(), Some(t.height()));
            }
        }
    }
}
