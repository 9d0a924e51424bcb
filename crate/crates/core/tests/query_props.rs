mod common;

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use bigboard_core::ids::AssetId;
use bigboard_core::overlay::{FunctionalQuery, OverlayError, QueryBook, MAX_ACTIVE_QUERIES};
use bigboard_core::query::{evaluate_query, parse_query, Atom, QueryExpr, QueryParseError};
use bigboard_core::sim::{generate_fixture, BIG_ENTERPRISE_ASSETS};
use common::*;
use ipnet::Ipv4Net;
use proptest::prelude::*;

fn arb_value() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec!["australia", "boston", "voip", "dns", "java-unpatched", "europe", "docs"])
            .prop_map(String::from),
        "[a-zA-Z0-9 _\\-\"\\\\*?]{0,8}",
    ]
}

fn arb_atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        arb_value().prop_map(Atom::Geo),
        arb_value().prop_map(Atom::Tag),
        "[a-z0-9*?\\-]{0,8}".prop_map(Atom::Host),
        (any::<u32>(), 0u8..=32).prop_map(|(a, len)| Atom::Ip(Ipv4Net::new(Ipv4Addr::from(a), len).unwrap())),
        (0u8..=255, prop::sample::select(vec![16u8, 24, 25, 32]))
            .prop_map(|(h, len)| Atom::Ip(Ipv4Net::new(Ipv4Addr::new(194, 220, 1, h), len).unwrap())),
    ]
}

fn arb_expr() -> impl Strategy<Value = QueryExpr> {
    arb_atom().prop_map(QueryExpr::Atom).prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(QueryExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QueryExpr::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| QueryExpr::or(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn print_parse_is_a_fixed_point(e in arb_expr()) {
        let text = e.to_string();
        let back = parse_query(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn evaluation_is_boolean_algebra(a in arb_expr(), b in arb_expr()) {
        let t = generate_fixture(500).unwrap();
        let all = t.all_asset_ids();
        let ea = evaluate_query(&a, &t);
        let eb = evaluate_query(&b, &t);
        prop_assert_eq!(&ea, &oracle_eval(&a, &t));
        let not_a = evaluate_query(&QueryExpr::not(a.clone()), &t);
        prop_assert_eq!(&not_a, &all.difference(&ea).cloned().collect::<BTreeSet<AssetId>>());
        let and = evaluate_query(&QueryExpr::and(a.clone(), b.clone()), &t);
        prop_assert_eq!(&and, &ea.intersection(&eb).cloned().collect::<BTreeSet<AssetId>>());
        let or = evaluate_query(&QueryExpr::or(a.clone(), b.clone()), &t);
        prop_assert_eq!(&or, &ea.union(&eb).cloned().collect::<BTreeSet<AssetId>>());
        // de Morgan
        let lhs = evaluate_query(&QueryExpr::not(QueryExpr::and(a.clone(), b.clone())), &t);
        let rhs = evaluate_query(&QueryExpr::or(QueryExpr::not(a.clone()), QueryExpr::not(b.clone())), &t);
        prop_assert_eq!(lhs, rhs);
        let lhs = evaluate_query(&QueryExpr::not(QueryExpr::or(a.clone(), b.clone())), &t);
        let rhs = evaluate_query(&QueryExpr::and(QueryExpr::not(a), QueryExpr::not(b)), &t);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn keyword_case_and_whitespace_do_not_matter(e in arb_expr()) {
        let text = e.to_string().replace(" AND ", "  and\t").replace(" OR ", " Or ").replace("NOT ", "not  ");
        prop_assert_eq!(parse_query(&text).unwrap(), e);
    }

    #[test]
    fn cap_rejection_perturbs_nothing(active in 0usize..=MAX_ACTIVE_QUERIES, extra in 1usize..6, pick in 0usize..20) {
        let t = generate_fixture(50).unwrap();
        let mut book = QueryBook::new();
        let total = active + extra;
        for i in 0..total {
            book.save(FunctionalQuery {
                id: format!("q{i}").into(),
                label: String::new(),
                expression: parse_query(r#"tag:"dns""#).unwrap(),
                color: format!("shade{i}"),
                active: false,
            }, &t).unwrap();
        }
        for i in 0..active {
            book.activate(&format!("q{i}").into()).unwrap();
        }
        let target = format!("q{}", active + pick % extra);
        let before = book.clone();
        let res = book.activate(&target.as_str().into());
        if active == MAX_ACTIVE_QUERIES {
            prop_assert_eq!(res, Err(OverlayError::QueryCapExceeded));
            prop_assert_eq!(&book, &before);
        } else {
            prop_assert!(res.is_ok());
        }
        prop_assert!(book.active().len() <= MAX_ACTIVE_QUERIES);
    }
}

#[test]
fn random_trees_agree_with_per_asset_predicate() {
    let t = generate_fixture(500).unwrap();
    let mut rng = bigboard_core::sim::SimRng::new(11);
    for _ in 0..500 {
        let e = random_query(&mut rng, 5);
        assert_eq!(evaluate_query(&e, &t), oracle_eval(&e, &t), "{e}");
    }
}

#[test]
fn query_examples() {
    let t = generate_fixture(BIG_ENTERPRISE_ASSETS).unwrap();
    let aus = evaluate_query(&parse_query(r#"geo:"australia""#).unwrap(), &t);
    let mut expect = BTreeSet::new();
    for sz in ["sydney_office", "melbourne_office"] {
        expect.extend(t.sub_zone_assets(&sz.into()).unwrap().iter().cloned());
    }
    assert_eq!(aus, expect);
    assert!(!aus.is_empty());

    assert!(evaluate_query(&parse_query(r#"tag:"dns" AND NOT tag:"dns""#).unwrap(), &t).is_empty());

    let partner = evaluate_query(&parse_query("ip:194.220.1.0/24").unwrap(), &t);
    let scan: BTreeSet<AssetId> = t
        .assets()
        .filter(|a| a.addresses.iter().any(|ip| ip.octets()[..3] == [194, 220, 1]))
        .map(|a| a.id.clone())
        .collect();
    assert_eq!(partner, scan);
    assert!(!partner.is_empty());

    assert_eq!(parse_query(r#"geo:"australia""#).unwrap(), QueryExpr::Atom(Atom::Geo("australia".into())));
    let tree = parse_query(r#"tag:"java-unpatched" OR (geo:"boston" AND tag:"proxy-bypass")"#).unwrap();
    assert!(matches!(tree, QueryExpr::Or(_, ref r) if matches!(**r, QueryExpr::And(_, _))));

    let err = parse_query("ip:999.1.1.1/8").unwrap_err();
    assert!(matches!(err, QueryParseError::InvalidCidr { position: 3, .. }), "{err:?}");
    assert!(err.to_string().contains("invalid CIDR"));
    assert!(parse_query(r#"geo:"x" AND"#).is_err());
    assert!(parse_query("").is_err());
}
