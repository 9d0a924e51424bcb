mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use bigboard_core::alert::{AlertCategory, AlertStatus, AlertSubject, BadgeIcon, StatusColor};
use bigboard_core::command::{ClientIdentity, Command, CommandBody};
use bigboard_core::ids::{AlertId, MissionId, QueryId, SubZoneId};
use bigboard_core::overlay::{
    build_menu, compute_strip, individual_badges, menu_window, window_indices, MenuEntry,
};
use bigboard_core::pipes::visible_pipes;
use bigboard_core::query::parse_query;
use bigboard_core::sequencer::Sequencer;
use bigboard_core::sim::{make_boston_fixture, BIG_ENTERPRISE_ASSETS};
use bigboard_core::state::BoardState;
use common::*;
use proptest::prelude::*;

/// Checks every overlay against its brute-force reference on one state.
pub fn check_overlays(state: &BoardState) {
    let topo = state.topology();
    let active: Vec<MissionId> = state.missions().active().to_vec();
    let view = state.view();
    for m in topo.missions() {
        let strip = compute_strip(topo, state.alerts().live(), state.pipes(), &m.id).unwrap();
        assert_eq!(strip, oracle_strip(state, &m.id), "strip {}", m.id);
    }
    let ind = individual_badges(state.alerts().live(), &active, topo, state.pipes());
    assert_eq!(ind, oracle_individual(state, &active));
    let vis: Vec<_> = visible_pipes(state.pipes().live(), &active, topo).into_iter().map(|p| p.id.clone()).collect();
    assert_eq!(vis, oracle_visible_pipes(state, &active));
    assert_eq!(build_menu(state.alerts().live(), &active, topo), oracle_menu(state, &active));

    // layer invariants
    assert_eq!(view, state.view(), "derivation is pure");
    for (m, strip) in &view.strip {
        for id in strip {
            assert!(view.individual_badges.contains(id), "strip of {m} leaves the badges");
            assert_eq!(state.alerts().get(id).unwrap().status, AlertStatus::Unassigned);
        }
    }
    for e in &view.menu {
        let a = state.alerts().get(&e.alert_id).unwrap();
        assert_eq!(e.capsule_right == StatusColor::Red, a.status == AlertStatus::Unassigned);
    }
    for (id, hl) in &view.query_highlights {
        let q = state.queries().get(id).unwrap();
        assert_eq!(hl.assets, oracle_eval(&q.expression, topo));
    }
}

fn toggled(state: &BoardState, body: CommandBody) -> Option<BoardState> {
    let mut s = state.clone();
    s.apply(&body, "boss", u64::MAX / 2).ok().map(|_| s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn overlays_match_oracles_on_fuzzed_states(seed in any::<u64>()) {
        let topo = fixture(150);
        let mut seq = Sequencer::new(Arc::clone(&topo));
        let mut fuzz = Fuzzer::new(seed, &topo);
        for step in 0..800 {
            let cmd = fuzz.next(seq.state());
            seq.submit(cmd).unwrap();
            if step % 40 == 39 {
                check_overlays(seq.state());
            }
        }
    }

    #[test]
    fn toggling_on_then_off_restores_layers(seed in any::<u64>(), which in 0usize..3) {
        let topo = fixture(150);
        let mut seq = Sequencer::new(Arc::clone(&topo));
        let mut fuzz = Fuzzer::new(seed, &topo);
        for _ in 0..300 {
            let cmd = fuzz.next(seq.state());
            seq.submit(cmd).unwrap();
        }
        let state = seq.state();
        let base = state.view();
        let m = topo.missions()[which].id.clone();
        if !state.missions().active().contains(&m) {
            let on = toggled(state, CommandBody::ActivateMission { mission_id: m.clone() }).unwrap();
            let off = toggled(&on, CommandBody::DeactivateMission { mission_id: m }).unwrap();
            prop_assert_eq!(off.view(), base.clone());
            prop_assert_eq!(off.digest(), state.digest());
        }
        let q = state.queries().saved().find(|q| !q.active).map(|q| q.id.clone());
        if let Some(q) = q {
            if let Some(on) = toggled(state, CommandBody::ActivateQuery { query_id: q.clone() }) {
                let off = toggled(&on, CommandBody::DeactivateQuery { query_id: q }).unwrap();
                prop_assert_eq!(off.view(), base);
            }
        }
    }
}

#[test]
fn menu_window_covers_every_group_exhaustively() {
    for n in 1..=50usize {
        for share in 1..=10usize {
            let mut seen = BTreeSet::new();
            for tick in 0..n as u64 {
                let w = window_indices(n, share, tick);
                assert_eq!(w.len(), share.min(n));
                seen.extend(w);
            }
            assert_eq!(seen, (0..n).collect::<BTreeSet<_>>(), "n={n} share={share}");
        }
    }
}

fn entry(id: &str, category: AlertCategory) -> MenuEntry {
    MenuEntry {
        alert_id: id.into(),
        category,
        text: id.into(),
        capsule_left: "neutral".into(),
        capsule_right: StatusColor::Red,
    }
}

proptest! {
    #[test]
    fn full_menu_cycle_shows_every_entry(h in 0usize..20, s in 0usize..20, p in 0usize..20, window in 1usize..15) {
        let mut menu = Vec::new();
        for (n, c) in [(h, AlertCategory::Health), (s, AlertCategory::Security), (p, AlertCategory::Performance)] {
            for i in 0..n {
                menu.push(entry(&format!("{}{i}", c.as_str()), c));
            }
        }
        let mut seen = BTreeSet::new();
        let cycle = h.max(s).max(p).max(1) as u64;
        for tick in 0..cycle {
            for e in menu_window(&menu, window, tick) {
                seen.insert(e.alert_id.clone());
            }
        }
        prop_assert_eq!(seen.len(), menu.len());
    }
}

fn boston_state() -> BoardState {
    let topo = fixture(BIG_ENTERPRISE_ASSETS);
    let mut state = BoardState::new(topo);
    for c in make_boston_fixture() {
        state.apply(&c.body, c.issuer.client_id.as_str(), c.at).unwrap();
    }
    state
}

#[test]
fn mission_examples_on_the_boston_picture() {
    let mut state = boston_state();
    let topo = Arc::clone(state.topology());
    let before = state.view();
    assert!(before.individual_badges.is_empty());
    assert_eq!(before.visible_pipes.len(), 1);

    state.apply(&CommandBody::ActivateMission { mission_id: "vtc_voip".into() }, "boss", u64::MAX / 2).unwrap();
    let view = state.view();
    let syd = state.alerts().get(&"sydney-01".into()).unwrap();
    assert!(view.individual_badges.contains(&syd.id));
    assert_eq!(syd.category.badge_icon(), BadgeIcon::Heart);
    let hl = &view.mission_highlights[&MissionId::from("vtc_voip")];
    assert!(hl.contains(&SubZoneId::from("sydney_office")) && hl.contains(&SubZoneId::from("boston")));
    assert_eq!(topo.mission(&"vtc_voip".into()).unwrap().color, "blue");
    // vpn_users <-> sydney touches a VoIP sub-zone, so the pipe stays
    assert_eq!(view.visible_pipes.len(), 1);
    check_overlays(&state);

    // the tasked Boston alert is not on the strip, the unassigned VoIP ones are
    let strip = &view.strip[&MissionId::from("vtc_voip")];
    assert!(strip.iter().all(|id| state.alerts().get(id).unwrap().status == AlertStatus::Unassigned));
    assert!(strip.contains(&"sydney-01".into()));
    assert!(strip.contains(&"boston-06".into()));
    assert!(!strip.contains(&"boston-02".into()));
    assert!(view.individual_badges.contains(&AlertId::from("boston-02")));
}

#[test]
fn unrelated_pipe_hides_under_a_mission() {
    let topo = fixture(BIG_ENTERPRISE_ASSETS);
    let mut state = BoardState::new(Arc::clone(&topo));
    // neither VPN sub-zone holds a stream asset
    state
        .apply(
            &CommandBody::ReportFlow {
                endpoint_a: "vpn_users".into(),
                endpoint_b: "vpn_contractors".into(),
                available_fraction: 0.5,
                current_fraction: 0.2,
            },
            "t",
            1,
        )
        .unwrap();
    assert_eq!(state.view().visible_pipes.len(), 1);
    state.apply(&CommandBody::ActivateMission { mission_id: "b_stream".into() }, "boss", 2).unwrap();
    assert!(state.view().visible_pipes.is_empty());
    assert!(state.view().strip[&MissionId::from("b_stream")].is_empty());
    assert!(!state.view().mission_highlights[&MissionId::from("b_stream")].is_empty());
}

#[test]
fn menu_boosts_active_mission_alerts() {
    let topo = fixture(BIG_ENTERPRISE_ASSETS);
    let mut seq = Sequencer::new(Arc::clone(&topo));
    let raise = |id: &str, asset: &str, at| {
        Command::new(id, ClientIdentity::member("t"), at, CommandBody::RaiseAlert {
            alert_id: id.into(),
            category: AlertCategory::Health,
            subject: AlertSubject::Asset(asset.into()),
            summary: id.into(),
        })
    };
    seq.submit(raise("voip", "syd-vc-01", 1)).unwrap();
    seq.submit(raise("plain", "syd-ws-01", 2)).unwrap();
    assert_eq!(seq.state().view().menu[0].alert_id.as_str(), "plain");
    seq.submit(Command::new("m", ClientIdentity::manager("boss"), 3, CommandBody::ActivateMission { mission_id: "vtc_voip".into() }))
        .unwrap();
    let menu = seq.state().view().menu;
    assert_eq!(menu[0].alert_id.as_str(), "voip");
    assert_eq!(menu[0].capsule_left, "blue");
    assert_eq!(menu[1].capsule_left, "neutral");
}

#[test]
fn query_overlay_examples() {
    let topo = fixture(BIG_ENTERPRISE_ASSETS);
    let mut state = BoardState::new(Arc::clone(&topo));
    let save = |id: &str, color: &str, expr: &str| CommandBody::SaveQuery {
        query_id: id.into(),
        label: id.into(),
        expression: parse_query(expr).unwrap(),
        color: color.into(),
    };
    state.apply(&save("aus", "purple", r#"geo:"australia""#), "boss", 1).unwrap();
    state.apply(&CommandBody::ActivateQuery { query_id: "aus".into() }, "boss", 2).unwrap();
    state.apply(&save("none", "pink", r#"tag:"dns" AND NOT tag:"dns""#), "boss", 3).unwrap();
    state.apply(&CommandBody::ActivateQuery { query_id: "none".into() }, "boss", 4).unwrap();
    let view = state.view();
    let aus = &view.query_highlights[&QueryId::from("aus")];
    assert!(aus.sub_zones.contains(&SubZoneId::from("sydney_office")));
    assert_eq!(
        aus.sub_zones,
        BTreeSet::from([SubZoneId::from("sydney_office"), SubZoneId::from("melbourne_office")])
    );
    let none = &view.query_highlights[&QueryId::from("none")];
    assert!(none.assets.is_empty() && none.sub_zones.is_empty());
    assert_eq!(view.active_queries.len(), 2);

    for i in 0..7 {
        state.apply(&save(&format!("q{i}"), &format!("c{i}"), r#"tag:"dns""#), "boss", 10).unwrap();
    }
    for i in 0..6 {
        state.apply(&CommandBody::ActivateQuery { query_id: format!("q{i}").into() }, "boss", 11).unwrap();
    }
    let full = state.clone();
    let digest = state.digest();
    let err = state.apply(&CommandBody::ActivateQuery { query_id: "q6".into() }, "boss", 12).unwrap_err();
    assert!(err.to_string().contains("query cap"), "{err}");
    assert_eq!(state.digest(), digest);
    assert_eq!(state.view(), full.view());
}
