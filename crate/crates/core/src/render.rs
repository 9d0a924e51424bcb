//! Static exports of a board state: a stable text table and an SVG picture
//! (zones as nested rectangles, ovals with counts, pipes along the bottom).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::alert::{home_sub_zone, AlertCategory, BadgeIcon, StatusColor};
use crate::ids::{AlertId, SubZoneId};
use crate::overlay::{menu_window, BoardView};
use crate::pipes::pipe_color;
use crate::state::BoardState;

fn color_name(c: Option<StatusColor>) -> &'static str {
    match c {
        Some(StatusColor::Red) => "red",
        Some(StatusColor::Yellow) => "yellow",
        None => "none",
    }
}

/// Plain-text table of the board. Line-oriented and sorted so it can be
/// diffed against golden files.
///
/// ```text
/// board Big Enterprise
/// seq 13
/// missions vtc_voip* b_docs b_stream
/// badges
/// boston 9 1
/// ```
pub fn render_text(state: &BoardState, seq: u64) -> String {
    let topo = state.topology();
    let view = state.view();
    let mut out = String::new();
    let _ = writeln!(out, "board {}", topo.network_name());
    let _ = writeln!(out, "seq {seq}");
    let _ = writeln!(out, "digest {}", state.digest());

    let missions: Vec<String> = topo
        .missions()
        .iter()
        .map(|m| {
            let star = if view.active_missions.contains(&m.id) { "*" } else { "" };
            format!("{}{star}", m.id)
        })
        .collect();
    let _ = writeln!(out, "missions {}", missions.join(" "));
    let queries: Vec<String> = state
        .queries()
        .saved()
        .map(|q| format!("{}={}{}", q.id, q.color, if q.active { "*" } else { "" }))
        .collect();
    let _ = writeln!(out, "queries {}", queries.join(" "));

    let _ = writeln!(out, "badges");
    for b in &view.aggregate_badges {
        let _ = writeln!(out, "{} {} {}", b.sub_zone_id, b.red_count, b.yellow_count);
    }

    let _ = writeln!(out, "individual");
    for id in &view.individual_badges {
        if let Some(a) = state.alerts().get(id) {
            let _ = writeln!(out, "{} {} {}", a.id, a.category.as_str(), color_name(a.status.color()));
        }
    }

    let _ = writeln!(out, "strip");
    for (m, ids) in &view.strip {
        let ids: Vec<&str> = ids.iter().map(AlertId::as_str).collect();
        let _ = writeln!(out, "{m} {}", ids.join(" "));
    }

    let _ = writeln!(out, "pipes");
    for id in &view.visible_pipes {
        if let Some(p) = state.pipes().get(id) {
            let _ = writeln!(
                out,
                "{} {} {} {:.2} {:.2} {}",
                p.id,
                p.endpoint_a,
                p.endpoint_b,
                p.available_fraction,
                p.current_fraction,
                color_name(pipe_color(p, state.alerts()))
            );
        }
    }

    let _ = writeln!(out, "menu");
    for e in &view.menu {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            e.category.as_str(),
            e.capsule_left,
            color_name(Some(e.capsule_right)),
            e.alert_id,
            e.text
        );
    }
    out
}

/// SVG rendering options.
#[derive(Debug, Clone, Copy)]
pub struct SvgOptions {
    /// Scroll tick for the menu window.
    pub tick: u64,
    pub window_size: usize,
    /// Clock shown top-right, epoch ms.
    pub now_ms: Option<u64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            tick: 0,
            window_size: 12,
            now_ms: None,
        }
    }
}

const WIDTH: f64 = 1280.0;
const HEIGHT: f64 = 760.0;
const LEFT: f64 = 150.0;
const RIGHT: f64 = 300.0;
const TOP: f64 = 50.0;
const PIPE_BAND: f64 = 150.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps mission colors onto concrete fills; other names pass through.
fn paint(color: &str) -> &str {
    match color {
        "red" => "#d62728",
        "yellow" => "#f2c500",
        "blue" => "#1f77b4",
        "green" => "#2ca02c",
        "orange" => "#ff7f0e",
        "purple" => "#8e44ad",
        "neutral" => "#9a9a9a",
        other => other,
    }
}

fn icon_letter(icon: BadgeIcon) -> &'static str {
    match icon {
        BadgeIcon::Heart => "\u{2665}",
        BadgeIcon::Shield => "\u{25C6}",
        BadgeIcon::Speedometer => "\u{25D4}",
    }
}

fn clock(ms: u64) -> String {
    let s = (ms / 1000) % 86_400;
    format!("{:02}:{:02}:{:02} UTC", s / 3600, (s / 60) % 60, s % 60)
}

/// Renders the board as a standalone SVG document.
pub fn render_svg(state: &BoardState, opts: SvgOptions) -> String {
    let topo = state.topology();
    let view: BoardView = state.view();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#101418"/>"##);
    let _ = writeln!(
        svg,
        r##"<text class="network-name" x="12" y="30" fill="#fff" font-size="22">{}</text>"##,
        esc(topo.network_name())
    );
    if let Some(now) = opts.now_ms {
        let _ = writeln!(
            svg,
            r##"<text class="clock" x="{}" y="30" fill="#fff" font-size="18" text-anchor="end">{}</text>"##,
            WIDTH - 12.0,
            clock(now)
        );
    }

    // mission tabs top-left, query tabs lower-left
    for (i, m) in topo.missions().iter().enumerate() {
        let active = view.active_missions.contains(&m.id);
        let y = TOP + 10.0 + i as f64 * 44.0;
        let c = paint(&m.color);
        let fill = if active { c } else { "none" };
        let _ = writeln!(
            svg,
            r##"<g class="mission-tab" data-mission="{}" data-active="{active}"><rect x="10" y="{y}" width="{}" height="34" rx="6" fill="{fill}" stroke="{c}" stroke-width="2"/><text x="20" y="{}" fill="#fff" font-size="14">{}</text></g>"##,
            esc(m.id.as_str()),
            LEFT - 20.0,
            y + 22.0,
            esc(&m.display_name)
        );
    }
    let saved: Vec<_> = state.queries().saved().collect();
    for (i, q) in saved.iter().enumerate() {
        let y = HEIGHT - PIPE_BAND - 40.0 - i as f64 * 30.0;
        let c = paint(&q.color);
        let fill = if q.active { c } else { "none" };
        let _ = writeln!(
            svg,
            r##"<g class="query-tab" data-query="{}" data-active="{}"><rect x="10" y="{y}" width="{}" height="24" rx="4" fill="{fill}" stroke="{c}"/><text x="18" y="{}" fill="#fff" font-size="12">{}</text></g>"##,
            esc(q.id.as_str()),
            q.active,
            LEFT - 20.0,
            y + 16.0,
            esc(&q.label)
        );
    }

    // central panel: one column per zone, sub-zones stacked inside
    let panel_w = WIDTH - LEFT - RIGHT;
    let panel_h = HEIGHT - TOP - PIPE_BAND;
    let zones = topo.zones();
    let col_w = panel_w / zones.len().max(1) as f64;
    let badges: BTreeMap<&SubZoneId, (u32, u32)> = view
        .aggregate_badges
        .iter()
        .map(|b| (&b.sub_zone_id, (b.red_count, b.yellow_count)))
        .collect();
    let mut sub_zone_box: BTreeMap<&SubZoneId, (f64, f64, f64, f64)> = BTreeMap::new();
    let mut ordered: Vec<_> = zones.iter().collect();
    ordered.sort_by_key(|z| z.layout_rank);
    for (zi, z) in ordered.iter().enumerate() {
        let zx = LEFT + zi as f64 * col_w + 4.0;
        let zw = col_w - 8.0;
        let _ = writeln!(
            svg,
            r##"<g class="zone" data-zone="{}"><rect x="{zx}" y="{TOP}" width="{zw}" height="{panel_h}" fill="#1b222a" stroke="#56616d"/><text x="{}" y="{}" fill="#ccd" font-size="13">{}</text></g>"##,
            esc(z.id.as_str()),
            zx + 6.0,
            TOP + 16.0,
            esc(&z.display_name)
        );
        let mut subs: Vec<_> = z.sub_zones.iter().collect();
        subs.sort_by_key(|s| s.layout_rank);
        let sh = (panel_h - 26.0) / subs.len().max(1) as f64;
        for (si, s) in subs.iter().enumerate() {
            let sx = zx + 6.0;
            let sy = TOP + 22.0 + si as f64 * sh;
            let sw = zw - 12.0;
            let shh = sh - 4.0;
            sub_zone_box.insert(&s.id, (sx, sy, sw, shh));
            let tint = view
                .mission_highlights
                .iter()
                .find(|(_, szs)| szs.contains(&s.id))
                .and_then(|(m, _)| topo.mission(m))
                .map(|m| paint(&m.color))
                .unwrap_or("#232c36");
            let _ = writeln!(
                svg,
                r##"<g class="sub-zone" data-sub-zone="{}"><rect x="{sx}" y="{sy}" width="{sw}" height="{shh}" fill="{tint}" fill-opacity="0.5" stroke="#3c4752"/><text x="{}" y="{}" fill="#fff" font-size="10">{}</text>"##,
                esc(s.id.as_str()),
                sx + 4.0,
                sy + 12.0,
                esc(&s.display_name)
            );
            for (qi, (_, hl)) in view
                .query_highlights
                .iter()
                .filter(|(_, hl)| hl.sub_zones.contains(&s.id))
                .enumerate()
            {
                let inset = 2.0 + qi as f64 * 2.0;
                let _ = writeln!(
                    svg,
                    r##"<rect class="query-highlight" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{}" stroke-width="2"/>"##,
                    sx + inset,
                    sy + inset,
                    (sw - 2.0 * inset).max(0.0),
                    (shh - 2.0 * inset).max(0.0),
                    paint(&hl.color)
                );
            }
            if let Some(&(red, yellow)) = badges.get(&s.id) {
                let cx = sx + sw - 34.0;
                let cy = sy + shh / 2.0;
                let _ = writeln!(
                    svg,
                    r##"<g class="oval" data-red="{red}" data-yellow="{yellow}"><ellipse cx="{cx}" cy="{cy}" rx="30" ry="11" fill="#000" stroke="#fff"/><text x="{}" y="{}" fill="{}" font-size="11" text-anchor="middle">{red}</text><text x="{}" y="{}" fill="{}" font-size="11" text-anchor="middle">{yellow}</text></g>"##,
                    cx - 12.0,
                    cy + 4.0,
                    paint("red"),
                    cx + 12.0,
                    cy + 4.0,
                    paint("yellow")
                );
            }
            let _ = writeln!(svg, "</g>");
        }
    }

    // individual badges, fanned out along the bottom of their sub-zone
    let mut slot: BTreeMap<&SubZoneId, usize> = BTreeMap::new();
    let mut badge_pos: BTreeMap<&AlertId, (f64, f64)> = BTreeMap::new();
    for id in &view.individual_badges {
        let Some(a) = state.alerts().get(id) else { continue };
        let home = home_sub_zone(&a.subject, topo).or_else(|| match &a.subject {
            crate::alert::AlertSubject::Pipe(p) => state.pipes().get(p).map(|p| {
                let key = |s: &SubZoneId| topo.layout_key(s).unwrap_or_default();
                if key(&p.endpoint_a) <= key(&p.endpoint_b) {
                    &p.endpoint_a
                } else {
                    &p.endpoint_b
                }
            }),
            _ => None,
        });
        let Some(home) = home else { continue };
        let Some(&(sx, sy, _, shh)) = sub_zone_box.get(home) else { continue };
        let n = slot.entry(home).or_default();
        let x = sx + 12.0 + (*n % 8) as f64 * 14.0;
        let y = sy + shh - 8.0 - (*n / 8) as f64 * 14.0;
        *n += 1;
        badge_pos.insert(id, (x, y));
        let _ = writeln!(
            svg,
            r##"<text class="badge" data-alert="{}" data-category="{}" x="{x}" y="{y}" fill="{}" font-size="13" text-anchor="middle">{}</text>"##,
            esc(id.as_str()),
            a.category.as_str(),
            paint(color_name(a.status.color())),
            icon_letter(a.category.badge_icon())
        );
    }

    // red strip per active mission, through its badges in strip order
    for (m, ids) in &view.strip {
        let pts: Vec<String> = ids
            .iter()
            .filter_map(|id| badge_pos.get(id))
            .map(|(x, y)| format!("{x:.1},{:.1}", y - 4.0))
            .collect();
        if pts.len() >= 2 {
            let _ = writeln!(
                svg,
                r##"<polyline class="strip" data-mission="{}" points="{}" fill="none" stroke="{}" stroke-width="2" stroke-opacity="0.8"/>"##,
                esc(m.as_str()),
                pts.join(" "),
                paint("red")
            );
        }
    }

    // pipes along the bottom: outer band = available, inner = current
    let pipe_y0 = HEIGHT - PIPE_BAND + 12.0;
    let bar_w = panel_w - 20.0;
    for (i, id) in view.visible_pipes.iter().take(6).enumerate() {
        let Some(p) = state.pipes().get(id) else { continue };
        let y = pipe_y0 + i as f64 * 22.0;
        let x = LEFT + 10.0;
        let color = paint(color_name(pipe_color(p, state.alerts())));
        let _ = writeln!(
            svg,
            r##"<g class="pipe" data-pipe="{}"><rect x="{x}" y="{y}" width="{bar_w}" height="16" fill="none" stroke="#56616d"/><rect class="outer" x="{x}" y="{y}" width="{:.1}" height="16" fill="{color}" fill-opacity="0.35"/><rect class="inner" x="{x}" y="{}" width="{:.1}" height="8" fill="{color}"/><text x="{}" y="{}" fill="#fff" font-size="11">{} &#8596; {}</text></g>"##,
            esc(id.as_str()),
            bar_w * p.available_fraction,
            y + 4.0,
            bar_w * p.current_fraction,
            x + 6.0,
            y + 12.0,
            esc(p.endpoint_a.as_str()),
            esc(p.endpoint_b.as_str())
        );
    }

    // warning menu on the right, grouped by category, scrolling window
    let mx = WIDTH - RIGHT + 10.0;
    let _ = writeln!(
        svg,
        r##"<rect x="{mx}" y="{TOP}" width="{}" height="{}" fill="#161b21" stroke="#56616d"/>"##,
        RIGHT - 20.0,
        HEIGHT - TOP - 10.0
    );
    let window = menu_window(&view.menu, opts.window_size, opts.tick);
    let mut y = TOP + 20.0;
    let mut last: Option<AlertCategory> = None;
    for e in window {
        if last != Some(e.category) {
            let _ = writeln!(
                svg,
                r##"<text class="menu-group" x="{}" y="{y}" fill="#aab" font-size="12">{}</text>"##,
                mx + 8.0,
                e.category.as_str()
            );
            y += 18.0;
            last = Some(e.category);
        }
        let _ = writeln!(
            svg,
            r##"<g class="menu-entry" data-alert="{}"><rect x="{}" y="{}" width="10" height="12" fill="{}"/><rect x="{}" y="{}" width="10" height="12" fill="{}"/><text x="{}" y="{y}" fill="#fff" font-size="11">{}</text></g>"##,
            esc(e.alert_id.as_str()),
            mx + 8.0,
            y - 10.0,
            paint(&e.capsule_left),
            mx + 18.0,
            y - 10.0,
            paint(color_name(Some(e.capsule_right))),
            mx + 34.0,
            esc(&e.text)
        );
        y += 16.0;
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::sim::{generate_fixture, make_boston_fixture, BIG_ENTERPRISE_ASSETS};

    fn boston() -> BoardState {
        let topo = Arc::new(generate_fixture(BIG_ENTERPRISE_ASSETS).unwrap());
        let mut state = BoardState::new(topo);
        for c in make_boston_fixture() {
            state.apply(&c.body, c.issuer.client_id.as_str(), c.at).unwrap();
        }
        state
    }

    #[test]
    fn text_has_boston_row_and_pipe() {
        let text = render_text(&boston(), 13);
        assert!(text.lines().any(|l| l == "boston 9 1"), "{text}");
        assert!(text.contains("pipe-1 vpn_users sydney_office 0.40 0.25 red"));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = render_svg(&boston(), SvgOptions { now_ms: Some(0), ..Default::default() });
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(r#"data-red="9" data-yellow="1""#));
        assert_eq!(svg.matches("<g").count(), svg.matches("</g>").count());
        assert!(svg.contains(r#"class="pipe" data-pipe="pipe-1""#));
    }
}
