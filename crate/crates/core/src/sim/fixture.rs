//! The Big Enterprise fixture topology.
//!
//! Five zones in panel order: VPN users, office locations, core services,
//! data center and extranet. Boston and Sydney are the offices the board's
//! reference scenario talks about; the other cities are invented to fill
//! out four continents.
//!
//! Assets are placed deterministically: asset `i < 5` goes to the first
//! sub-zone of zone `i`, the rest round-robin over every sub-zone. Within a
//! sub-zone, roles cycle through that sub-zone's role list, so the second
//! Sydney asset is always `syd-vc-01`.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use thiserror::Error;

use crate::ids::{AssetId, MissionId, SubZoneId, ZoneId};
use crate::topology::{
    Asset, MissionArea, SubZone, SubZoneKind, Topology, TopologyDoc, TopologyError, Zone,
    SCHEMA_VERSION,
};

/// Asset count used by the reference scenario.
pub const BIG_ENTERPRISE_ASSETS: usize = 1000;

/// Zone count; also the minimum asset count.
pub const ZONE_COUNT: usize = 5;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("asset_count {0} too small; need at least {ZONE_COUNT}")]
    TooSmall(usize),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

struct Place {
    city: &'static str,
    country: &'static str,
    continent: &'static str,
}

const BOSTON: Place = Place { city: "boston", country: "united-states", continent: "north-america" };
const NEW_YORK: Place = Place { city: "new-york", country: "united-states", continent: "north-america" };
const ASHBURN: Place = Place { city: "ashburn", country: "united-states", continent: "north-america" };
const LONDON: Place = Place { city: "london", country: "united-kingdom", continent: "europe" };
const FRANKFURT: Place = Place { city: "frankfurt", country: "germany", continent: "europe" };
const TOKYO: Place = Place { city: "tokyo", country: "japan", continent: "asia" };
const SINGAPORE: Place = Place { city: "singapore", country: "singapore", continent: "asia" };
const SYDNEY: Place = Place { city: "sydney", country: "australia", continent: "australia" };
const MELBOURNE: Place = Place { city: "melbourne", country: "australia", continent: "australia" };

struct SubZoneSpec {
    id: &'static str,
    name: &'static str,
    kind: SubZoneKind,
    prefix: &'static str,
    place: Option<Place>,
    /// (hostname role, function tag)
    roles: &'static [(&'static str, &'static str)],
}

struct ZoneSpec {
    id: &'static str,
    name: &'static str,
    sub_zones: Vec<SubZoneSpec>,
}

const OFFICE_ROLES: &[(&str, &str)] =
    &[("ws", "workstation"), ("vc", "voip"), ("prn", "printer"), ("fs", "fileserver")];

fn office(id: &'static str, name: &'static str, prefix: &'static str, place: Place) -> SubZoneSpec {
    SubZoneSpec {
        id,
        name,
        kind: SubZoneKind::Geographic,
        prefix,
        place: Some(place),
        roles: OFFICE_ROLES,
    }
}

fn functional(
    id: &'static str,
    name: &'static str,
    prefix: &'static str,
    place: Option<Place>,
    roles: &'static [(&'static str, &'static str)],
) -> SubZoneSpec {
    SubZoneSpec {
        id,
        name,
        kind: SubZoneKind::Functional,
        prefix,
        place,
        roles,
    }
}

fn layout() -> Vec<ZoneSpec> {
    vec![
        ZoneSpec {
            id: "vpn",
            name: "VPN Users",
            sub_zones: vec![
                functional("vpn_users", "Employees", "vpn", None, &[("user", "vpn-client")]),
                functional("vpn_contractors", "Contractors", "vpc", None, &[("user", "vpn-client")]),
            ],
        },
        ZoneSpec {
            id: "offices",
            name: "Office Locations",
            sub_zones: vec![
                office("boston", "Boston", "bos", BOSTON),
                office("new_york_office", "New York", "nyc", NEW_YORK),
                office("london_office", "London", "lon", LONDON),
                office("frankfurt_office", "Frankfurt", "fra", FRANKFURT),
                office("tokyo_office", "Tokyo", "tyo", TOKYO),
                office("singapore_office", "Singapore", "sin", SINGAPORE),
                office("sydney_office", "Sydney", "syd", SYDNEY),
                office("melbourne_office", "Melbourne", "mel", MELBOURNE),
            ],
        },
        ZoneSpec {
            id: "core",
            name: "Core Services",
            sub_zones: vec![
                functional("network_defense", "Network Defense", "def", Some(BOSTON),
                    &[("fw", "firewall"), ("ids", "ids")]),
                functional("email", "E-mail", "mail", Some(BOSTON), &[("mx", "email")]),
                functional("dns", "DNS", "dns", Some(LONDON), &[("ns", "dns")]),
            ],
        },
        ZoneSpec {
            id: "datacenter",
            name: "Data Center",
            sub_zones: vec![
                functional("dc_compute", "Compute", "dcc", Some(ASHBURN),
                    &[("app", "docs"), ("media", "stream"), ("sip", "voip"), ("db", "database")]),
                functional("dc_storage", "Storage", "dcs", Some(ASHBURN),
                    &[("nas", "storage"), ("obj", "stream")]),
                functional("dc_web", "Web Tier", "dcw", Some(ASHBURN),
                    &[("web", "docs"), ("cdn", "stream")]),
            ],
        },
        ZoneSpec {
            id: "extranet",
            name: "Extranet",
            sub_zones: vec![
                functional("extranet_partners", "Partners", "xp", Some(LONDON),
                    &[("gw", "partner-gateway"), ("docs", "docs")]),
                functional("extranet_cdn", "Content Delivery", "xc", Some(SINGAPORE),
                    &[("edge", "stream")]),
            ],
        },
    ]
}

/// (mission id, display name, color, function tag it depends on)
const MISSIONS: [(&str, &str, &str, &str); 3] = [
    ("vtc_voip", "VTC/VOIP", "blue", "voip"),
    ("b_docs", "B_Docs", "green", "docs"),
    ("b_stream", "B_Stream", "orange", "stream"),
];

/// Builds the Big Enterprise topology with `asset_count` assets.
pub fn generate_fixture(asset_count: usize) -> Result<Topology, FixtureError> {
    if asset_count < ZONE_COUNT {
        return Err(FixtureError::TooSmall(asset_count));
    }
    let specs = layout();
    let flat: Vec<(usize, usize)> = specs
        .iter()
        .enumerate()
        .flat_map(|(zi, z)| (0..z.sub_zones.len()).map(move |si| (zi, si)))
        .collect();

    let mut zones: Vec<Zone> = specs
        .iter()
        .enumerate()
        .map(|(zi, z)| Zone {
            id: ZoneId::from(z.id),
            display_name: z.name.into(),
            layout_rank: zi as i32,
            sub_zones: z
                .sub_zones
                .iter()
                .enumerate()
                .map(|(si, s)| SubZone {
                    id: SubZoneId::from(s.id),
                    display_name: s.name.into(),
                    kind: s.kind,
                    layout_rank: si as i32,
                    assets: Vec::new(),
                })
                .collect(),
        })
        .collect();

    let mut missions: Vec<MissionArea> = MISSIONS
        .iter()
        .enumerate()
        .map(|(rank, (id, name, color, _))| MissionArea {
            id: MissionId::from(*id),
            display_name: (*name).into(),
            color: (*color).into(),
            rank: rank as i32,
            dependency_asset_ids: BTreeSet::new(),
        })
        .collect();

    for i in 0..asset_count {
        let (zi, si) = if i < ZONE_COUNT {
            (i, 0)
        } else {
            flat[(i - ZONE_COUNT) % flat.len()]
        };
        let spec = &specs[zi].sub_zones[si];
        let sub_zone = &mut zones[zi].sub_zones[si];
        let local = sub_zone.assets.len();
        let (role, function) = spec.roles[local % spec.roles.len()];
        let ordinal = local / spec.roles.len() + 1;
        let hostname = format!("{}-{}-{:02}", spec.prefix, role, ordinal);

        let mut function_tags = BTreeSet::from([function.to_owned()]);
        if i % 7 == 3 {
            function_tags.insert("java-unpatched".into());
        }
        if i % 11 == 5 {
            function_tags.insert("proxy-bypass".into());
        }
        if i % 13 == 0 {
            function_tags.insert("beaconing".into());
        }
        let geo_tags = match &spec.place {
            Some(p) => [p.city, p.country, p.continent].into_iter().map(String::from).collect(),
            None => BTreeSet::from(["remote".to_owned()]),
        };
        let mut addresses = BTreeSet::from([Ipv4Addr::from(
            0x0A00_0000 | ((zi as u32) << 20) | ((si as u32) << 16) | (local as u32 + 1),
        )]);
        if spec.id == "extranet_partners" {
            addresses.insert(Ipv4Addr::new(194, 220, 1, (local % 254) as u8 + 1));
        }

        let id = AssetId::new(hostname.clone());
        for (m, (_, _, _, tag)) in missions.iter_mut().zip(MISSIONS.iter()) {
            if function == *tag {
                m.dependency_asset_ids.insert(id.clone());
            }
        }
        sub_zone.assets.push(Asset {
            id,
            hostname,
            sub_zone_id: sub_zone.id.clone(),
            geo_tags,
            function_tags,
            addresses,
        });
    }

    Ok(Topology::new(TopologyDoc {
        network_name: "Big Enterprise".into(),
        schema_version: SCHEMA_VERSION,
        zones,
        missions,
    })?)
}
