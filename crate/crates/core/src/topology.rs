//! Enterprise network model shown on the central panel: zones, sub-zones,
//! assets and the mission areas that depend on them.
//!
//! A [`Topology`] is validated once at load time and is immutable afterwards.
//! The lookup index built during validation lets the engines resolve any
//! asset or sub-zone in constant time.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ids::{AssetId, MissionId, SubZoneId, ZoneId};

/// Current topology document schema.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("duplicate layout rank {rank} in {scope}")]
    DuplicateRank { scope: String, rank: i32 },
    #[error("sub-zone {0:?} has an empty display name")]
    EmptyDisplayName(SubZoneId),
    #[error("asset {asset:?} declares sub-zone {declared:?} but is listed under {parent:?}")]
    SubZoneMismatch {
        asset: AssetId,
        declared: SubZoneId,
        parent: SubZoneId,
    },
    #[error("duplicate mission color {0:?}")]
    DuplicateColor(String),
    #[error("dangling asset reference: mission {mission:?} depends on unknown asset {asset:?}")]
    DanglingAssetReference { mission: MissionId, asset: AssetId },
    #[error("unknown mission {0:?}")]
    UnknownMission(MissionId),
    #[error("unknown asset {0:?}")]
    UnknownAsset(AssetId),
    #[error("unknown sub-zone {0:?}")]
    UnknownSubZone(SubZoneId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubZoneKind {
    Geographic,
    Functional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Asset {
    pub id: AssetId,
    pub hostname: String,
    pub sub_zone_id: SubZoneId,
    #[serde(default)]
    pub geo_tags: BTreeSet<String>,
    #[serde(default)]
    pub function_tags: BTreeSet<String>,
    #[serde(default)]
    pub addresses: BTreeSet<Ipv4Addr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubZone {
    pub id: SubZoneId,
    pub display_name: String,
    pub kind: SubZoneKind,
    pub layout_rank: i32,
    #[serde(default)]
    pub assets: Vec<Asset>,
}

impl SubZone {
    pub fn asset_ids(&self) -> impl Iterator<Item = &AssetId> {
        self.assets.iter().map(|a| &a.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub id: ZoneId,
    pub display_name: String,
    /// Left-to-right panel order.
    pub layout_rank: i32,
    #[serde(default)]
    pub sub_zones: Vec<SubZone>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionArea {
    pub id: MissionId,
    pub display_name: String,
    pub color: String,
    /// Tie-break priority; lower wins.
    pub rank: i32,
    #[serde(default)]
    pub dependency_asset_ids: BTreeSet<AssetId>,
}

/// Serialized form of a topology; mirrors [`Topology`] field for field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub network_name: String,
    pub schema_version: u32,
    #[serde(default)]
    pub zones: Vec<Zone>,
    #[serde(default)]
    pub missions: Vec<MissionArea>,
}

#[derive(Debug, Clone, Default)]
struct Index {
    /// asset -> (zone, sub-zone, asset) positions
    assets: HashMap<AssetId, (usize, usize, usize)>,
    sub_zones: HashMap<SubZoneId, (usize, usize)>,
    sub_zone_assets: HashMap<SubZoneId, BTreeSet<AssetId>>,
    missions: HashMap<MissionId, usize>,
    all_assets: BTreeSet<AssetId>,
}

/// A validated, immutable topology.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct Topology {
    doc: TopologyDoc,
    index: Index,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

impl Eq for Topology {}

impl From<Topology> for TopologyDoc {
    fn from(t: Topology) -> Self {
        t.doc
    }
}

impl TryFrom<TopologyDoc> for Topology {
    type Error = TopologyError;

    fn try_from(doc: TopologyDoc) -> Result<Self, Self::Error> {
        Topology::new(doc)
    }
}

/// Parses and validates a topology document.
pub fn load_topology(source: &str) -> Result<Topology, TopologyError> {
    let doc: TopologyDoc = serde_json::from_str(source)?;
    Topology::new(doc)
}

fn check_unique<'a, T: Eq + std::hash::Hash + 'a>(
    seen: &mut HashSet<T>,
    value: T,
    err: impl FnOnce() -> TopologyError,
) -> Result<(), TopologyError> {
    if seen.insert(value) {
        Ok(())
    } else {
        Err(err())
    }
}

impl Topology {
    /// Validates `doc` and builds the lookup index. Fails on the first
    /// violated invariant.
    pub fn new(doc: TopologyDoc) -> Result<Self, TopologyError> {
        let mut index = Index::default();
        let mut zone_ids = HashSet::new();
        let mut zone_ranks = HashSet::new();

        for (zi, zone) in doc.zones.iter().enumerate() {
            check_unique(&mut zone_ids, &zone.id, || TopologyError::DuplicateId {
                kind: "zone",
                id: zone.id.to_string(),
            })?;
            check_unique(&mut zone_ranks, zone.layout_rank, || {
                TopologyError::DuplicateRank {
                    scope: "zones".into(),
                    rank: zone.layout_rank,
                }
            })?;

            let mut sz_ranks = HashSet::new();
            for (si, sz) in zone.sub_zones.iter().enumerate() {
                if index.sub_zones.insert(sz.id.clone(), (zi, si)).is_some() {
                    return Err(TopologyError::DuplicateId {
                        kind: "sub-zone",
                        id: sz.id.to_string(),
                    });
                }
                if sz.display_name.trim().is_empty() {
                    return Err(TopologyError::EmptyDisplayName(sz.id.clone()));
                }
                check_unique(&mut sz_ranks, sz.layout_rank, || {
                    TopologyError::DuplicateRank {
                        scope: format!("zone {}", zone.id),
                        rank: sz.layout_rank,
                    }
                })?;

                let mut members = BTreeSet::new();
                for (ai, asset) in sz.assets.iter().enumerate() {
                    if asset.sub_zone_id != sz.id {
                        return Err(TopologyError::SubZoneMismatch {
                            asset: asset.id.clone(),
                            declared: asset.sub_zone_id.clone(),
                            parent: sz.id.clone(),
                        });
                    }
                    if index.assets.insert(asset.id.clone(), (zi, si, ai)).is_some() {
                        return Err(TopologyError::DuplicateId {
                            kind: "asset",
                            id: asset.id.to_string(),
                        });
                    }
                    members.insert(asset.id.clone());
                    index.all_assets.insert(asset.id.clone());
                }
                index.sub_zone_assets.insert(sz.id.clone(), members);
            }
        }

        let mut colors = HashSet::new();
        let mut ranks = HashSet::new();
        for (mi, mission) in doc.missions.iter().enumerate() {
            if index.missions.insert(mission.id.clone(), mi).is_some() {
                return Err(TopologyError::DuplicateId {
                    kind: "mission",
                    id: mission.id.to_string(),
                });
            }
            check_unique(&mut colors, mission.color.as_str(), || {
                TopologyError::DuplicateColor(mission.color.clone())
            })?;
            check_unique(&mut ranks, mission.rank, || TopologyError::DuplicateRank {
                scope: "missions".into(),
                rank: mission.rank,
            })?;
            if let Some(missing) = mission
                .dependency_asset_ids
                .iter()
                .find(|a| !index.assets.contains_key(*a))
            {
                return Err(TopologyError::DanglingAssetReference {
                    mission: mission.id.clone(),
                    asset: missing.clone(),
                });
            }
        }

        Ok(Self { doc, index })
    }

    pub fn network_name(&self) -> &str {
        &self.doc.network_name
    }

    pub fn schema_version(&self) -> u32 {
        self.doc.schema_version
    }

    pub fn zones(&self) -> &[Zone] {
        &self.doc.zones
    }

    pub fn missions(&self) -> &[MissionArea] {
        &self.doc.missions
    }

    pub fn document(&self) -> &TopologyDoc {
        &self.doc
    }

    /// Pretty-printed topology document.
    pub fn to_document_string(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("topology serializes")
    }

    /// SHA-256 of the compact document encoding, used as the topology
    /// reference carried in snapshots.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.doc).expect("topology serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn sub_zones(&self) -> impl Iterator<Item = (&Zone, &SubZone)> {
        self.doc
            .zones
            .iter()
            .flat_map(|z| z.sub_zones.iter().map(move |s| (z, s)))
    }

    pub fn assets(&self) -> impl Iterator<Item = &Asset> {
        self.sub_zones().flat_map(|(_, s)| s.assets.iter())
    }

    pub fn all_asset_ids(&self) -> &BTreeSet<AssetId> {
        &self.index.all_assets
    }

    pub fn asset_count(&self) -> usize {
        self.index.all_assets.len()
    }

    pub fn asset(&self, id: &AssetId) -> Option<&Asset> {
        let &(z, s, a) = self.index.assets.get(id)?;
        Some(&self.doc.zones[z].sub_zones[s].assets[a])
    }

    pub fn sub_zone(&self, id: &SubZoneId) -> Option<&SubZone> {
        let &(z, s) = self.index.sub_zones.get(id)?;
        Some(&self.doc.zones[z].sub_zones[s])
    }

    pub fn zone_of(&self, sub_zone: &SubZoneId) -> Option<&Zone> {
        let &(z, _) = self.index.sub_zones.get(sub_zone)?;
        Some(&self.doc.zones[z])
    }

    pub fn contains_sub_zone(&self, id: &SubZoneId) -> bool {
        self.index.sub_zones.contains_key(id)
    }

    pub fn contains_asset(&self, id: &AssetId) -> bool {
        self.index.assets.contains_key(id)
    }

    /// Sub-zone holding the given asset.
    pub fn sub_zone_of_asset(&self, id: &AssetId) -> Option<&SubZoneId> {
        self.asset(id).map(|a| &a.sub_zone_id)
    }

    /// Asset ids of a sub-zone.
    pub fn sub_zone_assets(&self, id: &SubZoneId) -> Option<&BTreeSet<AssetId>> {
        self.index.sub_zone_assets.get(id)
    }

    /// Panel position of a sub-zone: (zone layout rank, sub-zone layout rank).
    pub fn layout_key(&self, id: &SubZoneId) -> Option<(i32, i32)> {
        let &(z, s) = self.index.sub_zones.get(id)?;
        let zone = &self.doc.zones[z];
        Some((zone.layout_rank, zone.sub_zones[s].layout_rank))
    }

    pub fn mission(&self, id: &MissionId) -> Option<&MissionArea> {
        self.index.missions.get(id).map(|&i| &self.doc.missions[i])
    }

    pub fn mission_dependency_set(
        &self,
        id: &MissionId,
    ) -> Result<&BTreeSet<AssetId>, TopologyError> {
        self.mission(id)
            .map(|m| &m.dependency_asset_ids)
            .ok_or_else(|| TopologyError::UnknownMission(id.clone()))
    }

    /// Sub-zones containing at least one of `asset_ids`.
    pub fn subzones_touching<'a>(
        &self,
        asset_ids: impl IntoIterator<Item = &'a AssetId>,
    ) -> Result<BTreeSet<SubZoneId>, TopologyError> {
        asset_ids
            .into_iter()
            .map(|a| {
                self.sub_zone_of_asset(a)
                    .cloned()
                    .ok_or_else(|| TopologyError::UnknownAsset(a.clone()))
            })
            .collect()
    }
}
