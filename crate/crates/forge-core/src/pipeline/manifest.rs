//! The release manifest: video ids and shard offsets only.
//!
//! The manifest is the only artifact meant for publication, so it carries
//! no transcript text, titles, or turn text — just enough for a consumer
//! to re-fetch videos by id and line records up with shards.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::shard::VideoLocation;
use super::PipelineError;

/// Offsets of one video's records within one shard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardLocation {
    pub shard: String,
    pub record_offsets: Vec<u64>,
}

/// All shard locations for one video; one entry per video id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    pub locations: Vec<ShardLocation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_version: String,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Build a manifest from per-video shard locations, merging duplicate
    /// video ids (e.g. the same video landing in shards from different
    /// partial runs) into a single entry. Entries are sorted by video id,
    /// locations by shard, offsets ascending.
    pub fn build(
        dataset_version: impl Into<String>,
        locations: impl IntoIterator<Item = VideoLocation>,
    ) -> Manifest {
        let mut by_video: BTreeMap<String, BTreeMap<String, Vec<u64>>> = BTreeMap::new();
        for loc in locations {
            by_video
                .entry(loc.video_id)
                .or_default()
                .entry(loc.shard)
                .or_default()
                .extend(loc.record_offsets);
        }
        let entries = by_video
            .into_iter()
            .map(|(video_id, shards)| ManifestEntry {
                video_id,
                locations: shards
                    .into_iter()
                    .map(|(shard, mut record_offsets)| {
                        record_offsets.sort_unstable();
                        record_offsets.dedup();
                        ShardLocation {
                            shard,
                            record_offsets,
                        }
                    })
                    .collect(),
            })
            .collect();
        Manifest {
            dataset_version: dataset_version.into(),
            entries,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Write the manifest file.
pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<(), PipelineError> {
    let mut content = manifest.to_json();
    content.push('\n');
    std::fs::write(path, content).map_err(|e| PipelineError::io(path, e))
}
