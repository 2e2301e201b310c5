//! Sharded JSONL output with checksum sidecars.
//!
//! Records are grouped by video (a video never splits across shards) and
//! written as `shard-NNNNN.jsonl` files capped at a configured record
//! count; the cap is soft at video granularity. Each shard gets a
//! `.sha256` sidecar, and rewriting a shard whose on-disk bytes already
//! hash to the new content is a no-op, which makes re-runs resumable.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::PipelineError;

/// Where one video's records landed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoLocation {
    pub video_id: String,
    /// Shard path relative to the output root, e.g. `dialogues/shard-00000.jsonl`.
    pub shard: String,
    /// Zero-based line offsets within the shard, strictly increasing.
    pub record_offsets: Vec<u64>,
}

/// Result of writing one shard set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShardSet {
    /// Relative shard paths in write order.
    pub shards: Vec<String>,
    /// Per-video locations in input order.
    pub locations: Vec<VideoLocation>,
    /// Shards whose previous on-disk content already matched.
    pub skipped_unchanged: usize,
}

/// Write per-video record lines under `out_root/subdir`, packing whole
/// videos into shards of at most `records_per_shard` records (single
/// videos larger than the cap get a shard of their own).
pub fn write_video_sharded(
    out_root: &Path,
    subdir: &str,
    per_video: &[(String, Vec<String>)],
    records_per_shard: usize,
) -> Result<ShardSet, PipelineError> {
    debug_assert!(records_per_shard > 0);
    let mut set = ShardSet::default();
    let with_records: Vec<&(String, Vec<String>)> =
        per_video.iter().filter(|(_, lines)| !lines.is_empty()).collect();
    if with_records.is_empty() {
        return Ok(set);
    }
    let dir = out_root.join(subdir);
    fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;

    let mut shard_index = 0usize;
    let mut lines: Vec<String> = Vec::new();
    let mut pending: Vec<(String, Vec<u64>)> = Vec::new();

    let flush = |set: &mut ShardSet,
                 shard_index: &mut usize,
                 lines: &mut Vec<String>,
                 pending: &mut Vec<(String, Vec<u64>)>|
     -> Result<(), PipelineError> {
        if lines.is_empty() {
            return Ok(());
        }
        let name = format!("shard-{:05}.jsonl", shard_index);
        let rel = format!("{subdir}/{name}");
        let path = dir.join(&name);
        let mut content = lines.join("\n");
        content.push('\n');
        if write_if_changed(&path, content.as_bytes())? {
            set.skipped_unchanged += 1;
        }
        set.shards.push(rel.clone());
        for (video_id, offsets) in pending.drain(..) {
            set.locations.push(VideoLocation {
                video_id,
                shard: rel.clone(),
                record_offsets: offsets,
            });
        }
        lines.clear();
        *shard_index += 1;
        Ok(())
    };

    for (video_id, video_lines) in with_records {
        if !lines.is_empty() && lines.len() + video_lines.len() > records_per_shard {
            flush(&mut set, &mut shard_index, &mut lines, &mut pending)?;
        }
        let offsets: Vec<u64> = (0..video_lines.len())
            .map(|i| (lines.len() + i) as u64)
            .collect();
        pending.push((video_id.clone(), offsets));
        lines.extend(video_lines.iter().cloned());
    }
    flush(&mut set, &mut shard_index, &mut lines, &mut pending)?;
    Ok(set)
}

/// Write `content` to `path` with a sha256 sidecar; skip the write when the
/// existing file already matches. Returns true when skipped.
pub fn write_if_changed(path: &Path, content: &[u8]) -> Result<bool, PipelineError> {
    let digest = hex::encode(Sha256::digest(content));
    let sidecar = sidecar_path(path);
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sidecar_content = format!("{digest}  {file_name}\n");
    if let Ok(existing) = fs::read(path) {
        if hex::encode(Sha256::digest(&existing)) == digest {
            // shard complete from a previous run; refresh the sidecar only
            // if it went missing
            if fs::read_to_string(&sidecar).ok().as_deref() != Some(&sidecar_content) {
                fs::write(&sidecar, &sidecar_content)
                    .map_err(|e| PipelineError::io(&sidecar, e))?;
            }
            return Ok(true);
        }
    }
    fs::write(path, content).map_err(|e| PipelineError::io(path, e))?;
    fs::write(&sidecar, &sidecar_content).map_err(|e| PipelineError::io(&sidecar, e))?;
    Ok(false)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sha256");
    std::path::PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn per_video(counts: &[(&str, usize)]) -> Vec<(String, Vec<String>)> {
        counts
            .iter()
            .map(|&(id, n)| {
                let lines = (0..n)
                    .map(|i| format!("{{\"video\":\"{id}\",\"record\":{i}}}"))
                    .collect();
                (id.to_string(), lines)
            })
            .collect()
    }

    #[test]
    fn videos_never_split_across_shards() {
        let dir = tempfile::tempdir().unwrap();
        let videos = per_video(&[("a", 3), ("b", 3), ("c", 2)]);
        let set = write_video_sharded(dir.path(), "out", &videos, 4).unwrap();
        assert_eq!(set.shards.len(), 3);
        for loc in &set.locations {
            let content =
                std::fs::read_to_string(dir.path().join(&loc.shard)).unwrap();
            for &offset in &loc.record_offsets {
                let line = content.lines().nth(offset as usize).unwrap();
                assert!(line.contains(&format!("\"{}\"", loc.video_id)));
            }
        }
    }

    #[test]
    fn offsets_are_strictly_increasing() {
        let dir = tempfile::tempdir().unwrap();
        let videos = per_video(&[("a", 2), ("b", 2), ("c", 5)]);
        let set = write_video_sharded(dir.path(), "out", &videos, 4).unwrap();
        for loc in &set.locations {
            for w in loc.record_offsets.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn rewriting_identical_content_is_a_noop() {
        let dir = tempfile::tempdir().unwrap();
        let videos = per_video(&[("a", 2), ("b", 2)]);
        let first = write_video_sharded(dir.path(), "out", &videos, 10).unwrap();
        assert_eq!(first.skipped_unchanged, 0);
        let shard_path = dir.path().join(&first.shards[0]);
        let mtime = std::fs::metadata(&shard_path).unwrap().modified().unwrap();
        let second = write_video_sharded(dir.path(), "out", &videos, 10).unwrap();
        assert_eq!(second.skipped_unchanged, 1);
        assert_eq!(
            std::fs::metadata(&shard_path).unwrap().modified().unwrap(),
            mtime
        );
        assert_eq!(first.locations, second.locations);
    }

    #[test]
    fn sidecar_matches_content() {
        let dir = tempfile::tempdir().unwrap();
        let videos = per_video(&[("a", 1)]);
        let set = write_video_sharded(dir.path(), "out", &videos, 10).unwrap();
        let shard = dir.path().join(&set.shards[0]);
        let content = std::fs::read(&shard).unwrap();
        let sidecar = std::fs::read_to_string(sidecar_path(&shard)).unwrap();
        let digest = hex::encode(sha2::Sha256::digest(&content));
        assert!(sidecar.starts_with(&digest));
    }

    #[test]
    fn oversize_video_gets_its_own_shard() {
        let dir = tempfile::tempdir().unwrap();
        let videos = per_video(&[("a", 1), ("big", 9), ("c", 1)]);
        let set = write_video_sharded(dir.path(), "out", &videos, 4).unwrap();
        assert_eq!(set.shards.len(), 3);
        let big = set.locations.iter().find(|l| l.video_id == "big").unwrap();
        assert_eq!(big.record_offsets.len(), 9);
    }
}
