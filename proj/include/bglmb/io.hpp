#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "bglmb/pipeline.hpp"
#include "bglmb/sim.hpp"
#include "bglmb/types.hpp"

namespace bglmb::io {

enum class DetectionFormat { MotCsv, BearingRangeCsv };

DetectionFormat detection_format_for(SensorKind sensor);

/// Parse a detection file into dense per-frame sets (frames 1..max, frames
/// with no rows come back empty). MOT rows are
/// "frame,id,bb_left,bb_top,bb_width,bb_height[,conf,...]" and collapse to
/// box centers; bearing-range rows are "frame,theta,range".
/// Throws DataError with a line number on malformed input.
std::vector<DetectionSet> load_detections(const std::filesystem::path& path,
                                          DetectionFormat format);

void write_detections(const std::vector<DetectionSet>& detections,
                      const std::filesystem::path& path, DetectionFormat format);

/// Track CSV: header "frame,id,x,y,vx,vy", one row per (frame, id), ordered
/// by frame then id, positions at 6 decimal places. Written atomically.
void write_tracks(const std::vector<Track>& tracks, const std::filesystem::path& path);
std::vector<Track> load_tracks(const std::filesystem::path& path);

/// Per-frame clutter estimates: "frame,lambda_hat,n_clutter_gen".
void write_lambda_csv(const std::vector<FrameResult>& frames,
                      const std::filesystem::path& path);

/// key = value lines, '#' comments, nested keys via dots. Order preserved.
struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};
std::vector<KvEntry> parse_kv_file(const std::filesystem::path& path);

/// Load a tracker configuration. Every parameter is defaulted; unknown keys
/// are a hard error.
TrackerConfig load_tracker_config(const std::filesystem::path& path);

ScenarioSpec load_scenario(const std::filesystem::path& path);

/// FNV-1a fingerprint of the effective configuration, for run manifests.
std::string config_fingerprint(const std::vector<KvEntry>& entries);

void write_run_manifest(const std::filesystem::path& path, const std::string& config_hash,
                        std::uint64_t seed, const std::optional<double>& fixed_clutter,
                        const std::vector<std::pair<std::string, std::string>>& outputs);

}  // namespace bglmb::io
