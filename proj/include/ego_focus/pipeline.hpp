#pragma once

// End-to-end streaming pipeline:
//   pose records -> stitch (batched streams) -> camera centers ->
//   acceleration -> focus points -> focus maps -> files.
//
// Pose math and stitching run on the calling thread. Map rendering and file
// writes fan out to worker threads through a bounded queue; each frame's
// files are produced by exactly one job, so the output bytes do not depend
// on the worker count.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ego_focus/motion_focus.hpp"
#include "ego_focus/pose_io.hpp"
#include "ego_focus/stitcher.hpp"

namespace ego_focus {

inline constexpr const char* kThreadsEnv = "EGO_FOCUS_THREADS";

struct RunConfig {
  int window_size = kDefaultWindowSize;  // L
  int overlap = kDefaultOverlap;         // O
  StitchOptions stitch;
  FocusConfig focus;
  bool smooth_positions = false;
  int map_scale = 1;

  std::filesystem::path out_dir;  // empty: nothing written per frame
  bool emit_float_maps = false;
  bool write_focus_csv = true;
  std::optional<std::filesystem::path> residuals_path;
  std::optional<std::filesystem::path> depth_dir;
  double depth_alpha = kDefaultDepthAlpha;
  bool render = true;
  int threads = 1;  // 0: one per hardware thread

  /// Throws ConfigError / InvalidPlanError.
  void validate() const;
};

/// Reads EGO_FOCUS_THREADS; unset or unparsable means 0 (auto).
int threads_from_env();

struct RunSummary {
  std::int64_t records_read = 0;
  std::int64_t frames_processed = 0;  // globally aligned frames
  std::int64_t samples = 0;
  std::int64_t points_projected = 0;
  std::int64_t points_skipped = 0;
  std::int64_t maps_rendered = 0;
  std::int64_t depth_maps_written = 0;
  std::int64_t batches = 0;
  std::vector<std::string> warnings;
  double seconds = 0.0;
  double frames_per_second = 0.0;
  std::size_t peak_rss_bytes = 0;
};

/// Optional taps, mainly for tests. on_map may run on worker threads; calls
/// are serialized but not ordered.
struct RunObserver {
  std::function<void(const CameraPose&)> on_pose;
  std::function<void(const FocusPoint&)> on_point;
  std::function<void(std::int64_t frame, const FocusMap&)> on_map;
};

using PoseSource = std::function<std::optional<PoseStreamRecord>()>;

RunSummary run_stream(const PoseSource& source, const Intrinsics& k, const RunConfig& cfg,
                      const RunObserver& observer = {});

RunSummary run_stream(std::span<const PoseStreamRecord> records, const Intrinsics& k, const RunConfig& cfg,
                      const RunObserver& observer = {});

/// Peak resident set size of this process so far.
std::size_t peak_rss_bytes();

std::string format_summary(const RunSummary& s);

}  // namespace ego_focus
