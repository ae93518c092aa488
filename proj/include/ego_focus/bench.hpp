#pragma once

// Throughput and memory benchmark of the pipeline itself (the upstream pose
// estimator is out of the picture). Reports CSV rows
//   stage,resolution,throughput,peak_mem_bytes

#include <cstdint>
#include <string>
#include <vector>

#include "ego_focus/pipeline.hpp"

namespace ego_focus {

struct Resolution {
  int width = 0;
  int height = 0;
};

/// "1920x1080" -> {1920, 1080}; throws ConfigError.
Resolution parse_resolution(const std::string& text);

struct BenchConfig {
  std::int64_t pose_count = 100000;
  std::vector<Resolution> resolutions = {{1920, 1080}, {960, 544}, {504, 378}};
  int maps_per_resolution = 120;
  int focus_window = 15;
  std::vector<std::int64_t> memory_stream_lengths = {100000, 1000000};
  std::uint64_t seed = 7;
};

struct BenchRow {
  std::string stage;
  std::string resolution;  // "-" when not applicable
  double throughput = 0.0;
  std::size_t peak_mem_bytes = 0;
};

/// Stitching + acceleration + projection over a batched synthetic stream of
/// `count` frames (L=60, O=5). Returns poses per second, single-threaded.
double bench_pose_math(std::int64_t count, std::uint64_t seed = 7);

/// Renders `maps` focus maps of N points at the given resolution. Returns
/// maps per second, single-threaded.
double bench_render(Resolution resolution, int maps, int focus_window = 15);

/// Runs the streaming pipeline (no rendering) over a lazily generated,
/// batched `frames`-long stream in a child process and returns the child's
/// peak resident set size in bytes.
std::size_t measure_stream_peak_memory(std::int64_t frames, std::uint64_t seed = 7);

/// Pose source producing a batched, disturbed arc stream frame by frame.
/// Holds one window at a time.
PoseSource synthetic_batched_source(std::int64_t frames, std::uint64_t seed, int window_size = 60,
                                    int overlap = 5);

std::vector<BenchRow> run_bench(const BenchConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace ego_focus
