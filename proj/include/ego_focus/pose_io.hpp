#pragma once

// JSON Lines pose streams and intrinsics files.
//
// One record per line:
//   {"frame": 12, "T_wc": [16 numbers, row-major world-to-camera],
//    "truth": {"position": [..], "velocity": [..], "acceleration": [..]},
//    "batch": 3}
// "truth" is written by the simulator only. "batch" marks streams produced
// window by window: every window is a run of records sharing a batch id, in
// its own local world frame, and overlap frames appear once per window.
// Without "batch" the whole stream is a single consistent trajectory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ego_focus/geometry.hpp"
#include "ego_focus/trajectory_sim.hpp"

namespace ego_focus {

struct PoseStreamRecord {
  CameraPose pose;
  std::optional<TruthKinematics> truth;
  std::optional<std::int64_t> batch;
};

/// Parses and validates one line. Throws ParseError (with the line number)
/// for malformed JSON, missing fields or an invalid transform.
PoseStreamRecord parse_pose_record(std::string_view line, std::size_t line_number);

/// Single-line JSON with round-trip exact numbers, no trailing newline.
std::string format_pose_record(const PoseStreamRecord& record);

/// Incremental reader; holds one line at a time. Enforces contiguous frame
/// indices (within each batch for batched streams).
class PoseStreamReader {
 public:
  explicit PoseStreamReader(std::istream& in);
  /// Opens `path`, or standard input for "-".
  explicit PoseStreamReader(const std::filesystem::path& path);
  ~PoseStreamReader();

  PoseStreamReader(const PoseStreamReader&) = delete;
  PoseStreamReader& operator=(const PoseStreamReader&) = delete;

  std::optional<PoseStreamRecord> next();
  std::size_t line_number() const { return line_; }

 private:
  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  std::size_t line_ = 0;
  std::optional<PoseStreamRecord> last_;
};

std::vector<PoseStreamRecord> load_pose_stream(std::istream& in);
std::vector<PoseStreamRecord> load_pose_stream(const std::filesystem::path& path);

void write_pose_stream(std::ostream& out, std::span<const PoseStreamRecord> records);

/// Records for a simulated trajectory, with truth attached.
std::vector<PoseStreamRecord> to_records(const Trajectory& trajectory);

/// Records for a batched stream (one batch id per window).
std::vector<PoseStreamRecord> to_batched_records(std::span<const std::vector<CameraPose>> batches);

/// {"fx":..,"fy":..,"cx":..,"cy":..,"width":..,"height":..}; throws
/// ConfigError naming the missing or invalid key.
Intrinsics parse_intrinsics(std::string_view json_text);
Intrinsics load_intrinsics(const std::filesystem::path& path);
std::string format_intrinsics(const Intrinsics& k);

}  // namespace ego_focus
