#pragma once

// Sliding-window batch stitching.
//
// An upstream estimator processes the stream in overlapping windows of L
// frames, consecutive windows sharing O frames, and reports each window in
// its own local world frame. The stitcher maps every window into the global
// frame defined by the first window:
//
//   * At the anchor frame (a frame shared with the previous window) we know
//     the global pose T_prev (already emitted) and the local pose T_local.
//     S_full = T_prev^-1 o T_local maps local world coordinates to global
//     world coordinates.
//   * Only the gravity yaw of S_full is carried over. The correction S has
//     rotation Ry(yaw) and translation p_prev - Ry(yaw) p_local, so the
//     anchor camera centers coincide exactly.
//   * Every pose of the window is corrected as T_global = T_local o S^-1:
//     a global point is first mapped into the local world (S^-1) and then
//     into the camera (T_local). Its camera center becomes S(p_local).
//   * Frames already emitted (the overlap) are not emitted again; their two
//     estimates are compared and logged as BoundaryResidual.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ego_focus/geometry.hpp"

namespace ego_focus {

inline constexpr int kDefaultWindowSize = 60;
inline constexpr int kDefaultOverlap = 5;

struct WindowSpan {
  std::int64_t begin = 0;  // first frame index
  std::int64_t end = 0;    // one past the last frame index

  std::int64_t size() const { return end - begin; }
  bool operator==(const WindowSpan&) const = default;
};

/// Window layout: window k starts at first_frame + k * (L - O) and holds up
/// to L frames. With an unknown total the final window is whatever remains.
class WindowPlan {
 public:
  WindowPlan(int window_size, int overlap, std::optional<std::int64_t> total_frames = std::nullopt,
             std::int64_t first_frame = 0);

  int window_size() const { return window_size_; }
  int overlap() const { return overlap_; }
  int stride() const { return window_size_ - overlap_; }
  std::int64_t first_frame() const { return first_frame_; }
  const std::optional<std::int64_t>& total_frames() const { return total_frames_; }

  std::int64_t window_start(std::size_t k) const {
    return first_frame_ + static_cast<std::int64_t>(k) * stride();
  }
  /// Span of window k, clipped to the stream end when the total is known.
  WindowSpan window(std::size_t k) const;
  /// Requires a known total.
  std::size_t window_count() const;
  std::vector<WindowSpan> windows() const;

 private:
  int window_size_;
  int overlap_;
  std::optional<std::int64_t> total_frames_;
  std::int64_t first_frame_;
};

/// Throws InvalidPlanError unless total_frames >= 1 and 0 <= O < L.
WindowPlan plan_windows(std::int64_t total_frames, int window_size, int overlap);

enum class AnchorChoice { first_shared, last_shared };

struct StitchOptions {
  AnchorChoice anchor = AnchorChoice::last_shared;
  /// Per-boundary scale from the median ratio of overlap step lengths.
  bool scale_correction = false;
};

struct AnchorCorrection {
  Rigid transform;  // local world -> global world, yaw-only rotation
  double scale = 1.0;
  /// Set when S_full hit the pitch singularity; yaw then uses roll = 0.
  bool degenerate = false;
};

/// Yaw + translation map aligning `local_anchor` onto `global_anchor`.
AnchorCorrection anchor_correction(const CameraPose& global_anchor, const CameraPose& local_anchor);

/// Applies T_global = T_local o S^-1 (or the scaled variant when scale != 1).
CameraPose apply_correction(const CameraPose& local, const AnchorCorrection& correction);

struct BoundaryResidual {
  std::size_t boundary_index = 0;
  std::vector<std::int64_t> frames;
  std::vector<double> center_distance;
  std::vector<double> rotation_angle;  // radians
};

/// Compares every frame present in both sequences (matched by frame index).
BoundaryResidual overlap_residual(std::span<const CameraPose> previous,
                                  std::span<const CameraPose> corrected,
                                  std::size_t boundary_index = 0);

struct StitchWarning {
  std::size_t boundary_index = 0;
  std::string message;
};

/// Running state of one stitched stream. Holds only the last O emitted
/// poses, so its size does not grow with the stream.
struct StitchState {
  std::size_t batches_seen = 0;
  std::int64_t frames_emitted = 0;
  std::optional<std::int64_t> next_frame;
  bool finished = false;  // a short (final) window was consumed
  std::vector<CameraPose> tail;
  std::optional<CameraPose> anchor_pose;
  AnchorCorrection pending_correction;
  std::vector<BoundaryResidual> residual_log;
  std::vector<StitchWarning> warnings;
};

/// Consumes the next planned window and returns the newly emitted global
/// poses. Throws StreamDiscontinuityError when the batch does not match the
/// plan.
std::vector<CameraPose> stitch_step(StitchState& state, std::span<const CameraPose> batch,
                                    const WindowPlan& plan, const StitchOptions& options = {});

}  // namespace ego_focus
