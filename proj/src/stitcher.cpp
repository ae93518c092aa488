#include "ego_focus/stitcher.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ego_focus/errors.hpp"

namespace ego_focus {
namespace {

// Exact yaw-only rotation: the gravity row and column are literal 0/1.
Mat3 exact_yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return r;
}

double median(std::vector<double> values) {
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// Median ratio of consecutive center distances over the overlap, global / local.
double overlap_scale(std::span<const CameraPose> global, std::span<const CameraPose> local) {
  std::vector<double> ratios;
  for (std::size_t i = 1; i < global.size() && i < local.size(); ++i) {
    const double dl = (camera_center(local[i]) - camera_center(local[i - 1])).norm();
    const double dg = (camera_center(global[i]) - camera_center(global[i - 1])).norm();
    if (dl > 0.0 && dg > 0.0) ratios.push_back(dg / dl);
  }
  return ratios.empty() ? 1.0 : median(std::move(ratios));
}

}  // namespace

WindowPlan::WindowPlan(int window_size, int overlap, std::optional<std::int64_t> total_frames,
                       std::int64_t first_frame)
    : window_size_(window_size),
      overlap_(overlap),
      total_frames_(total_frames),
      first_frame_(first_frame) {
  if (window_size < 1) throw InvalidPlanError("window size must be positive");
  if (overlap < 0) throw InvalidPlanError("overlap must be non-negative");
  if (overlap >= window_size) {
    throw InvalidPlanError(
        fmt::format("overlap ({}) must be smaller than the window size ({})", overlap, window_size));
  }
  if (total_frames && *total_frames < 1) throw InvalidPlanError("total frames must be at least 1");
}

WindowSpan WindowPlan::window(std::size_t k) const {
  const std::int64_t begin = window_start(k);
  std::int64_t end = begin + window_size_;
  if (total_frames_) end = std::min(end, first_frame_ + *total_frames_);
  return {begin, end};
}

std::size_t WindowPlan::window_count() const {
  if (!total_frames_) throw InvalidPlanError("window count needs a known total");
  // Window k > 0 exists while it still carries frames past its overlap.
  std::size_t count = 1;
  while (window_start(count) + overlap_ < first_frame_ + *total_frames_ &&
         window(count - 1).end < first_frame_ + *total_frames_) {
    ++count;
  }
  return count;
}

std::vector<WindowSpan> WindowPlan::windows() const {
  std::vector<WindowSpan> out;
  const std::size_t n = window_count();
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(window(k));
  return out;
}

WindowPlan plan_windows(std::int64_t total_frames, int window_size, int overlap) {
  return WindowPlan(window_size, overlap, total_frames);
}

AnchorCorrection anchor_correction(const CameraPose& global_anchor, const CameraPose& local_anchor) {
  const Mat3 full_rotation = global_anchor.rotation().transpose() * local_anchor.rotation();
  AnchorCorrection out;
  double yaw = 0.0;
  try {
    yaw = decompose_gravity_ypr(full_rotation).yaw;
  } catch (const DegenerateOrientationError& e) {
    yaw = e.yaw();
    out.degenerate = true;
  }
  const Mat3 r_yaw = exact_yaw_rotation(yaw);
  out.transform.rotation = r_yaw;
  out.transform.translation = camera_center(global_anchor) - r_yaw * camera_center(local_anchor);
  return out;
}

CameraPose apply_correction(const CameraPose& local, const AnchorCorrection& correction) {
  if (correction.scale == 1.0) {
    return CameraPose{local.frame_index, compose(local.world_to_camera, inverse(correction.transform))};
  }
  const Mat3 rotation = local.rotation() * correction.transform.rotation.transpose();
  const Vec3 center =
      correction.scale * (correction.transform.rotation * camera_center(local)) + correction.transform.translation;
  return CameraPose{local.frame_index, Rigid{rotation, -(rotation * center)}};
}

BoundaryResidual overlap_residual(std::span<const CameraPose> previous,
                                  std::span<const CameraPose> corrected, std::size_t boundary_index) {
  BoundaryResidual out;
  out.boundary_index = boundary_index;
  for (const CameraPose& cur : corrected) {
    const auto it = std::find_if(previous.begin(), previous.end(),
                                 [&](const CameraPose& p) { return p.frame_index == cur.frame_index; });
    if (it == previous.end()) continue;
    out.frames.push_back(cur.frame_index);
    out.center_distance.push_back((camera_center(*it) - camera_center(cur)).norm());
    out.rotation_angle.push_back(rotation_angle_between(it->rotation(), cur.rotation()));
  }
  return out;
}

std::vector<CameraPose> stitch_step(StitchState& state, std::span<const CameraPose> batch,
                                    const WindowPlan& plan, const StitchOptions& options) {
  const std::size_t k = state.batches_seen;
  const WindowSpan span = plan.window(k);
  const auto overlap = static_cast<std::size_t>(plan.overlap());

  if (batch.empty()) throw StreamDiscontinuityError(span.begin, "empty batch");
  if (state.finished) {
    throw StreamDiscontinuityError(batch.front().frame_index,
                                   "batch received after the final (short) window");
  }
  if (batch.front().frame_index != span.begin) {
    throw StreamDiscontinuityError(
        batch.front().frame_index,
        fmt::format("batch {} starts at frame {}, expected {}", k, batch.front().frame_index, span.begin));
  }
  for (std::size_t i = 1; i < batch.size(); ++i) {
    if (batch[i].frame_index != batch[i - 1].frame_index + 1) {
      throw StreamDiscontinuityError(
          batch[i].frame_index, fmt::format("frame {} follows frame {} in batch {}", batch[i].frame_index,
                                            batch[i - 1].frame_index, k));
    }
  }
  const auto size = static_cast<std::int64_t>(batch.size());
  if (size > span.size() || (plan.total_frames() && size != span.size())) {
    throw StreamDiscontinuityError(batch.back().frame_index,
                                   fmt::format("batch {} holds {} frames, planned {}", k, size, span.size()));
  }
  if (k > 0 && batch.size() <= overlap) {
    throw StreamDiscontinuityError(batch.back().frame_index,
                                   fmt::format("batch {} has no frames beyond the overlap", k));
  }

  std::vector<CameraPose> emitted;
  if (k == 0) {
    emitted.assign(batch.begin(), batch.end());
    state.pending_correction = AnchorCorrection{};
  } else if (overlap == 0) {
    state.warnings.push_back({k, "no overlap frames: batch emitted without alignment"});
    emitted.assign(batch.begin(), batch.end());
    state.pending_correction = AnchorCorrection{};
  } else {
    const std::size_t anchor_idx = options.anchor == AnchorChoice::last_shared ? overlap - 1 : 0;
    const CameraPose& global_anchor = state.tail.at(anchor_idx);
    const CameraPose& local_anchor = batch[anchor_idx];
    if (global_anchor.frame_index != local_anchor.frame_index) {
      throw StreamDiscontinuityError(local_anchor.frame_index, "anchor frame missing from emitted history");
    }

    AnchorCorrection correction = anchor_correction(global_anchor, local_anchor);
    if (correction.degenerate) {
      state.warnings.push_back(
          {k, fmt::format("degenerate orientation at anchor frame {}; yaw taken with roll = 0",
                          local_anchor.frame_index)});
    }
    if (options.scale_correction) {
      correction.scale = overlap_scale(std::span(state.tail), batch.first(overlap));
      const Vec3 p_global = camera_center(global_anchor);
      correction.transform.translation =
          p_global - correction.scale * (correction.transform.rotation * camera_center(local_anchor));
    }

    std::vector<CameraPose> corrected;
    corrected.reserve(batch.size());
    for (const CameraPose& pose : batch) corrected.push_back(apply_correction(pose, correction));

    state.residual_log.push_back(
        overlap_residual(std::span(state.tail), std::span(corrected).first(overlap), k));
    state.anchor_pose = global_anchor;
    state.pending_correction = correction;
    emitted.assign(corrected.begin() + static_cast<std::ptrdiff_t>(overlap), corrected.end());
  }

  // Keep the last O global poses; they are the next window's overlap.
  std::vector<CameraPose> tail = std::move(state.tail);
  tail.insert(tail.end(), emitted.begin(), emitted.end());
  const std::size_t keep = std::min(overlap, tail.size());
  state.tail.assign(tail.end() - static_cast<std::ptrdiff_t>(keep), tail.end());

  state.batches_seen = k + 1;
  state.frames_emitted += static_cast<std::int64_t>(emitted.size());
  state.next_frame = emitted.back().frame_index + 1;
  if (span.size() < plan.window_size() || size < plan.window_size()) state.finished = true;
  return emitted;
}

}  // namespace ego_focus
