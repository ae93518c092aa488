#pragma once

// Acceleration-based motion focus.
//
// For three consecutive camera centers the discrete acceleration
//   a_w = (p_t - p_{t-1}) - (p_{t-1} - p_{t-2})
// is rotated into the current camera frame (a_c = R_t a_w) and projected
// through the pinhole model. The last N projected points are splatted as
// Gaussians whose spread scales with the point's acceleration magnitude
// relative to the window median, then normalized.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "ego_focus/geometry.hpp"

namespace ego_focus {

inline constexpr int kDefaultFocusWindow = 15;
inline constexpr double kDefaultSigmaFraction = 0.04;
inline constexpr double kDefaultDepthAlpha = 0.15;

struct MotionSample {
  std::int64_t frame_index = 0;
  Vec3 v_prev = Vec3::Zero();
  Vec3 v_cur = Vec3::Zero();
  Vec3 a_world = Vec3::Zero();
  Vec3 a_camera = Vec3::Zero();  // filled by acceleration_camera
  double magnitude = 0.0;        // |a_camera|, units / frame^2
};

/// World-space quantities from centers at t-2, t-1, t (uniform frame spacing).
MotionSample acceleration_world(const Vec3& p_t, const Vec3& p_prev, const Vec3& p_prev2,
                                std::int64_t frame_index = 0);

/// Rotates a_world into the camera frame of `pose_t`. The pose must belong to
/// the sample's frame.
MotionSample acceleration_camera(MotionSample sample, const CameraPose& pose_t);

enum class Normalization { peak, sum };

/// What to do with accelerations pointing behind the image plane.
enum class NegativeDepthPolicy { skip, mirror };

struct FocusConfig {
  int window_frames = kDefaultFocusWindow;  // N
  std::optional<double> sigma_px;           // unset: 0.04 * image width
  double eps_z = kDefaultEpsZ;
  double scale_low = 0.25;
  double scale_high = 4.0;
  double truncation_radius = 3.0;  // in units of sigma * s_i
  Normalization normalization = Normalization::peak;
  NegativeDepthPolicy project_negative = NegativeDepthPolicy::skip;

  double sigma_for(const Intrinsics& k) const {
    return sigma_px ? *sigma_px : kDefaultSigmaFraction * k.width;
  }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct FocusPoint {
  std::int64_t frame_index = 0;
  std::optional<Vec2> pixel;  // absent when not projectable
  Vec3 a_camera = Vec3::Zero();
  double magnitude = 0.0;

  bool projectable() const { return pixel.has_value(); }
};

FocusPoint focus_point(const MotionSample& sample, const Intrinsics& k, const FocusConfig& cfg);

struct Grid {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  Grid() = default;
  Grid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct FocusMap {
  Grid grid;
  /// Points whose truncated kernel touched at least one pixel.
  int contributing_points = 0;

  int width() const { return grid.width; }
  int height() const { return grid.height; }
  double at(int x, int y) const { return grid.at(x, y); }
};

/// Kernel scales s_i = clamp(|a_i| / median |a|, low, high) over the
/// projectable points, in input order (1 for non-projectable entries).
std::vector<double> kernel_scales(std::span<const FocusPoint> points, const FocusConfig& cfg);

/// Unnormalized sum of the truncated kernels, same layout as render_focus_map.
FocusMap accumulate_kernels(std::span<const FocusPoint> points, const Intrinsics& k, const FocusConfig& cfg,
                            int map_scale = 1);

/// Renders the trailing-window points into a map of (width/map_scale) x
/// (height/map_scale) pixels. Pixel (x, y) sits at image coordinates
/// (x * map_scale, y * map_scale). Per-pixel sums run in point order, so the
/// result is bit-reproducible.
FocusMap render_focus_map(std::span<const FocusPoint> points, const Intrinsics& k, const FocusConfig& cfg,
                          int map_scale = 1);

/// out = depth * (alpha + (1 - alpha) * M)
Grid modulate_depth(const Grid& depth, const FocusMap& map, double alpha = kDefaultDepthAlpha);

/// Streaming front end: turns consecutive global poses into focus points and
/// keeps the trailing window of N points. Only ever looks at past frames.
class FocusTracker {
 public:
  FocusTracker(Intrinsics k, FocusConfig cfg, bool smooth_positions = false);

  /// Returns the focus point for this frame, or nullopt while fewer than
  /// three (five when smoothing) centers are available.
  std::optional<FocusPoint> push(const CameraPose& pose);

  const std::optional<MotionSample>& last_sample() const { return last_sample_; }
  std::vector<FocusPoint> window() const { return {window_.begin(), window_.end()}; }
  const Intrinsics& intrinsics() const { return k_; }
  const FocusConfig& config() const { return cfg_; }

 private:
  Intrinsics k_;
  FocusConfig cfg_;
  bool smooth_;
  std::optional<std::int64_t> last_frame_;
  std::deque<Vec3> raw_centers_;
  std::deque<Vec3> centers_;
  std::deque<FocusPoint> window_;
  std::optional<MotionSample> last_sample_;
};

}  // namespace ego_focus
