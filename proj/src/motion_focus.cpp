#include "ego_focus/motion_focus.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "ego_focus/errors.hpp"

namespace ego_focus {

MotionSample acceleration_world(const Vec3& p_t, const Vec3& p_prev, const Vec3& p_prev2,
                                std::int64_t frame_index) {
  MotionSample s;
  s.frame_index = frame_index;
  s.v_cur = p_t - p_prev;
  s.v_prev = p_prev - p_prev2;
  s.a_world = s.v_cur - s.v_prev;
  return s;
}

MotionSample acceleration_camera(MotionSample sample, const CameraPose& pose_t) {
  if (pose_t.frame_index != sample.frame_index) {
    throw StreamDiscontinuityError(
        pose_t.frame_index,
        fmt::format("pose frame {} does not match sample frame {}", pose_t.frame_index, sample.frame_index));
  }
  sample.a_camera = pose_t.rotation() * sample.a_world;
  sample.magnitude = sample.a_camera.norm();
  return sample;
}

void FocusConfig::validate() const {
  if (window_frames < 1) throw ConfigError("focus_n", "focus window N must be at least 1");
  if (sigma_px && !(*sigma_px > 0.0)) throw ConfigError("sigma_px", "sigma_px must be positive");
  if (!(eps_z >= 0.0)) throw ConfigError("eps_z", "eps_z must be non-negative");
  if (!(scale_low > 0.0) || !(scale_low <= scale_high)) {
    throw ConfigError("s_clamp", "kernel scale clamp needs 0 < low <= high");
  }
  if (!(truncation_radius > 0.0)) throw ConfigError("truncation_radius", "truncation radius must be positive");
}

FocusPoint focus_point(const MotionSample& sample, const Intrinsics& k, const FocusConfig& cfg) {
  FocusPoint p;
  p.frame_index = sample.frame_index;
  p.a_camera = sample.a_camera;
  p.magnitude = sample.magnitude;
  p.pixel = project_pinhole(sample.a_camera, k, cfg.eps_z);
  if (!p.pixel && cfg.project_negative == NegativeDepthPolicy::mirror) {
    p.pixel = project_pinhole(-sample.a_camera, k, cfg.eps_z);
  }
  return p;
}

std::vector<double> kernel_scales(std::span<const FocusPoint> points, const FocusConfig& cfg) {
  std::vector<double> mags;
  for (const FocusPoint& p : points) {
    if (p.projectable()) mags.push_back(p.magnitude);
  }
  std::vector<double> scales(points.size(), 1.0);
  if (mags.empty()) return scales;

  std::sort(mags.begin(), mags.end());
  const std::size_t n = mags.size();
  const double median = n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
  // Projectable points have |a_z| > eps_z >= 0, so the median is positive
  // unless eps_z = 0 admits a zero vector.
  if (!(median > 0.0)) return scales;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].projectable()) {
      scales[i] = std::clamp(points[i].magnitude / median, cfg.scale_low, cfg.scale_high);
    }
  }
  return scales;
}

FocusMap accumulate_kernels(std::span<const FocusPoint> points, const Intrinsics& k, const FocusConfig& cfg,
                            int map_scale) {
  if (map_scale < 1) throw ConfigError("map_scale", "map scale divisor must be at least 1");
  const int width = std::max(1, k.width / map_scale);
  const int height = std::max(1, k.height / map_scale);
  FocusMap map{Grid(width, height), 0};

  const double sigma = cfg.sigma_for(k) / map_scale;
  const std::vector<double> scales = kernel_scales(points, cfg);
  std::vector<double> gx;

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].projectable()) continue;
    const double cu = points[i].pixel->x() / map_scale;
    const double cv = points[i].pixel->y() / map_scale;
    const double s = sigma * scales[i];
    const double radius = cfg.truncation_radius * s;
    const double inv_two_s2 = 1.0 / (2.0 * s * s);

    const double y_lo = std::max(0.0, std::ceil(cv - radius));
    const double y_hi = std::min(height - 1.0, std::floor(cv + radius));
    const double x_lo = std::max(0.0, std::ceil(cu - radius));
    const double x_hi = std::min(width - 1.0, std::floor(cu + radius));
    if (!(y_lo <= y_hi && x_lo <= x_hi)) continue;

    // exp(-(dx^2 + dy^2) / 2s^2) = exp(-dx^2 / 2s^2) * exp(-dy^2 / 2s^2)
    const int x0 = static_cast<int>(x_lo);
    const int x1 = static_cast<int>(x_hi);
    gx.resize(static_cast<std::size_t>(x1 - x0 + 1));
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cu;
      gx[static_cast<std::size_t>(x - x0)] = std::exp(-dx * dx * inv_two_s2);
    }

    bool touched = false;
    const double r2 = radius * radius;
    for (int y = static_cast<int>(y_lo); y <= static_cast<int>(y_hi); ++y) {
      const double dy = y - cv;
      const double rem = r2 - dy * dy;
      if (rem < 0.0) continue;
      const double half = std::sqrt(rem);
      const int xa = std::max(x0, static_cast<int>(std::ceil(cu - half)));
      const int xb = std::min(x1, static_cast<int>(std::floor(cu + half)));
      if (xa > xb) continue;
      const double gy = std::exp(-dy * dy * inv_two_s2);
      double* row = map.grid.values.data() + static_cast<std::size_t>(y) * width;
      for (int x = xa; x <= xb; ++x) row[x] += gy * gx[static_cast<std::size_t>(x - x0)];
      touched = true;
    }
    if (touched) ++map.contributing_points;
  }
  return map;
}

FocusMap render_focus_map(std::span<const FocusPoint> points, const Intrinsics& k, const FocusConfig& cfg,
                          int map_scale) {
  FocusMap map = accumulate_kernels(points, k, cfg, map_scale);
  if (map.contributing_points == 0) return map;
  auto& values = map.grid.values;
  double z = 0.0;
  if (cfg.normalization == Normalization::peak) {
    z = *std::max_element(values.begin(), values.end());
  } else {
    for (double v : values) z += v;
  }
  if (!(z > 0.0)) {
    std::fill(values.begin(), values.end(), 0.0);
    map.contributing_points = 0;
    return map;
  }
  const double inv_z = 1.0 / z;
  if (cfg.normalization == Normalization::peak) {
    // Divide rather than multiply so the peak lands on exactly 1.
    for (double& v : values) v /= z;
  } else {
    for (double& v : values) v *= inv_z;
  }
  return map;
}

Grid modulate_depth(const Grid& depth, const FocusMap& map, double alpha) {
  if (depth.width != map.width() || depth.height != map.height()) {
    throw ConfigError("depth", fmt::format("depth is {}x{} but the focus map is {}x{}", depth.width,
                                           depth.height, map.width(), map.height()));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "alpha must lie in [0, 1]");
  Grid out(depth.width, depth.height);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const double d = depth.values[i];
    if (!std::isfinite(d) || d < 0.0) throw ConfigError("depth", "depth values must be finite and >= 0");
    out.values[i] = d * (alpha + (1.0 - alpha) * map.grid.values[i]);
  }
  return out;
}

FocusTracker::FocusTracker(Intrinsics k, FocusConfig cfg, bool smooth_positions)
    : k_(k), cfg_(std::move(cfg)), smooth_(smooth_positions) {
  k_.validate();
  cfg_.validate();
}

std::optional<FocusPoint> FocusTracker::push(const CameraPose& pose) {
  if (last_frame_ && pose.frame_index != *last_frame_ + 1) {
    throw StreamDiscontinuityError(pose.frame_index, fmt::format("frame {} follows frame {}",
                                                                 pose.frame_index, *last_frame_));
  }
  last_frame_ = pose.frame_index;

  const Vec3 center = camera_center(pose);
  if (smooth_) {
    raw_centers_.push_back(center);
    if (raw_centers_.size() > 3) raw_centers_.pop_front();
    if (raw_centers_.size() < 3) return std::nullopt;
    centers_.push_back((raw_centers_[0] + raw_centers_[1] + raw_centers_[2]) / 3.0);
  } else {
    centers_.push_back(center);
  }
  if (centers_.size() > 3) centers_.pop_front();
  if (centers_.size() < 3) return std::nullopt;

  MotionSample sample =
      acceleration_camera(acceleration_world(centers_[2], centers_[1], centers_[0], pose.frame_index), pose);
  FocusPoint point = focus_point(sample, k_, cfg_);
  last_sample_ = sample;
  window_.push_back(point);
  while (window_.size() > static_cast<std::size_t>(cfg_.window_frames)) window_.pop_front();
  return point;
}

}  // namespace ego_focus
