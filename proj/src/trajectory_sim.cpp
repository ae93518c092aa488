#include "ego_focus/trajectory_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ego_focus/errors.hpp"

namespace ego_focus {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform in [0, 1) with 53 random bits; identical on every platform.
double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

double uniform(std::uint64_t& state, double lo, double hi) { return lo + (hi - lo) * uniform01(state); }

Vec3 uniform_in_ball(std::uint64_t& state) {
  for (;;) {
    const Vec3 v(uniform(state, -1.0, 1.0), uniform(state, -1.0, 1.0), uniform(state, -1.0, 1.0));
    if (v.squaredNorm() <= 1.0) return v;
  }
}

Mat3 exp_so3(const Vec3& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

// Head noise as a function of the frame index only.
class NoiseField {
 public:
  NoiseField(double bob, double jitter, std::uint64_t seed, NoiseModel model)
      : bob_(bob), jitter_(jitter), seed_(seed), model_(model) {
    std::uint64_t state = seed ^ 0x6A09E667F3BCC909ull;
    for (double& p : phase_) p = uniform(state, 0.0, kTwoPi);
  }

  bool active() const { return bob_ > 0.0 || jitter_ > 0.0; }

  // Translation offset in world coordinates, |offset| <= bob.
  Vec3 offset(std::int64_t t, double yaw) const {
    if (bob_ == 0.0) return Vec3::Zero();
    if (model_ == NoiseModel::white) {
      std::uint64_t state = frame_state(t, 1);
      return bob_ * uniform_in_ball(state);
    }
    // Lateral sway at half the step frequency, vertical bob at the step
    // frequency; weights 0.6^2 + 0.8^2 = 1 keep the norm within bob.
    const double ft = static_cast<double>(t);
    const Vec3 right(std::cos(yaw), 0.0, -std::sin(yaw));
    const double lateral = 0.6 * std::sin(kTwoPi * ft / 30.0 + phase_[0]);
    const double vertical = 0.8 * std::sin(kTwoPi * ft / 15.0 + phase_[1]);
    return bob_ * (lateral * right + vertical * Vec3(0.0, -1.0, 0.0));
  }

  // Body-frame rotation perturbation with angle <= jitter.
  Mat3 rotation(std::int64_t t) const {
    if (jitter_ == 0.0) return Mat3::Identity();
    if (model_ == NoiseModel::white) {
      std::uint64_t state = frame_state(t, 2);
      return exp_so3(jitter_ * uniform_in_ball(state));
    }
    const double ft = static_cast<double>(t);
    const Vec3 w(0.6 * std::sin(kTwoPi * ft / 23.0 + phase_[2]), 0.64 * std::sin(kTwoPi * ft / 37.0 + phase_[3]),
                 0.48 * std::sin(kTwoPi * ft / 51.0 + phase_[4]));
    return exp_so3(jitter_ * w);
  }

 private:
  std::uint64_t frame_state(std::int64_t t, std::uint64_t stream) const {
    std::uint64_t state = seed_ ^ (static_cast<std::uint64_t>(t) * 0xD1B54A32D192ED03ull) ^ (stream << 56);
    splitmix64(state);
    return state;
  }

  double bob_;
  double jitter_;
  std::uint64_t seed_;
  NoiseModel model_;
  double phase_[5] = {};
};

CameraPose apply_noise(const CameraPose& pose, const NoiseField& noise) {
  const Mat3 r_cw = pose.rotation().transpose();
  const double yaw = std::atan2(r_cw(0, 2), r_cw(2, 2));
  const Vec3 center = camera_center(pose) + noise.offset(pose.frame_index, yaw);
  const Mat3 r_wc = (r_cw * noise.rotation(pose.frame_index)).transpose();
  return make_pose(pose.frame_index, r_wc, -(r_wc * center));
}

}  // namespace

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "constant_velocity" || name == "cv") return ScenarioKind::constant_velocity;
  if (name == "circular_arc" || name == "arc") return ScenarioKind::circular_arc;
  if (name == "brake") return ScenarioKind::brake;
  if (name == "climb") return ScenarioKind::climb;
  if (name == "head_yaw_divergence" || name == "head_yaw") return ScenarioKind::head_yaw_divergence;
  throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::constant_velocity: return "constant_velocity";
    case ScenarioKind::circular_arc: return "circular_arc";
    case ScenarioKind::brake: return "brake";
    case ScenarioKind::climb: return "climb";
    case ScenarioKind::head_yaw_divergence: return "head_yaw_divergence";
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  if (frames < 3) throw ConfigError("frames", "a scenario needs at least 3 frames");
  if (!(speed >= 0.0)) throw ConfigError("speed", "speed must be non-negative");
  if (kind == ScenarioKind::circular_arc) {
    if (!(radius > 0.0)) throw ConfigError("radius", "arc radius must be positive");
    if (omega == 0.0 || !std::isfinite(omega)) throw ConfigError("omega", "arc yaw rate must be non-zero");
  }
  if (kind == ScenarioKind::brake && !(deceleration > 0.0)) {
    throw ConfigError("deceleration", "brake deceleration must be positive");
  }
  if (!(head_yaw_period > 0.0)) throw ConfigError("head_yaw_period", "head yaw period must be positive");
  if (!(head_yaw_amplitude >= 0.0)) throw ConfigError("head_yaw_amplitude", "amplitude must be non-negative");
  if (!(bob_amplitude >= 0.0)) throw ConfigError("bob_amplitude", "noise amplitude must be non-negative");
  if (!(jitter >= 0.0)) throw ConfigError("jitter", "noise amplitude must be non-negative");
}

TrajectoryGenerator::TrajectoryGenerator(ScenarioSpec spec) : spec_(spec) { spec_.validate(); }

TrajectoryGenerator::Path TrajectoryGenerator::path_at(double t) const {
  Path p{};
  switch (spec_.kind) {
    case ScenarioKind::constant_velocity:
      p.s = spec_.speed * t;
      p.s_dot = spec_.speed;
      break;
    case ScenarioKind::circular_arc: {
      const double v0 = spec_.radius * std::abs(spec_.omega);
      p.s = v0 * t + 0.5 * spec_.tangential_accel * t * t;
      p.s_dot = v0 + spec_.tangential_accel * t;
      p.s_ddot = spec_.tangential_accel;
      break;
    }
    case ScenarioKind::head_yaw_divergence:
      p.s = spec_.speed * t + 0.5 * spec_.tangential_accel * t * t;
      p.s_dot = spec_.speed + spec_.tangential_accel * t;
      p.s_ddot = spec_.tangential_accel;
      break;
    case ScenarioKind::brake: {
      const double t_stop = spec_.speed / spec_.deceleration;
      const double tc = std::min(t, t_stop);
      p.s = spec_.speed * tc - 0.5 * spec_.deceleration * tc * tc;
      p.s_dot = t < t_stop ? spec_.speed - spec_.deceleration * t : 0.0;
      p.s_ddot = t < t_stop ? -spec_.deceleration : 0.0;
      break;
    }
    case ScenarioKind::climb:
      p.s = spec_.speed * t;
      p.s_dot = spec_.speed;
      p.h = spec_.climb_rate * t + 0.5 * spec_.climb_accel * t * t;
      p.h_dot = spec_.climb_rate + spec_.climb_accel * t;
      p.h_ddot = spec_.climb_accel;
      break;
  }
  return p;
}

TruthKinematics TrajectoryGenerator::truth_at(std::int64_t frame) const {
  const Path p = path_at(static_cast<double>(frame));
  TruthKinematics k;
  const Vec3 up(0.0, -1.0, 0.0);
  if (spec_.kind == ScenarioKind::circular_arc) {
    const double r = spec_.radius;
    const double dir = spec_.omega > 0.0 ? 1.0 : -1.0;
    const double heading = dir * p.s / r;
    const Vec3 forward(std::sin(heading), 0.0, std::cos(heading));
    const Vec3 right(std::cos(heading), 0.0, -std::sin(heading));
    k.position = Vec3(dir * r * (1.0 - std::cos(p.s / r)), 0.0, r * std::sin(p.s / r));
    k.velocity = p.s_dot * forward;
    k.acceleration = p.s_ddot * forward + dir * (p.s_dot * p.s_dot / r) * right;
  } else {
    const Vec3 forward = Vec3::UnitZ();
    k.position = p.s * forward + p.h * up;
    k.velocity = p.s_dot * forward + p.h_dot * up;
    k.acceleration = p.s_ddot * forward + p.h_ddot * up;
  }
  return k;
}

CameraPose TrajectoryGenerator::pose_at(std::int64_t frame) const {
  const double t = static_cast<double>(frame);
  const Path p = path_at(t);
  const TruthKinematics k = truth_at(frame);

  double yaw = 0.0;
  if (spec_.kind == ScenarioKind::circular_arc) yaw = (spec_.omega > 0.0 ? 1.0 : -1.0) * p.s / spec_.radius;
  yaw += spec_.head_yaw_amplitude * std::sin(kTwoPi * t / spec_.head_yaw_period);
  const double pitch = (p.s_dot == 0.0 && p.h_dot == 0.0) ? 0.0 : std::atan2(p.h_dot, p.s_dot);

  const Mat3 r_cw = compose_gravity_ypr({yaw, pitch, 0.0});
  const Mat3 r_wc = r_cw.transpose();
  CameraPose pose = make_pose(frame, r_wc, -(r_wc * k.position));

  const NoiseField noise(spec_.bob_amplitude, spec_.jitter, spec_.seed, spec_.noise_model);
  return noise.active() ? apply_noise(pose, noise) : pose;
}

Trajectory generate_trajectory(const ScenarioSpec& spec) {
  const TrajectoryGenerator gen(spec);
  Trajectory out;
  out.poses.reserve(static_cast<std::size_t>(spec.frames));
  out.truth.reserve(static_cast<std::size_t>(spec.frames));
  for (std::int64_t t = 0; t < spec.frames; ++t) {
    out.poses.push_back(gen.pose_at(t));
    out.truth.push_back(gen.truth_at(t));
  }
  return out;
}

Rigid BatchDisturbance::transform() const {
  return Rigid{compose_gravity_ypr({yaw, pitch, roll}), translation};
}

std::vector<BatchDisturbance> random_batch_disturbances(std::size_t count, std::uint64_t seed,
                                                        double max_translation, double tilt) {
  std::uint64_t state = seed ^ 0xBB67AE8584CAA73Bull;
  std::vector<BatchDisturbance> out(count);
  for (std::size_t k = 1; k < count; ++k) {
    BatchDisturbance& d = out[k];
    d.yaw = uniform(state, -std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < 3; ++i) d.translation[i] = uniform(state, -max_translation, max_translation);
    d.pitch = uniform01(state) < 0.5 ? -tilt : tilt;
    d.roll = uniform01(state) < 0.5 ? -tilt : tilt;
  }
  return out;
}

std::vector<std::vector<CameraPose>> split_into_batches(std::span<const CameraPose> poses,
                                                        const WindowPlan& plan,
                                                        std::span<const BatchDisturbance> disturbances) {
  std::vector<std::vector<CameraPose>> batches;
  if (poses.empty()) return batches;
  const WindowPlan full(plan.window_size(), plan.overlap(), static_cast<std::int64_t>(poses.size()),
                        poses.front().frame_index);
  const std::size_t n = full.window_count();
  if (disturbances.size() < n) {
    throw ConfigError("disturbances", fmt::format("{} windows but {} disturbances", n, disturbances.size()));
  }
  batches.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const WindowSpan span = full.window(k);
    const Rigid d_inv = inverse(disturbances[k].transform());
    std::vector<CameraPose> batch;
    batch.reserve(static_cast<std::size_t>(span.size()));
    for (std::int64_t f = span.begin; f < span.end; ++f) {
      const CameraPose& pose = poses[static_cast<std::size_t>(f - full.first_frame())];
      batch.push_back(CameraPose{pose.frame_index, compose(pose.world_to_camera, d_inv)});
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<CameraPose> add_pose_noise(std::span<const CameraPose> poses, double bob_amplitude, double jitter,
                                       std::uint64_t seed, NoiseModel model) {
  if (!(bob_amplitude >= 0.0)) throw ConfigError("bob_amplitude", "noise amplitude must be non-negative");
  if (!(jitter >= 0.0)) throw ConfigError("jitter", "noise amplitude must be non-negative");
  const NoiseField noise(bob_amplitude, jitter, seed, model);
  std::vector<CameraPose> out(poses.begin(), poses.end());
  if (!noise.active()) return out;
  for (CameraPose& p : out) p = apply_noise(p, noise);
  return out;
}

std::optional<Vec2> oracle_focus_point(const Vec3& a_world, const CameraPose& pose, const Intrinsics& k,
                                       double eps_z) {
  const Vec3 a_cam = pose.rotation() * a_world;
  if (!(a_cam.z() > eps_z)) return std::nullopt;
  const Vec3 h = k.matrix() * a_cam;
  return Vec2(h.x() / h.z(), h.y() / h.z());
}

}  // namespace ego_focus
