#pragma once

// Synthetic egocentric pose streams with closed-form kinematics, used as
// ground truth by the test and acceptance suites.
//
// World axes: +Y is gravity (down), the body starts at the origin heading
// along +Z, and positive yaw turns towards +X (to the right). The camera is
// heading-locked: its forward axis follows the body velocity (yaw and
// pitch, zero roll), optionally offset by a sinusoidal head yaw.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ego_focus/geometry.hpp"
#include "ego_focus/stitcher.hpp"

namespace ego_focus {

enum class ScenarioKind { constant_velocity, circular_arc, brake, climb, head_yaw_divergence };

/// Parses "constant_velocity"/"cv", "circular_arc"/"arc", "brake", "climb",
/// "head_yaw_divergence"/"head_yaw". Throws ConfigError.
ScenarioKind parse_scenario_kind(const std::string& name);
std::string to_string(ScenarioKind kind);

enum class NoiseModel { smooth, white };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::constant_velocity;
  std::int64_t frames = 300;
  double speed = 0.1;             // units/frame; arcs derive it from radius * |omega|
  double radius = 2.0;            // circular_arc
  double omega = 0.05;            // circular_arc yaw rate, rad/frame; sign = turn direction
  double tangential_accel = 0.0;  // along the heading, circular_arc and head_yaw_divergence
  double deceleration = 0.01;     // brake
  double climb_rate = 0.0;        // initial upward speed (climb)
  double climb_accel = 0.0;       // upward acceleration (climb)
  double head_yaw_amplitude = 0.0;  // rad, any scenario
  double head_yaw_period = 90.0;    // frames
  double bob_amplitude = 0.0;       // camera translation noise bound, units
  double jitter = 0.0;              // camera rotation noise bound, rad
  NoiseModel noise_model = NoiseModel::smooth;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Analytic body kinematics (head noise excluded).
struct TruthKinematics {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

/// Random-access generator; pose_at(t) depends only on (spec, t).
class TrajectoryGenerator {
 public:
  explicit TrajectoryGenerator(ScenarioSpec spec);

  const ScenarioSpec& spec() const { return spec_; }
  TruthKinematics truth_at(std::int64_t t) const;
  CameraPose pose_at(std::int64_t t) const;

 private:
  struct Path {
    double s, s_dot, s_ddot;  // arc length along the horizontal path
    double h, h_dot, h_ddot;  // height above the start (up = -Y)
  };
  Path path_at(double t) const;

  ScenarioSpec spec_;
  double bob_phase_[2] = {0.0, 0.0};
  double jitter_phase_[3] = {0.0, 0.0, 0.0};
};

struct Trajectory {
  std::vector<CameraPose> poses;
  std::vector<TruthKinematics> truth;
};

Trajectory generate_trajectory(const ScenarioSpec& spec);

/// World disturbance D applied to a batch: local coordinates = D(global).
struct BatchDisturbance {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  Vec3 translation = Vec3::Zero();

  Rigid transform() const;
};

/// Independent random disturbances for `count` batches. Batch 0 stays the
/// identity so that its frame remains the reference frame. Yaw is uniform
/// in (-pi, pi], translation uniform in [-max_translation, max_translation]^3,
/// pitch and roll are +-tilt with random signs.
std::vector<BatchDisturbance> random_batch_disturbances(std::size_t count, std::uint64_t seed,
                                                        double max_translation = 5.0, double tilt = 0.0);

/// Cuts `poses` into the planned windows and re-expresses window k in the
/// local world frame given by disturbances[k] (T_local = T o D^-1).
std::vector<std::vector<CameraPose>> split_into_batches(std::span<const CameraPose> poses,
                                                        const WindowPlan& plan,
                                                        std::span<const BatchDisturbance> disturbances);

/// Per-frame head noise: bounded translation (|offset| <= bob_amplitude) and
/// rotation (angle <= jitter). Deterministic given seed.
std::vector<CameraPose> add_pose_noise(std::span<const CameraPose> poses, double bob_amplitude,
                                       double jitter, std::uint64_t seed,
                                       NoiseModel model = NoiseModel::smooth);

/// Rotate-then-project reference for a world acceleration, written against
/// K directly (no shared code with the streaming path). nullopt when the
/// camera-frame z component is <= eps_z.
std::optional<Vec2> oracle_focus_point(const Vec3& a_world, const CameraPose& pose, const Intrinsics& k,
                                       double eps_z = kDefaultEpsZ);

}  // namespace ego_focus
