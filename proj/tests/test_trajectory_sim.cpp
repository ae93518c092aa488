#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ego_focus/errors.hpp"
#include "ego_focus/motion_focus.hpp"
#include "ego_focus/trajectory_sim.hpp"

using namespace ego_focus;

namespace {

Intrinsics k640() { return Intrinsics{500.0, 500.0, 320.0, 240.0, 640, 480}; }

ScenarioSpec arc(double omega, std::int64_t frames = 200) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::circular_arc;
  spec.radius = 2.0;
  spec.omega = omega;
  spec.frames = frames;
  return spec;
}

bool same_pose(const CameraPose& a, const CameraPose& b) {
  return a.frame_index == b.frame_index && a.rotation() == b.rotation() && a.translation() == b.translation();
}

}  // namespace

TEST_CASE("constant velocity: closed-form centers, zero acceleration") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::constant_velocity;
  spec.speed = 0.1;
  spec.frames = 100;
  const Trajectory traj = generate_trajectory(spec);
  REQUIRE(traj.poses.size() == 100);
  for (int t = 0; t < 100; ++t) {
    const Vec3 c = camera_center(traj.poses[static_cast<std::size_t>(t)]);
    REQUIRE((c - Vec3(0, 0, 0.1 * t)).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE(traj.truth[static_cast<std::size_t>(t)].acceleration == Vec3::Zero());
    REQUIRE(traj.poses[static_cast<std::size_t>(t)].rotation() == Mat3::Identity());
    REQUIRE_FALSE(oracle_focus_point(traj.truth[static_cast<std::size_t>(t)].acceleration,
                                     traj.poses[static_cast<std::size_t>(t)], k640()));
  }
}

TEST_CASE("circular arc: centers on the circle, centripetal truth") {
  for (double omega : {0.05, -0.05}) {
    const Trajectory traj = generate_trajectory(arc(omega));
    const double dir = omega > 0 ? 1.0 : -1.0;
    const Vec3 center(dir * 2.0, 0, 0);
    for (std::size_t t = 0; t < traj.poses.size(); ++t) {
      const Vec3 c = camera_center(traj.poses[t]);
      REQUIRE(std::abs((c - center).norm() - 2.0) <= 1e-12);
      const Vec3 a = traj.truth[t].acceleration;
      REQUIRE(a.norm() == doctest::Approx(0.005).epsilon(1e-12));
      // Points from the body toward the circle center.
      REQUIRE((center - c).normalized().dot(a.normalized()) == doctest::Approx(1.0).epsilon(1e-12));
      // Heading-locked camera: forward axis along the velocity.
      const Vec3 forward = traj.poses[t].rotation().transpose() * Vec3::UnitZ();
      REQUIRE(forward.dot(traj.truth[t].velocity.normalized()) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("circular arc: discrete acceleration converges to the analytic value") {
  const Trajectory traj = generate_trajectory(arc(0.05, 600));
  const double chord = 2.0 * 2.0 * (1.0 - std::cos(0.05));
  const double analytic = 0.05 * 0.05 * 2.0;
  for (std::size_t t = 2; t < traj.poses.size(); ++t) {
    const MotionSample s = acceleration_world(camera_center(traj.poses[t]), camera_center(traj.poses[t - 1]),
                                              camera_center(traj.poses[t - 2]), static_cast<std::int64_t>(t));
    REQUIRE(s.a_world.norm() == doctest::Approx(chord).epsilon(1e-9));
    // Deviation from the continuous value is O(omega^2), below 1% of omega^2 r.
    REQUIRE((s.a_world - traj.truth[t - 1].acceleration).norm() <= 0.01 * analytic);
  }
}

TEST_CASE("brake: constant deceleration until stop") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::brake;
  spec.speed = 0.2;
  spec.deceleration = 0.01;
  spec.frames = 40;
  const Trajectory traj = generate_trajectory(spec);
  for (std::size_t t = 0; t < 40; ++t) {
    const Vec3 a_heading = traj.poses[t].rotation() * traj.truth[t].acceleration;
    if (t < 20) {
      REQUIRE((a_heading - Vec3(0, 0, -0.01)).cwiseAbs().maxCoeff() <= 1e-15);
    } else {
      REQUIRE(a_heading == Vec3::Zero());
    }
  }
  // Stops at s = v^2 / 2d = 2.
  CHECK(camera_center(traj.poses[39]).z() == doctest::Approx(2.0).epsilon(1e-12));
  // Braking points behind the image plane: never projectable.
  for (std::size_t t = 0; t < 40; ++t) CHECK_FALSE(oracle_focus_point(traj.truth[t].acceleration, traj.poses[t], k640()));
}

TEST_CASE("oracle_focus_point: turn side on arcs and upward on climbs") {
  for (double omega : {-0.05, 0.05}) {
    const Trajectory traj = generate_trajectory(arc(omega, 300));
    for (std::size_t t = 1; t < traj.poses.size(); ++t) {
      // Sampled at the same instant the acceleration is orthogonal to the
      // heading-locked optical axis: a_z = 0, not projectable.
      REQUIRE_FALSE(oracle_focus_point(traj.truth[t].acceleration, traj.poses[t], k640()));
      // The discrete second difference at t is centered on t-1; against
      // the camera at t the acceleration leans forward and lands on the
      // turn side.
      const auto uv = oracle_focus_point(traj.truth[t - 1].acceleration, traj.poses[t], k640());
      REQUIRE(uv);
      if (omega < 0) {
        REQUIRE(uv->x() < 320.0);
      } else {
        REQUIRE(uv->x() > 320.0);
      }
      REQUIRE(uv->y() == doctest::Approx(240.0));
    }
  }

  ScenarioSpec climb;
  climb.kind = ScenarioKind::climb;
  climb.speed = 0.1;
  climb.climb_rate = 0.02;
  climb.climb_accel = 0.002;
  climb.frames = 100;
  const Trajectory traj = generate_trajectory(climb);
  for (std::size_t t = 0; t < traj.poses.size(); ++t) {
    const auto uv = oracle_focus_point(traj.truth[t].acceleration, traj.poses[t], k640());
    // The camera pitches up along the velocity, so upward acceleration has a
    // positive forward component and projects above the principal point.
    REQUIRE(uv);
    REQUIRE(uv->y() < 240.0);
    REQUIRE(uv->x() == doctest::Approx(320.0));
  }
}

TEST_CASE("oracle_focus_point agrees with the streaming path on noise-free arcs") {
  const Trajectory traj = generate_trajectory(arc(0.05, 600));
  FocusTracker tracker(k640(), FocusConfig{});
  int compared = 0;
  for (std::size_t t = 0; t < traj.poses.size(); ++t) {
    const auto fp = tracker.push(traj.poses[t]);
    if (!fp) continue;
    const auto oracle = oracle_focus_point(traj.truth[t - 1].acceleration, traj.poses[t], k640());
    REQUIRE(fp->projectable());
    REQUIRE(oracle);
    REQUIRE((*fp->pixel - *oracle).cwiseAbs().maxCoeff() <= 2.0);
    ++compared;
  }
  CHECK(compared == 598);
}

TEST_CASE("head yaw divergence: gaze swings while the body goes straight") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::head_yaw_divergence;
  spec.speed = 0.1;
  spec.tangential_accel = 0.001;
  spec.head_yaw_amplitude = 0.3;
  spec.head_yaw_period = 60.0;
  spec.frames = 120;
  const Trajectory traj = generate_trajectory(spec);
  for (std::size_t t = 0; t < traj.poses.size(); ++t) {
    const Vec3 c = camera_center(traj.poses[t]);
    REQUIRE(std::abs(c.x()) <= 1e-12);
    const double expected_yaw = 0.3 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 60.0);
    const GravityYpr ypr = decompose_gravity_ypr(traj.poses[t].rotation().transpose());
    REQUIRE(ypr.yaw == doctest::Approx(expected_yaw).epsilon(1e-12));
    // Forward body acceleration seen from a turned head lands opposite the gaze offset.
    const auto uv = oracle_focus_point(traj.truth[t].acceleration, traj.poses[t], k640());
    REQUIRE(uv);
    REQUIRE(uv->x() == doctest::Approx(320.0 - 500.0 * std::tan(expected_yaw)).epsilon(1e-9));
  }
}

TEST_CASE("generators are deterministic and random-access") {
  ScenarioSpec spec = arc(0.05, 300);
  spec.bob_amplitude = 0.02;
  spec.jitter = 0.01;
  spec.seed = 99;
  const Trajectory a = generate_trajectory(spec);
  const Trajectory b = generate_trajectory(spec);
  const TrajectoryGenerator gen(spec);
  for (std::size_t t = 0; t < a.poses.size(); ++t) {
    REQUIRE(same_pose(a.poses[t], b.poses[t]));
    REQUIRE(same_pose(a.poses[t], gen.pose_at(static_cast<std::int64_t>(t))));
  }
  spec.seed = 100;
  const Trajectory c = generate_trajectory(spec);
  CHECK_FALSE(same_pose(a.poses[10], c.poses[10]));

  spec.noise_model = NoiseModel::white;
  const Trajectory w1 = generate_trajectory(spec);
  const Trajectory w2 = generate_trajectory(spec);
  for (std::size_t t = 0; t < w1.poses.size(); ++t) REQUIRE(same_pose(w1.poses[t], w2.poses[t]));
}

TEST_CASE("perturbations: zero noise, constructed batch transform, bounded bob") {
  const Trajectory clean = generate_trajectory(arc(0.05, 600));
  const auto same = add_pose_noise(clean.poses, 0.0, 0.0, 5);
  for (std::size_t t = 0; t < same.size(); ++t) REQUIRE(same_pose(same[t], clean.poses[t]));

  // Two batches, the second disturbed by yaw 0.5 and shift (1,0,0).
  const std::vector<CameraPose> head(clean.poses.begin(), clean.poses.begin() + 115);
  const WindowPlan plan = plan_windows(115, 60, 5);
  std::vector<BatchDisturbance> d(2);
  d[1].yaw = 0.5;
  d[1].translation = Vec3(1, 0, 0);
  const auto batches = split_into_batches(head, plan, d);
  REQUIRE(batches.size() == 2);
  const Mat3 ry = yaw_rotation(0.5);
  for (const CameraPose& p : batches[0]) REQUIRE(same_pose(p, head[static_cast<std::size_t>(p.frame_index)]));
  for (const CameraPose& p : batches[1]) {
    const Vec3 expected = ry * camera_center(head[static_cast<std::size_t>(p.frame_index)]) + Vec3(1, 0, 0);
    REQUIRE((camera_center(p) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }

  for (NoiseModel model : {NoiseModel::smooth, NoiseModel::white}) {
    const auto noisy = add_pose_noise(clean.poses, 0.02, 0.01, 7, model);
    double max_shift = 0.0;
    double max_angle = 0.0;
    for (std::size_t t = 0; t < noisy.size(); ++t) {
      max_shift = std::max(max_shift, (camera_center(noisy[t]) - camera_center(clean.poses[t])).norm());
      max_angle = std::max(max_angle, rotation_angle_between(noisy[t].rotation(), clean.poses[t].rotation()));
    }
    CHECK(max_shift <= 0.02 + 1e-15);
    CHECK(max_shift > 0.01);
    CHECK(max_angle <= 0.01 + 1e-12);
    CHECK(max_angle > 0.005);
  }
}

TEST_CASE("random_batch_disturbances: batch 0 identity, tilt as requested") {
  const auto d = random_batch_disturbances(20, 3, 5.0, 0.1);
  CHECK(d[0].yaw == 0.0);
  CHECK(d[0].translation == Vec3::Zero());
  for (std::size_t k = 1; k < d.size(); ++k) {
    CHECK(std::abs(d[k].pitch) == 0.1);
    CHECK(std::abs(d[k].roll) == 0.1);
    CHECK(d[k].yaw > -std::numbers::pi);
    CHECK(d[k].yaw <= std::numbers::pi);
    CHECK(d[k].translation.cwiseAbs().maxCoeff() <= 5.0);
  }
  const auto again = random_batch_disturbances(20, 3, 5.0, 0.1);
  CHECK(again[7].yaw == d[7].yaw);
}

TEST_CASE("ScenarioSpec validation") {
  ScenarioSpec spec;
  spec.frames = 2;
  CHECK_THROWS_AS(generate_trajectory(spec), ConfigError);
  spec = arc(0.05);
  spec.radius = 0.0;
  try {
    generate_trajectory(spec);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "radius");
  }
  spec = ScenarioSpec{};
  spec.bob_amplitude = -1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK(parse_scenario_kind("arc") == ScenarioKind::circular_arc);
  CHECK(parse_scenario_kind("head_yaw_divergence") == ScenarioKind::head_yaw_divergence);
  CHECK_THROWS_AS(parse_scenario_kind("spiral"), ConfigError);
}
