#pragma once

// Rigid-transform algebra, camera centers, gravity-referenced yaw/pitch/roll
// and pinhole projection.
//
// Conventions:
//   * Poses are stored world-to-camera: x_cam = R * x_world + t.
//   * Camera frame: +X right, +Y down, +Z forward (optical axis).
//   * World gravity points along +Y, so "up" is -Y and yaw is a rotation
//     about the world Y axis.
//   * Orientations are decomposed as Q = Ry(yaw) * Rx(pitch) * Rz(roll),
//     where Q maps body axes into world axes (e.g. camera-to-world).

#include <cstdint>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ego_focus {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kOrthonormalTolerance = 1e-9;
/// Rotations drifting past kOrthonormalTolerance but within this bound are
/// projected back onto SO(3); anything beyond is rejected.
inline constexpr double kRepairTolerance = 1e-4;
inline constexpr double kDefaultEpsZ = 1e-6;
/// Pitch closer than this to +-pi/2 cannot be split into yaw and roll.
inline constexpr double kGimbalTolerance = 1e-6;

/// World gravity direction. The yaw/pitch/roll split below is written for
/// this axis; changing it means rewriting decompose_gravity_ypr.
inline const Vec3 kWorldGravity = Vec3::UnitY();

/// x -> rotation * x + translation
struct Rigid {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Rigid identity() { return {}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// World-to-camera pose of one frame.
struct CameraPose {
  std::int64_t frame_index = 0;
  Rigid world_to_camera;

  const Mat3& rotation() const { return world_to_camera.rotation; }
  const Vec3& translation() const { return world_to_camera.translation; }
};

struct GravityYpr {
  double yaw = 0.0;    // about world gravity axis, (-pi, pi]
  double pitch = 0.0;  // [-pi/2, pi/2]; positive looks up (towards -Y)
  double roll = 0.0;   // (-pi, pi]
};

/// Pinhole intrinsics in pixels.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  Mat3 matrix() const;
  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// max |R^T R - I|
double orthonormality_error(const Mat3& r);

/// Closest rotation in the Frobenius sense (polar decomposition via SVD).
Mat3 nearest_rotation(const Mat3& m);

/// Returns `r` unchanged when orthonormal within kOrthonormalTolerance,
/// re-orthonormalized when within kRepairTolerance, otherwise throws
/// InvalidPoseError. Reflections (det < 0) are always rejected.
Mat3 sanitize_rotation(const Mat3& r);

/// Builds a validated pose; see sanitize_rotation for the rotation policy.
CameraPose make_pose(std::int64_t frame_index, const Mat3& rotation, const Vec3& translation);

/// Builds a pose from a 4x4 world-to-camera matrix whose last row must be
/// (0, 0, 0, 1) within 1e-9.
CameraPose make_pose(std::int64_t frame_index, const Mat4& world_to_camera);

Rigid inverse(const Rigid& a);

/// (a o b)(x) = a(b(x))
Rigid compose(const Rigid& a, const Rigid& b);

/// Camera-to-world transform of `pose` (same frame index).
CameraPose invert_pose(const CameraPose& pose);

/// Camera center in world coordinates, -R^T t.
Vec3 camera_center(const CameraPose& pose);

/// Rotation by `angle` radians about the world gravity axis.
Mat3 yaw_rotation(double angle);

/// Throws DegenerateOrientationError at the pitch singularity.
GravityYpr decompose_gravity_ypr(const Mat3& rotation);

Mat3 compose_gravity_ypr(const GravityYpr& ypr);

/// Geodesic angle between two rotations, in [0, pi].
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Pixel coordinates of a camera-frame point, or nullopt when v.z <= eps_z.
/// The result may fall outside the image.
std::optional<Vec2> project_pinhole(const Vec3& v, const Intrinsics& k,
                                    double eps_z = kDefaultEpsZ);

}  // namespace ego_focus
