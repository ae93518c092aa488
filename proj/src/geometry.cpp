#include "ego_focus/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "ego_focus/errors.hpp"

namespace ego_focus {
namespace {

void require_rotation(const Mat3& r) {
  const double err = orthonormality_error(r);
  if (!(err <= kOrthonormalTolerance) || r.determinant() <= 0.0) {
    throw InvalidPoseError(fmt::format("rotation is not orthonormal (max |R^T R - I| = {:.3g})", err));
  }
}

// atan2 returns [-pi, pi]; the decomposition promises (-pi, pi].
double wrap_half_open(double angle) {
  return angle <= -std::numbers::pi ? std::numbers::pi : angle;
}

}  // namespace

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !std::isfinite(fx)) throw ConfigError("fx", "fx must be a positive focal length");
  if (!(fy > 0.0) || !std::isfinite(fy)) throw ConfigError("fy", "fy must be a positive focal length");
  if (width <= 0) throw ConfigError("width", "width must be positive");
  if (height <= 0) throw ConfigError("height", "height must be positive");
  if (!(cx >= 0.0 && cx < width)) throw ConfigError("cx", "cx must lie in [0, width)");
  if (!(cy >= 0.0 && cy < height)) throw ConfigError("cy", "cy must lie in [0, height)");
}

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

Mat3 sanitize_rotation(const Mat3& r) {
  if (!r.allFinite()) throw InvalidPoseError("rotation has non-finite entries");
  if (r.determinant() <= 0.0) throw InvalidPoseError("rotation has non-positive determinant");
  const double err = orthonormality_error(r);
  if (err <= kOrthonormalTolerance) return r;
  if (err <= kRepairTolerance) return nearest_rotation(r);
  throw InvalidPoseError(fmt::format("rotation drift {:.3g} exceeds repair tolerance {:.3g}", err,
                                     kRepairTolerance));
}

CameraPose make_pose(std::int64_t frame_index, const Mat3& rotation, const Vec3& translation) {
  if (frame_index < 0) throw InvalidPoseError("frame index must be non-negative");
  if (!translation.allFinite()) throw InvalidPoseError("translation has non-finite entries");
  return CameraPose{frame_index, Rigid{sanitize_rotation(rotation), translation}};
}

CameraPose make_pose(std::int64_t frame_index, const Mat4& world_to_camera) {
  const Eigen::RowVector4d last = world_to_camera.row(3);
  if ((last - Eigen::RowVector4d(0.0, 0.0, 0.0, 1.0)).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidPoseError("homogeneous transform last row must be (0, 0, 0, 1)");
  }
  return make_pose(frame_index, world_to_camera.topLeftCorner<3, 3>(),
                   world_to_camera.topRightCorner<3, 1>());
}

Rigid inverse(const Rigid& a) {
  const Mat3 rt = a.rotation.transpose();
  return Rigid{rt, -(rt * a.translation)};
}

Rigid compose(const Rigid& a, const Rigid& b) {
  return Rigid{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

CameraPose invert_pose(const CameraPose& pose) {
  require_rotation(pose.rotation());
  return CameraPose{pose.frame_index, inverse(pose.world_to_camera)};
}

Vec3 camera_center(const CameraPose& pose) {
  require_rotation(pose.rotation());
  return -(pose.rotation().transpose() * pose.translation());
}

Mat3 yaw_rotation(double angle) {
  return Eigen::AngleAxisd(angle, kWorldGravity).toRotationMatrix();
}

GravityYpr decompose_gravity_ypr(const Mat3& q) {
  // With Q = Ry(yaw) Rx(pitch) Rz(roll):
  //   forward Q e_z = (sin(yaw) cos(pitch), -sin(pitch), cos(yaw) cos(pitch))
  //   row 1 of Q    = (cos(pitch) sin(roll), cos(pitch) cos(roll), -sin(pitch))
  const Vec3 forward = q.col(2);
  const double horizontal = std::hypot(forward.x(), forward.z());
  const double pitch = std::atan2(-forward.y(), horizontal);
  if (std::numbers::pi / 2 - std::abs(pitch) < kGimbalTolerance) {
    // roll = 0 gives Q e_x = Ry(yaw) e_x = (cos(yaw), 0, -sin(yaw)).
    const double yaw = wrap_half_open(std::atan2(-q(2, 0), q(0, 0)));
    throw DegenerateOrientationError(yaw, pitch);
  }
  GravityYpr ypr;
  ypr.yaw = wrap_half_open(std::atan2(forward.x(), forward.z()));
  ypr.pitch = pitch;
  ypr.roll = wrap_half_open(std::atan2(q(1, 0), q(1, 1)));
  return ypr;
}

Mat3 compose_gravity_ypr(const GravityYpr& ypr) {
  return (Eigen::AngleAxisd(ypr.yaw, Vec3::UnitY()) * Eigen::AngleAxisd(ypr.pitch, Vec3::UnitX()) *
          Eigen::AngleAxisd(ypr.roll, Vec3::UnitZ()))
      .toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a.transpose() * b;
  // sin from the skew part, cos from the trace; atan2 stays accurate near 0 and pi.
  const Vec3 skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double s = 0.5 * skew.norm();
  const double c = 0.5 * (rel.trace() - 1.0);
  return std::atan2(s, c);
}

std::optional<Vec2> project_pinhole(const Vec3& v, const Intrinsics& k, double eps_z) {
  if (!(v.z() > eps_z)) return std::nullopt;
  return Vec2(k.cx + k.fx * (v.x() / v.z()), k.cy + k.fy * (v.y() / v.z()));
}

}  // namespace ego_focus
