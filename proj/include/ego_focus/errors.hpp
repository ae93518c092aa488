#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ego_focus {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotation is not a proper rotation, or a homogeneous matrix is malformed.
class InvalidPoseError : public Error {
 public:
  using Error::Error;
};

/// Orientation sits at the pitch singularity; yaw is reported under the
/// roll = 0 convention.
class DegenerateOrientationError : public Error {
 public:
  DegenerateOrientationError(double yaw, double pitch)
      : Error("degenerate orientation: pitch at +-pi/2"), yaw_(yaw), pitch_(pitch) {}

  double yaw() const noexcept { return yaw_; }
  double pitch() const noexcept { return pitch_; }

 private:
  double yaw_;
  double pitch_;
};

class InvalidPlanError : public Error {
 public:
  using Error::Error;
};

/// Frames are missing, repeated, or out of order.
class StreamDiscontinuityError : public Error {
 public:
  StreamDiscontinuityError(std::int64_t frame, const std::string& what)
      : Error(what), frame_(frame) {}

  std::int64_t frame() const noexcept { return frame_; }

 private:
  std::int64_t frame_;
};

/// Invalid configuration value; `key()` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Malformed input line in a text stream.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ego_focus
