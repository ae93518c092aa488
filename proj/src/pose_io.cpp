#include "ego_focus/pose_io.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ego_focus/errors.hpp"

namespace ego_focus {
namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw ParseError(line, fmt::format("truth is missing '{}'", key));
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ParseError(line, fmt::format("'{}' must be a 3-vector", key));
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!a[static_cast<std::size_t>(i)].is_number()) {
      throw ParseError(line, fmt::format("'{}' must hold numbers", key));
    }
    v[i] = a[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

PoseStreamRecord parse_pose_record(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_number, "record must be a JSON object");

  const auto frame_it = j.find("frame");
  if (frame_it == j.end() || !frame_it->is_number_integer() || frame_it->get<std::int64_t>() < 0) {
    throw ParseError(line_number, "'frame' must be a non-negative integer");
  }
  const auto t_it = j.find("T_wc");
  if (t_it == j.end() || !t_it->is_array() || t_it->size() != 16) {
    throw ParseError(line_number, "'T_wc' must be an array of 16 numbers");
  }
  Mat4 m;
  for (std::size_t i = 0; i < 16; ++i) {
    const json& v = (*t_it)[i];
    if (!v.is_number()) throw ParseError(line_number, "'T_wc' must hold numbers");
    m(static_cast<Eigen::Index>(i / 4), static_cast<Eigen::Index>(i % 4)) = v.get<double>();
  }

  PoseStreamRecord rec;
  try {
    rec.pose = make_pose(frame_it->get<std::int64_t>(), m);
  } catch (const InvalidPoseError& e) {
    throw ParseError(line_number, e.what());
  }
  if (const auto it = j.find("truth"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError(line_number, "'truth' must be an object");
    rec.truth = TruthKinematics{parse_vec3(*it, "position", line_number), parse_vec3(*it, "velocity", line_number),
                                parse_vec3(*it, "acceleration", line_number)};
  }
  if (const auto it = j.find("batch"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw ParseError(line_number, "'batch' must be a non-negative integer");
    }
    rec.batch = it->get<std::int64_t>();
  }
  return rec;
}

std::string format_pose_record(const PoseStreamRecord& record) {
  json j;
  j["frame"] = record.pose.frame_index;
  const Mat4 m = record.pose.world_to_camera.matrix();
  json t = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) t.push_back(m(r, c));
  }
  j["T_wc"] = std::move(t);
  if (record.batch) j["batch"] = *record.batch;
  if (record.truth) {
    j["truth"] = {{"position", vec3_json(record.truth->position)},
                  {"velocity", vec3_json(record.truth->velocity)},
                  {"acceleration", vec3_json(record.truth->acceleration)}};
  }
  return j.dump();
}

PoseStreamReader::PoseStreamReader(std::istream& in) : in_(&in) {}

PoseStreamReader::PoseStreamReader(const std::filesystem::path& path) {
  if (path == "-") {
    in_ = &std::cin;
    return;
  }
  auto file = std::make_unique<std::ifstream>(path);
  if (!*file) throw IoError(fmt::format("cannot open pose stream '{}'", path.string()));
  in_ = file.get();
  owned_ = std::move(file);
}

PoseStreamReader::~PoseStreamReader() = default;

std::optional<PoseStreamRecord> PoseStreamReader::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PoseStreamRecord rec = parse_pose_record(line, line_);
    if (last_) {
      if (last_->batch.has_value() != rec.batch.has_value()) {
        throw ParseError(line_, "records mix batched and unbatched form");
      }
      const std::int64_t frame = rec.pose.frame_index;
      const bool same_batch = !rec.batch || *rec.batch == *last_->batch;
      if (!same_batch) {
        if (*rec.batch != *last_->batch + 1) {
          throw StreamDiscontinuityError(
              frame, fmt::format("line {}: batch {} follows batch {}", line_, *rec.batch, *last_->batch));
        }
      } else if (frame != last_->pose.frame_index + 1) {
        throw StreamDiscontinuityError(frame, fmt::format("line {}: frame {} follows frame {}", line_, frame,
                                                          last_->pose.frame_index));
      }
    }
    last_ = rec;
    return rec;
  }
  if (in_->bad()) throw IoError("read error in pose stream");
  return std::nullopt;
}

std::vector<PoseStreamRecord> load_pose_stream(std::istream& in) {
  PoseStreamReader reader(in);
  std::vector<PoseStreamRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

std::vector<PoseStreamRecord> load_pose_stream(const std::filesystem::path& path) {
  PoseStreamReader reader(path);
  std::vector<PoseStreamRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

void write_pose_stream(std::ostream& out, std::span<const PoseStreamRecord> records) {
  for (const PoseStreamRecord& r : records) out << format_pose_record(r) << '\n';
  if (!out) throw IoError("failed writing pose stream");
}

std::vector<PoseStreamRecord> to_records(const Trajectory& trajectory) {
  std::vector<PoseStreamRecord> out;
  out.reserve(trajectory.poses.size());
  for (std::size_t i = 0; i < trajectory.poses.size(); ++i) {
    PoseStreamRecord r;
    r.pose = trajectory.poses[i];
    if (i < trajectory.truth.size()) r.truth = trajectory.truth[i];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PoseStreamRecord> to_batched_records(std::span<const std::vector<CameraPose>> batches) {
  std::vector<PoseStreamRecord> out;
  for (std::size_t k = 0; k < batches.size(); ++k) {
    for (const CameraPose& p : batches[k]) {
      out.push_back(PoseStreamRecord{p, std::nullopt, static_cast<std::int64_t>(k)});
    }
  }
  return out;
}

Intrinsics parse_intrinsics(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("intrinsics", std::string("malformed intrinsics JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("intrinsics", "intrinsics must be a JSON object");
  auto number = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(key, fmt::format("intrinsics missing key '{}'", key));
    if (!it->is_number()) throw ConfigError(key, fmt::format("intrinsics key '{}' must be a number", key));
    return it->get<double>();
  };
  auto integer = [&](const char* key) {
    const double v = number(key);
    if (v != static_cast<double>(static_cast<int>(v))) {
      throw ConfigError(key, fmt::format("intrinsics key '{}' must be an integer", key));
    }
    return static_cast<int>(v);
  };
  Intrinsics k;
  k.fx = number("fx");
  k.fy = number("fy");
  k.cx = number("cx");
  k.cy = number("cy");
  k.width = integer("width");
  k.height = integer("height");
  k.validate();
  return k;
}

Intrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open intrinsics '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_intrinsics(ss.str());
}

std::string format_intrinsics(const Intrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}}
      .dump();
}

}  // namespace ego_focus
