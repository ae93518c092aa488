#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ego_focus/errors.hpp"
#include "ego_focus/motion_focus.hpp"
#include "ego_focus/pose_io.hpp"
#include "ego_focus/trajectory_sim.hpp"

using namespace ego_focus;

namespace {

constexpr const char* kIdentityLine = R"({"frame":0,"T_wc":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]})";

std::string line_for(int frame, double tz = 0.0) {
  std::ostringstream s;
  s << R"({"frame":)" << frame << R"(,"T_wc":[1,0,0,0, 0,1,0,0, 0,0,1,)" << tz << R"(, 0,0,0,1]})";
  return s.str();
}

}  // namespace

TEST_CASE("parse_pose_record: identity line") {
  const PoseStreamRecord r = parse_pose_record(kIdentityLine, 1);
  CHECK(r.pose.frame_index == 0);
  CHECK(r.pose.rotation() == Mat3::Identity());
  CHECK(r.pose.translation() == Vec3::Zero());
  CHECK_FALSE(r.truth);
  CHECK_FALSE(r.batch);
}

TEST_CASE("parse_pose_record: malformed input names the line") {
  auto expect_line = [](std::string_view text, std::size_t line) {
    try {
      parse_pose_record(text, line);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(std::string(e.what()).find("line " + std::to_string(line)) != std::string::npos);
    }
  };
  expect_line("{not json", 4);
  expect_line(R"({"T_wc":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]})", 5);
  expect_line(R"({"frame":0,"T_wc":[1,0,0,0]})", 6);
  expect_line(R"({"frame":-1,"T_wc":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]})", 7);
  expect_line(R"({"frame":0,"T_wc":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0.5,1]})", 8);
  expect_line(R"({"frame":0,"T_wc":[2,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]})", 9);
}

TEST_CASE("parse_pose_record repairs float32-level rotation drift") {
  const PoseStreamRecord r = parse_pose_record(
      R"({"frame":3,"T_wc":[1.0000001,0,0,0, 0,1,0,0, 0,0,0.9999999,0, 0,0,0,1]})", 1);
  CHECK(orthonormality_error(r.pose.rotation()) <= 1e-12);
}

TEST_CASE("PoseStreamReader: frames must be contiguous") {
  std::istringstream in(line_for(0) + "\n" + line_for(2) + "\n");
  PoseStreamReader reader(in);
  CHECK(reader.next());
  try {
    reader.next();
    FAIL("expected StreamDiscontinuityError");
  } catch (const StreamDiscontinuityError& e) {
    CHECK(e.frame() == 2);
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
}

TEST_CASE("PoseStreamReader: blank lines are skipped, line numbers kept") {
  std::istringstream in(line_for(0) + "\n\n" + line_for(1) + "\n{bad\n");
  PoseStreamReader reader(in);
  CHECK(reader.next());
  CHECK(reader.next());
  try {
    reader.next();
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("PoseStreamReader: batched streams") {
  const auto poses = generate_trajectory([] {
                       ScenarioSpec s;
                       s.kind = ScenarioKind::circular_arc;
                       s.frames = 115;
                       return s;
                     }())
                         .poses;
  const WindowPlan plan = plan_windows(115, 60, 5);
  const auto batches = split_into_batches(poses, plan, random_batch_disturbances(2, 1));
  std::ostringstream out;
  write_pose_stream(out, to_batched_records(batches));

  std::istringstream in(out.str());
  const auto records = load_pose_stream(in);
  REQUIRE(records.size() == 120);
  CHECK(*records[59].batch == 0);
  CHECK(*records[60].batch == 1);
  CHECK(records[60].pose.frame_index == 55);

  // A batch id that skips ahead is rejected.
  std::string text = out.str();
  const auto pos = text.find("\"batch\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 9, "\"batch\":2");
  std::istringstream bad(text);
  CHECK_THROWS(load_pose_stream(bad));
}

TEST_CASE("simulator round trip through JSONL is exact") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::circular_arc;
  spec.frames = 300;
  spec.bob_amplitude = 0.01;
  spec.jitter = 0.01;
  spec.tangential_accel = 1e-4;
  spec.seed = 7;
  const Trajectory traj = generate_trajectory(spec);
  std::ostringstream out;
  write_pose_stream(out, to_records(traj));
  std::istringstream in(out.str());
  const auto back = load_pose_stream(in);
  REQUIRE(back.size() == traj.poses.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < back.size(); ++t) {
    REQUIRE(back[t].pose.frame_index == traj.poses[t].frame_index);
    const Mat4 a = back[t].pose.world_to_camera.matrix();
    const Mat4 b = traj.poses[t].world_to_camera.matrix();
    for (int i = 0; i < 16; ++i) {
      const double scale = std::max(std::abs(b(i)), 1e-300);
      worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
    }
    REQUIRE(back[t].truth);
    REQUIRE(back[t].truth->acceleration == traj.truth[t].acceleration);
    REQUIRE(back[t].truth->position == traj.truth[t].position);
  }
  CHECK(worst <= 1e-15);
}

TEST_CASE("load_pose_stream from a file and from a missing path") {
  const auto dir = std::filesystem::temp_directory_path() / "ego_focus_pose_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "poses.jsonl";
  {
    std::ofstream f(path);
    f << line_for(0) << '\n' << line_for(1, 0.5) << '\n';
  }
  const auto recs = load_pose_stream(path);
  REQUIRE(recs.size() == 2);
  CHECK(camera_center(recs[1].pose) == Vec3(0, 0, -0.5));
  CHECK_THROWS_AS(load_pose_stream(dir / "missing.jsonl"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse_intrinsics: valid file, errors name the key") {
  const Intrinsics k = parse_intrinsics(R"({"fx":500,"fy":500,"cx":320,"cy":240,"width":640,"height":480})");
  CHECK(k.fx == 500.0);
  CHECK(k.cy == 240.0);
  CHECK(k.width == 640);
  CHECK(k.height == 480);

  auto expect_key = [](std::string_view text, const std::string& key) {
    try {
      parse_intrinsics(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
    }
  };
  expect_key(R"({"fx":0,"fy":500,"cx":320,"cy":240,"width":640,"height":480})", "fx");
  expect_key(R"({"fx":500,"cx":320,"cy":240,"width":640,"height":480})", "fy");
  expect_key(R"({"fx":500,"fy":500,"cx":320,"cy":240,"width":640})", "height");
  expect_key(R"({"fx":500,"fy":500,"cx":320,"cy":240,"width":-3,"height":480})", "width");

  const Intrinsics hd = parse_intrinsics(R"({"fx":1000,"fy":1000,"cx":960,"cy":540,"width":1920,"height":1080})");
  CHECK(FocusConfig{}.sigma_for(hd) == doctest::Approx(76.8).epsilon(1e-15));

  CHECK(parse_intrinsics(format_intrinsics(hd)).fx == hd.fx);
}
