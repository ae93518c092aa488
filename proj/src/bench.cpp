#include "ego_focus/bench.hpp"

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "ego_focus/errors.hpp"
#include "ego_focus/motion_focus.hpp"
#include "ego_focus/pipeline.hpp"
#include "ego_focus/stitcher.hpp"
#include "ego_focus/trajectory_sim.hpp"

namespace ego_focus {
namespace {

using Clock = std::chrono::steady_clock;

Intrinsics bench_intrinsics(Resolution r) {
  Intrinsics k;
  k.width = r.width;
  k.height = r.height;
  k.fx = k.fy = 0.9 * r.width;
  k.cx = 0.5 * r.width;
  k.cy = 0.5 * r.height;
  return k;
}

ScenarioSpec bench_scenario(std::int64_t frames, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::circular_arc;
  spec.frames = std::max<std::int64_t>(frames, 3);
  spec.radius = 2.0;
  spec.omega = 0.05;
  spec.bob_amplitude = 0.01;
  spec.jitter = 0.005;
  spec.seed = seed;
  return spec;
}

BatchDisturbance window_disturbance(std::size_t k, std::uint64_t seed) {
  if (k == 0) return {};
  return random_batch_disturbances(2, seed ^ (0x9E3779B97F4A7C15ull * (k + 1)))[1];
}

}  // namespace

Resolution parse_resolution(const std::string& text) {
  int w = 0;
  int h = 0;
  char sep = 0;
  if (std::sscanf(text.c_str(), "%d%c%d", &w, &sep, &h) != 3 || (sep != 'x' && sep != 'X') || w <= 0 || h <= 0) {
    throw ConfigError("resolution", fmt::format("bad resolution '{}', expected WIDTHxHEIGHT", text));
  }
  return {w, h};
}

PoseSource synthetic_batched_source(std::int64_t frames, std::uint64_t seed, int window_size, int overlap) {
  struct State {
    TrajectoryGenerator gen;
    WindowPlan plan;
    std::uint64_t seed;
    std::size_t window = 0;
    std::int64_t next = 0;
    Rigid inverse_disturbance;
  };
  auto st = std::make_shared<State>(State{TrajectoryGenerator(bench_scenario(frames, seed)),
                                          WindowPlan(window_size, overlap, frames), seed, 0, 0, Rigid::identity()});
  return [st]() -> std::optional<PoseStreamRecord> {
    WindowSpan span = st->plan.window(st->window);
    if (st->next >= span.end) {
      if (span.end >= *st->plan.total_frames()) return std::nullopt;
      ++st->window;
      span = st->plan.window(st->window);
      st->next = span.begin;
      st->inverse_disturbance = inverse(window_disturbance(st->window, st->seed).transform());
    }
    const CameraPose truth = st->gen.pose_at(st->next++);
    PoseStreamRecord rec;
    rec.pose = CameraPose{truth.frame_index, compose(truth.world_to_camera, st->inverse_disturbance)};
    rec.batch = static_cast<std::int64_t>(st->window);
    return rec;
  };
}

double bench_pose_math(std::int64_t count, std::uint64_t seed) {
  const Trajectory traj = generate_trajectory(bench_scenario(count, seed));
  const WindowPlan plan = plan_windows(count, kDefaultWindowSize, kDefaultOverlap);
  const auto disturbances = random_batch_disturbances(plan.window_count(), seed);
  const auto batches = split_into_batches(traj.poses, plan, disturbances);
  const Intrinsics k = bench_intrinsics({1920, 1080});

  const auto t0 = Clock::now();
  StitchState state;
  FocusTracker tracker(k, FocusConfig{});
  std::int64_t projected = 0;
  for (const auto& batch : batches) {
    for (const CameraPose& pose : stitch_step(state, batch, plan)) {
      const auto point = tracker.push(pose);
      if (point && point->projectable()) ++projected;
    }
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (projected < 0) std::abort();  // keeps the loop observable
  return static_cast<double>(state.frames_emitted) / seconds;
}

double bench_render(Resolution resolution, int maps, int focus_window) {
  const Intrinsics k = bench_intrinsics(resolution);
  FocusConfig cfg;
  cfg.window_frames = focus_window;

  // A plausible trailing window: points scattered around the image center
  // with magnitudes within +-25% of each other.
  std::vector<FocusPoint> points(static_cast<std::size_t>(focus_window));
  for (int i = 0; i < focus_window; ++i) {
    FocusPoint& p = points[static_cast<std::size_t>(i)];
    p.frame_index = i;
    const double phase = 0.7 * i;
    p.pixel = Vec2(k.cx + 0.2 * k.width * std::sin(phase), k.cy + 0.15 * k.height * std::cos(1.3 * phase));
    p.magnitude = 1.0 + 0.25 * std::sin(2.1 * i);
    p.a_camera = Vec3(0.0, 0.0, p.magnitude);
  }

  double checksum = 0.0;
  const auto t0 = Clock::now();
  for (int m = 0; m < maps; ++m) {
    points[static_cast<std::size_t>(m % focus_window)].magnitude *= 1.0 + 1e-3;
    const FocusMap map = render_focus_map(points, k, cfg);
    checksum += map.grid.values[map.grid.values.size() / 2];
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (std::isnan(checksum)) std::abort();
  return maps / seconds;
}

std::size_t measure_stream_peak_memory(std::int64_t frames, std::uint64_t seed) {
  const pid_t pid = fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    int code = 0;
    try {
      RunConfig cfg;
      cfg.render = false;
      const RunSummary s = run_stream(synthetic_batched_source(frames, seed), bench_intrinsics({1920, 1080}), cfg);
      if (s.frames_processed != frames) code = 2;
    } catch (...) {
      code = 1;
    }
    _exit(code);
  }
  int status = 0;
  rusage usage{};
  if (wait4(pid, &status, 0, &usage) != pid) throw Error("wait4 failed");
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(fmt::format("memory benchmark child failed (status {})", status));
  }
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  rows.push_back({"pose_math", "-", bench_pose_math(cfg.pose_count, cfg.seed), peak_rss_bytes()});
  for (const Resolution& r : cfg.resolutions) {
    rows.push_back({"render", fmt::format("{}x{}", r.width, r.height),
                    bench_render(r, cfg.maps_per_resolution, cfg.focus_window), peak_rss_bytes()});
  }
  for (std::int64_t n : cfg.memory_stream_lengths) {
    const auto t0 = Clock::now();
    const std::size_t mem = measure_stream_peak_memory(n, cfg.seed);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    rows.push_back({fmt::format("stream_{}", n), "-", static_cast<double>(n) / seconds, mem});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "stage,resolution,throughput,peak_mem_bytes\n";
  for (const BenchRow& r : rows) {
    out += fmt::format("{},{},{:.2f},{}\n", r.stage, r.resolution, r.throughput, r.peak_mem_bytes);
  }
  return out;
}

}  // namespace ego_focus
