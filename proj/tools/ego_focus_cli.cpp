// ego-focus: motion-focus maps from camera pose streams.
//
//   ego-focus sim   --scenario arc --radius 2 --omega 0.05 --frames 600 --seed 7 --out poses.jsonl
//   ego-focus run   --poses poses.jsonl --intrinsics cam.json --out-dir out/
//   ego-focus bench --sizes 1920x1080,960x544

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ego_focus/bench.hpp"
#include "ego_focus/errors.hpp"
#include "ego_focus/pipeline.hpp"
#include "ego_focus/pose_io.hpp"
#include "ego_focus/trajectory_sim.hpp"

using namespace ego_focus;

namespace {

struct SimOptions {
  std::string scenario = "cv";
  ScenarioSpec spec;
  std::string out = "-";
  bool batched = false;
  int window_size = kDefaultWindowSize;
  int overlap = kDefaultOverlap;
  double disturb_translation = 5.0;
  double disturb_tilt = 0.0;
  bool white_noise = false;
};

struct RunOptions {
  std::string poses;
  std::string intrinsics;
  RunConfig cfg;
  std::optional<double> sigma_px;
  std::string normalize = "peak";
  std::string project_negative = "skip";
  std::string anchor = "last";
  std::string out_dir;
  std::string residuals;
  std::string depth_dir;
  std::uint64_t seed = 0;  // accepted for symmetry with sim; the run itself is deterministic
};

struct BenchOptions {
  BenchConfig cfg;
  std::vector<std::string> sizes;
  std::string out = "-";
  bool skip_memory = false;
};

int do_sim(const SimOptions& o) {
  ScenarioSpec spec = o.spec;
  spec.kind = parse_scenario_kind(o.scenario);
  spec.noise_model = o.white_noise ? NoiseModel::white : NoiseModel::smooth;
  const Trajectory traj = generate_trajectory(spec);

  std::vector<PoseStreamRecord> records;
  if (o.batched) {
    const WindowPlan plan = plan_windows(spec.frames, o.window_size, o.overlap);
    const auto disturbances =
        random_batch_disturbances(plan.window_count(), spec.seed, o.disturb_translation, o.disturb_tilt);
    records = to_batched_records(split_into_batches(traj.poses, plan, disturbances));
  } else {
    records = to_records(traj);
  }

  if (o.out == "-") {
    write_pose_stream(std::cout, records);
  } else {
    std::ofstream out(o.out);
    if (!out) throw IoError("cannot open '" + o.out + "' for writing");
    write_pose_stream(out, records);
  }
  return 0;
}

int do_run(RunOptions o) {
  RunConfig& cfg = o.cfg;
  cfg.focus.sigma_px = o.sigma_px;
  cfg.focus.normalization = o.normalize == "sum" ? Normalization::sum : Normalization::peak;
  cfg.focus.project_negative =
      o.project_negative == "mirror" ? NegativeDepthPolicy::mirror : NegativeDepthPolicy::skip;
  cfg.stitch.anchor = o.anchor == "first" ? AnchorChoice::first_shared : AnchorChoice::last_shared;
  cfg.out_dir = o.out_dir;
  if (!o.residuals.empty()) cfg.residuals_path = o.residuals;
  if (!o.depth_dir.empty()) cfg.depth_dir = o.depth_dir;
  cfg.threads = threads_from_env();

  const Intrinsics k = load_intrinsics(o.intrinsics);
  PoseStreamReader reader{std::filesystem::path(o.poses)};
  const RunSummary summary = run_stream([&] { return reader.next(); }, k, cfg);
  std::cerr << format_summary(summary);
  return 0;
}

int do_bench(BenchOptions o) {
  if (!o.sizes.empty()) {
    o.cfg.resolutions.clear();
    for (const std::string& s : o.sizes) o.cfg.resolutions.push_back(parse_resolution(s));
  }
  if (o.skip_memory) o.cfg.memory_stream_lengths.clear();
  const std::string csv = bench_csv(run_bench(o.cfg));
  if (o.out == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(o.out);
    if (!out) throw IoError("cannot open '" + o.out + "' for writing");
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-focus maps from egocentric camera pose streams"};
  app.require_subcommand(1);

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("sim", "Generate a synthetic pose stream with ground truth");
  sim_cmd->add_option("--scenario", sim.scenario, "cv|arc|brake|climb|head_yaw")->capture_default_str();
  sim_cmd->add_option("--frames", sim.spec.frames, "Number of frames")->capture_default_str();
  sim_cmd->add_option("--speed", sim.spec.speed, "Speed, units/frame")->capture_default_str();
  sim_cmd->add_option("--radius", sim.spec.radius, "Arc radius")->capture_default_str();
  sim_cmd->add_option("--omega", sim.spec.omega, "Arc yaw rate, rad/frame (sign = turn direction)")
      ->capture_default_str();
  sim_cmd->add_option("--accel", sim.spec.tangential_accel, "Tangential acceleration, units/frame^2")
      ->capture_default_str();
  sim_cmd->add_option("--decel", sim.spec.deceleration, "Brake deceleration, units/frame^2")->capture_default_str();
  sim_cmd->add_option("--climb-rate", sim.spec.climb_rate, "Initial climb speed")->capture_default_str();
  sim_cmd->add_option("--climb-accel", sim.spec.climb_accel, "Upward acceleration")->capture_default_str();
  sim_cmd->add_option("--head-yaw-amp", sim.spec.head_yaw_amplitude, "Head yaw amplitude, rad")
      ->capture_default_str();
  sim_cmd->add_option("--head-yaw-period", sim.spec.head_yaw_period, "Head yaw period, frames")
      ->capture_default_str();
  sim_cmd->add_option("--bob", sim.spec.bob_amplitude, "Head-bob translation bound")->capture_default_str();
  sim_cmd->add_option("--jitter", sim.spec.jitter, "Rotation jitter bound, rad")->capture_default_str();
  sim_cmd->add_flag("--white-noise", sim.white_noise, "White instead of smooth head noise");
  sim_cmd->add_option("--seed", sim.spec.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output JSONL path, - for stdout")->capture_default_str();
  sim_cmd->add_flag("--batched", sim.batched, "Emit windowed batches, each in a disturbed local frame");
  sim_cmd->add_option("--window-size", sim.window_size, "Window length L (batched)")->capture_default_str();
  sim_cmd->add_option("--overlap", sim.overlap, "Window overlap O (batched)")->capture_default_str();
  sim_cmd->add_option("--disturb-trans", sim.disturb_translation, "Per-batch translation bound")
      ->capture_default_str();
  sim_cmd->add_option("--disturb-tilt", sim.disturb_tilt, "Per-batch pitch/roll magnitude, rad")
      ->capture_default_str();

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Stitch a pose stream and render motion-focus maps");
  run_cmd->add_option("--poses", run.poses, "Pose stream (JSONL), - for stdin")->required();
  run_cmd->add_option("--intrinsics", run.intrinsics, "Intrinsics JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out-dir", run.out_dir, "Directory for per-frame outputs");
  run_cmd->add_option("--window-size", run.cfg.window_size, "Window length L")->capture_default_str();
  run_cmd->add_option("--overlap", run.cfg.overlap, "Window overlap O")->capture_default_str();
  run_cmd->add_option("--anchor", run.anchor, "Anchor frame within the overlap")
      ->check(CLI::IsMember({"first", "last"}))
      ->capture_default_str();
  run_cmd->add_flag("--stitch-scale", run.cfg.stitch.scale_correction, "Per-boundary scale correction");
  run_cmd->add_option("--focus-n", run.cfg.focus.window_frames, "Trailing focus window N")->capture_default_str();
  run_cmd->add_option("--sigma-px", run.sigma_px, "Kernel sigma in pixels (default 0.04 * width)");
  run_cmd->add_option("--eps-z", run.cfg.focus.eps_z, "Projectability threshold")->capture_default_str();
  run_cmd->add_option("--normalize", run.normalize, "peak|sum")
      ->check(CLI::IsMember({"peak", "sum"}))
      ->capture_default_str();
  run_cmd->add_option("--project-negative", run.project_negative, "skip|mirror")
      ->check(CLI::IsMember({"skip", "mirror"}))
      ->capture_default_str();
  run_cmd->add_flag("--smooth-positions", run.cfg.smooth_positions, "Causal 3-frame center smoothing");
  run_cmd->add_option("--residuals", run.residuals, "Write stitch residual CSV here");
  run_cmd->add_option("--map-scale", run.cfg.map_scale, "Integer map downscale divisor")->capture_default_str();
  run_cmd->add_option("--depth-dir", run.depth_dir, "Directory of depth_<frame>.mfd files");
  run_cmd->add_option("--depth-alpha", run.cfg.depth_alpha, "Depth floor for guided depth")->capture_default_str();
  run_cmd->add_flag("--emit-float-maps", run.cfg.emit_float_maps, "Also write focus_<frame>.mfm");
  run_cmd->add_option("--seed", run.seed, "Unused by run; accepted for scripting symmetry");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark pose math, rendering and streaming memory");
  bench_cmd->add_option("--poses-count", bench.cfg.pose_count, "Poses for the pose-math stage")
      ->capture_default_str();
  bench_cmd->add_option("--sizes", bench.sizes, "Render resolutions, WxH")->delimiter(',');
  bench_cmd->add_option("--maps", bench.cfg.maps_per_resolution, "Maps per resolution")->capture_default_str();
  bench_cmd->add_option("--focus-n", bench.cfg.focus_window, "Points per map")->capture_default_str();
  bench_cmd->add_option("--stream-lengths", bench.cfg.memory_stream_lengths, "Stream lengths for memory runs")
      ->delimiter(',');
  bench_cmd->add_flag("--skip-memory", bench.skip_memory, "Skip the streaming memory runs");
  bench_cmd->add_option("--seed", bench.cfg.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "CSV output path, - for stdout")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) return do_sim(sim);
    if (*run_cmd) return do_run(run);
    if (*bench_cmd) return do_bench(bench);
  } catch (const ConfigError& e) {
    std::cerr << "ego-focus: config error (" << e.key() << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ego-focus: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
