#include "ego_focus/pipeline.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "ego_focus/bounded_queue.hpp"
#include "ego_focus/errors.hpp"
#include "ego_focus/focus_io.hpp"

namespace ego_focus {
namespace {

constexpr std::size_t kMaxStoredWarnings = 100;

struct RenderJob {
  std::int64_t frame = 0;
  std::vector<FocusPoint> window;
};

// Text file written through "<path>.tmp" and renamed on commit().
class StagedTextFile {
 public:
  StagedTextFile(std::filesystem::path path, std::string_view header) : path_(std::move(path)) {
    tmp_ = path_;
    tmp_ += ".tmp";
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError(fmt::format("cannot open '{}' for writing", tmp_.string()));
    out_ << header << '\n';
  }

  void write(std::string_view text) { out_ << text; }

  void commit() {
    out_.close();
    if (!out_) throw IoError(fmt::format("failed writing '{}'", tmp_.string()));
    std::error_code ec;
    std::filesystem::rename(tmp_, path_, ec);
    if (ec) throw IoError(fmt::format("cannot rename '{}': {}", tmp_.string(), ec.message()));
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
};

class FrameRenderer {
 public:
  FrameRenderer(const Intrinsics& k, const RunConfig& cfg, const RunObserver& observer)
      : k_(k), cfg_(cfg), observer_(observer) {}

  void operator()(const RenderJob& job) {
    const FocusMap map = render_focus_map(job.window, k_, cfg_.focus, cfg_.map_scale);
    if (!cfg_.out_dir.empty()) {
      write_focus_outputs(map, job.frame, {cfg_.out_dir, cfg_.emit_float_maps});
      if (cfg_.depth_dir) write_guided_depth(map, job.frame);
    }
    std::lock_guard lock(mu_);
    ++maps_;
    if (observer_.on_map) observer_.on_map(job.frame, map);
  }

  std::int64_t maps() const { return maps_; }
  std::int64_t depth_maps() const { return depth_maps_; }

 private:
  void write_guided_depth(const FocusMap& map, std::int64_t frame) {
    const auto src = *cfg_.depth_dir / frame_filename("depth", frame, "mfd");
    if (!std::filesystem::exists(src)) return;
    const Grid depth = read_float_grid(src, kDepthMagic);
    const Grid guided = modulate_depth(depth, map, cfg_.depth_alpha);
    atomic_write(cfg_.out_dir / frame_filename("guided_depth", frame, "mfd"),
                 encode_float_grid(guided, kDepthMagic));
    std::lock_guard lock(mu_);
    ++depth_maps_;
  }

  const Intrinsics& k_;
  const RunConfig& cfg_;
  const RunObserver& observer_;
  std::mutex mu_;
  std::int64_t maps_ = 0;
  std::int64_t depth_maps_ = 0;
};

// Runs render jobs inline (one thread) or on a worker pool fed by a bounded
// queue. The first worker exception is rethrown from finish().
class RenderStage {
 public:
  RenderStage(FrameRenderer& renderer, int threads) : renderer_(renderer), queue_(2 * std::max(threads, 1)) {
    if (threads <= 1) return;
    workers_.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) {
      workers_.emplace_back([this] {
        while (auto job = queue_.pop()) {
          try {
            renderer_(*job);
          } catch (...) {
            std::lock_guard lock(error_mu_);
            if (!error_) error_ = std::current_exception();
            queue_.close();
          }
        }
      });
    }
  }

  ~RenderStage() {
    queue_.close();
    for (auto& w : workers_) {
      if (w.joinable()) w.join();
    }
  }

  void submit(RenderJob job) {
    if (workers_.empty()) {
      renderer_(job);
      return;
    }
    if (!queue_.push(std::move(job))) rethrow();
  }

  void finish() {
    queue_.close();
    for (auto& w : workers_) w.join();
    workers_.clear();
    rethrow();
  }

 private:
  void rethrow() {
    std::lock_guard lock(error_mu_);
    if (error_) std::rethrow_exception(error_);
  }

  FrameRenderer& renderer_;
  BoundedQueue<RenderJob> queue_;
  std::vector<std::thread> workers_;
  std::mutex error_mu_;
  std::exception_ptr error_;
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void RunConfig::validate() const {
  WindowPlan(window_size, overlap);
  focus.validate();
  if (map_scale < 1) throw ConfigError("map_scale", "map scale divisor must be at least 1");
  if (!(depth_alpha >= 0.0 && depth_alpha <= 1.0)) throw ConfigError("alpha", "depth alpha must lie in [0, 1]");
  if (threads < 0) throw ConfigError("threads", "thread count must be non-negative");
  if (depth_dir && out_dir.empty()) throw ConfigError("depth_dir", "--depth-dir needs --out-dir");
}

int threads_from_env() {
  const char* v = std::getenv(kThreadsEnv);
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 0) return 0;
  return static_cast<int>(std::min<long>(n, 1024));
}

std::size_t peak_rss_bytes() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;  // Linux reports KiB
}

RunSummary run_stream(const PoseSource& source, const Intrinsics& k, const RunConfig& cfg,
                      const RunObserver& observer) {
  k.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
  std::optional<StagedTextFile> focus_csv;
  if (!cfg.out_dir.empty() && cfg.write_focus_csv) focus_csv.emplace(cfg.out_dir / "focus_points.csv", kFocusCsvHeader);
  std::optional<StagedTextFile> residual_csv;
  if (cfg.residuals_path) residual_csv.emplace(*cfg.residuals_path, kResidualCsvHeader);

  RunSummary summary;
  FocusTracker tracker(k, cfg.focus, cfg.smooth_positions);
  FrameRenderer renderer(k, cfg, observer);
  RenderStage render_stage(renderer, cfg.render ? resolve_threads(cfg.threads) : 1);

  auto warn = [&](std::string msg) {
    if (summary.warnings.size() < kMaxStoredWarnings) summary.warnings.push_back(std::move(msg));
  };

  auto handle_pose = [&](const CameraPose& pose) {
    ++summary.frames_processed;
    if (observer.on_pose) observer.on_pose(pose);
    const std::optional<FocusPoint> point = tracker.push(pose);
    if (!point) return;
    ++summary.samples;
    if (point->projectable()) {
      ++summary.points_projected;
    } else {
      ++summary.points_skipped;
    }
    if (focus_csv) focus_csv->write(focus_csv_row(*point));
    if (observer.on_point) observer.on_point(*point);
    if (cfg.render) render_stage.submit(RenderJob{point->frame_index, tracker.window()});
  };

  std::optional<WindowPlan> plan;
  StitchState stitch_state;
  std::vector<CameraPose> batch;
  std::optional<std::int64_t> batch_id;

  auto flush_batch = [&] {
    if (batch.empty()) return;
    if (!plan) plan.emplace(cfg.window_size, cfg.overlap, std::nullopt, batch.front().frame_index);
    const std::vector<CameraPose> emitted = stitch_step(stitch_state, batch, *plan, cfg.stitch);
    ++summary.batches;
    for (const BoundaryResidual& r : stitch_state.residual_log) {
      if (residual_csv) residual_csv->write(residual_csv_rows(r));
    }
    stitch_state.residual_log.clear();
    for (StitchWarning& w : stitch_state.warnings) warn(fmt::format("boundary {}: {}", w.boundary_index, w.message));
    stitch_state.warnings.clear();
    batch.clear();
    for (const CameraPose& pose : emitted) handle_pose(pose);
  };

  while (std::optional<PoseStreamRecord> rec = source()) {
    ++summary.records_read;
    if (!rec->batch) {
      if (batch_id) throw ParseError(static_cast<std::size_t>(summary.records_read), "records mix batched and unbatched form");
      handle_pose(rec->pose);
      continue;
    }
    if (summary.records_read > 1 && !batch_id) {
      throw ParseError(static_cast<std::size_t>(summary.records_read), "records mix batched and unbatched form");
    }
    if (batch_id && *rec->batch != *batch_id) flush_batch();
    batch_id = rec->batch;
    batch.push_back(rec->pose);
    if (batch.size() > static_cast<std::size_t>(cfg.window_size)) {
      throw StreamDiscontinuityError(rec->pose.frame_index,
                                     fmt::format("batch {} exceeds the window size {}", *batch_id, cfg.window_size));
    }
  }
  flush_batch();
  render_stage.finish();

  if (focus_csv) focus_csv->commit();
  if (residual_csv) residual_csv->commit();

  summary.maps_rendered = renderer.maps();
  summary.depth_maps_written = renderer.depth_maps();
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.frames_per_second = summary.seconds > 0.0 ? summary.frames_processed / summary.seconds : 0.0;
  summary.peak_rss_bytes = peak_rss_bytes();
  return summary;
}

RunSummary run_stream(std::span<const PoseStreamRecord> records, const Intrinsics& k, const RunConfig& cfg,
                      const RunObserver& observer) {
  std::size_t i = 0;
  const PoseSource source = [&]() -> std::optional<PoseStreamRecord> {
    if (i >= records.size()) return std::nullopt;
    return records[i++];
  };
  return run_stream(source, k, cfg, observer);
}

std::string format_summary(const RunSummary& s) {
  std::string out = fmt::format(
      "records read:      {}\n"
      "frames processed:  {}\n"
      "batches stitched:  {}\n"
      "motion samples:    {}\n"
      "points projected:  {}\n"
      "points skipped:    {}\n"
      "maps rendered:     {}\n"
      "guided depth maps: {}\n"
      "wall clock:        {:.3f} s ({:.1f} frames/s)\n"
      "peak memory:       {:.1f} MiB\n",
      s.records_read, s.frames_processed, s.batches, s.samples, s.points_projected, s.points_skipped,
      s.maps_rendered, s.depth_maps_written, s.seconds, s.frames_per_second,
      static_cast<double>(s.peak_rss_bytes) / (1024.0 * 1024.0));
  for (const std::string& w : s.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace ego_focus
