#include "ego_focus/focus_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "ego_focus/errors.hpp"

namespace ego_focus {
namespace {

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32_le(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

}  // namespace

std::string encode_pgm(const Grid& grid) {
  std::string out = fmt::format("P5\n{} {}\n255\n", grid.width, grid.height);
  const std::size_t header = out.size();
  out.resize(header + grid.values.size());
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = std::clamp(grid.values[i], 0.0, 1.0);
    out[header + i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
  }
  return out;
}

std::string encode_float_grid(const Grid& grid, const Magic& magic) {
  std::string out(magic.begin(), magic.end());
  put_u32_le(out, static_cast<std::uint32_t>(grid.width));
  put_u32_le(out, static_cast<std::uint32_t>(grid.height));
  out.reserve(out.size() + 4 * grid.values.size());
  for (double v : grid.values) put_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Grid decode_float_grid(std::string_view bytes, const Magic& magic) {
  if (bytes.size() < 16 || !std::equal(magic.begin(), magic.end(), bytes.begin())) {
    throw IoError("raw float grid: bad magic");
  }
  const std::uint32_t w = get_u32_le(bytes, 8);
  const std::uint32_t h = get_u32_le(bytes, 12);
  const std::uint64_t n = static_cast<std::uint64_t>(w) * h;
  if (bytes.size() != 16 + 4 * n) {
    throw IoError(fmt::format("raw float grid: expected {} payload bytes, found {}", 4 * n, bytes.size() - 16));
  }
  Grid g(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < n; ++i) {
    g.values[i] = static_cast<double>(std::bit_cast<float>(get_u32_le(bytes, 16 + 4 * i)));
  }
  return g;
}

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(fmt::format("failed writing '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Grid read_float_grid(const std::filesystem::path& path, const Magic& magic) {
  try {
    return decode_float_grid(read_file(path), magic);
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string frame_filename(std::string_view prefix, std::int64_t frame, std::string_view extension) {
  return fmt::format("{}_{:06}.{}", prefix, frame, extension);
}

void write_focus_outputs(const FocusMap& map, std::int64_t frame, const FocusOutputOptions& options) {
  atomic_write(options.out_dir / frame_filename("focus", frame, "pgm"), encode_pgm(map.grid));
  if (options.emit_float_maps) {
    atomic_write(options.out_dir / frame_filename("focus", frame, "mfm"), encode_float_grid(map.grid, kFocusMagic));
  }
}

std::string focus_csv_row(const FocusPoint& p) {
  const Vec3& a = p.a_camera;
  if (p.pixel) {
    return fmt::format("{},{},{},{},{},{},{},1\n", p.frame_index, p.pixel->x(), p.pixel->y(), a.x(), a.y(), a.z(),
                       p.magnitude);
  }
  return fmt::format("{},,,{},{},{},{},0\n", p.frame_index, a.x(), a.y(), a.z(), p.magnitude);
}

std::string residual_csv_rows(const BoundaryResidual& r) {
  std::string out;
  for (std::size_t i = 0; i < r.frames.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", r.boundary_index, r.frames[i], r.center_distance[i], r.rotation_angle[i]);
  }
  return out;
}

}  // namespace ego_focus
