#pragma once

// Binary map containers and CSV writers.
//
//   PGM:  "P5\n<w> <h>\n255\n" followed by w*h bytes, row-major,
//         byte = round(255 * M).
//   MFM / MFD raw float grid: 8 magic bytes ("MFMAP\0\0\0" for focus maps,
//         "MFDEP\0\0\0" for depth), width and height as little-endian
//         uint32, then w*h little-endian float32 values, row-major.
//
// Files are written to "<name>.tmp" and renamed into place, so a reader
// never observes a partially written file.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "ego_focus/motion_focus.hpp"
#include "ego_focus/stitcher.hpp"

namespace ego_focus {

using Magic = std::array<char, 8>;
inline constexpr Magic kFocusMagic = {'M', 'F', 'M', 'A', 'P', '\0', '\0', '\0'};
inline constexpr Magic kDepthMagic = {'M', 'F', 'D', 'E', 'P', '\0', '\0', '\0'};

std::string encode_pgm(const Grid& grid);
std::string encode_float_grid(const Grid& grid, const Magic& magic);
/// Throws IoError on a bad magic, truncated payload or trailing bytes.
Grid decode_float_grid(std::string_view bytes, const Magic& magic);

/// Writes `bytes` to `path` via a temporary file and rename.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

Grid read_float_grid(const std::filesystem::path& path, const Magic& magic);

/// focus_000042.pgm and friends.
std::string frame_filename(std::string_view prefix, std::int64_t frame, std::string_view extension);

struct FocusOutputOptions {
  std::filesystem::path out_dir;
  bool emit_float_maps = false;
};

/// Writes focus_<frame>.pgm, plus focus_<frame>.mfm when requested.
void write_focus_outputs(const FocusMap& map, std::int64_t frame, const FocusOutputOptions& options);

inline constexpr std::string_view kFocusCsvHeader = "frame,u,v,ax,ay,az,mag,projectable";
inline constexpr std::string_view kResidualCsvHeader = "boundary_index,frame,center_dist,rot_angle_rad";

/// One CSV line (with newline); u and v are empty when not projectable.
std::string focus_csv_row(const FocusPoint& point);
/// One CSV line per overlap frame.
std::string residual_csv_rows(const BoundaryResidual& residual);

}  // namespace ego_focus
