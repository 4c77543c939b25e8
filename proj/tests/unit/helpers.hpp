#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "mppic/grid.hpp"

namespace mppic::test {

inline Mesh box_mesh(Index3 cells, Vec3 extent = {1.0, 1.0, 1.0}) {
  GridConfig c;
  c.extent = extent;
  c.cells = cells;
  return build_grid(c);
}

/// Closed box with an inlet on the whole z = 0 plane and an outlet on the whole top plane.
inline Mesh column_mesh(Index3 cells, Vec3 extent) {
  GridConfig c;
  c.extent = extent;
  c.cells = cells;
  c.regions = {{CellFlag::Inlet, {0.0, 0.0, 0.0}, {extent[0], extent[1], 0.0}},
               {CellFlag::Outlet, {0.0, 0.0, extent[2]}, {extent[0], extent[1], extent[2]}}};
  return build_grid(c);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline std::uint64_t bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

/// Fresh directory under the system temp dir, removed by the destructor.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("mppic_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace mppic::test
