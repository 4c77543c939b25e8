#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mppic {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

enum class CellFlag : std::uint8_t { Fluid = 0, Wall, Inlet, Outlet, Blocked };

const char* to_string(CellFlag flag);

/// Variable lattices of the staggered mesh. Scalars live at cell centers, each
/// velocity component on the faces normal to its axis.
enum class Lattice : std::uint8_t { Cell = 0, FaceX, FaceY, FaceZ };

inline Lattice face_lattice(int axis) { return static_cast<Lattice>(axis + 1); }

/// Uniform Cartesian mesh with one ghost layer on every side.
///
/// Stored cell (i, j, k) covers [origin + (i-1) h, origin + i h) along each axis, so
/// interior cells are 1..n and ghosts are 0 and n+1. The face lattice of axis `a` stores
/// the face between cells i and i+1 under the index of cell i.
struct GridSpec {
  Index3 n{2, 2, 2};
  Vec3 h{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  int stored(int axis) const { return n[axis] + 2; }
  std::size_t stored_count() const {
    return static_cast<std::size_t>(stored(0)) * stored(1) * stored(2);
  }
  std::size_t interior_count() const {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }
  std::size_t stride(int axis) const {
    if (axis == 0) return 1;
    if (axis == 1) return static_cast<std::size_t>(stored(0));
    return static_cast<std::size_t>(stored(0)) * stored(1);
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(stored(0)) * (static_cast<std::size_t>(j) +
                                                  static_cast<std::size_t>(stored(1)) * k);
  }
  std::size_t index(const Index3& c) const { return index(c[0], c[1], c[2]); }
  Index3 coords(std::size_t idx) const {
    const auto sx = static_cast<std::size_t>(stored(0));
    const auto sy = static_cast<std::size_t>(stored(1));
    return {static_cast<int>(idx % sx), static_cast<int>((idx / sx) % sy),
            static_cast<int>(idx / (sx * sy))};
  }
  bool is_interior(const Index3& c) const {
    return c[0] >= 1 && c[0] <= n[0] && c[1] >= 1 && c[1] <= n[1] && c[2] >= 1 && c[2] <= n[2];
  }

  double cell_volume() const { return h[0] * h[1] * h[2]; }
  /// Area of a face whose normal is `axis`.
  double face_area(int axis) const { return h[(axis + 1) % 3] * h[(axis + 2) % 3]; }
  Vec3 extent() const { return {n[0] * h[0], n[1] * h[1], n[2] * h[2]}; }
  double min_spacing() const;

  /// Physical position of a lattice node.
  Vec3 node_position(Lattice lattice, const Index3& c) const;
  Vec3 cell_center(const Index3& c) const { return node_position(Lattice::Cell, c); }
};

/// Per-stored-cell boundary classification.
class CellFlags {
 public:
  CellFlags() = default;
  explicit CellFlags(std::size_t count, CellFlag fill = CellFlag::Fluid) : flags_(count, fill) {}

  CellFlag operator[](std::size_t idx) const { return flags_[idx]; }
  CellFlag& operator[](std::size_t idx) { return flags_[idx]; }
  std::size_t size() const { return flags_.size(); }
  std::size_t count(CellFlag flag) const;
  bool has(CellFlag flag) const { return count(flag) > 0; }
  std::span<const CellFlag> values() const { return flags_; }

 private:
  std::vector<CellFlag> flags_;
};

/// Axis-aligned box assigning a flag.
///
/// Blocked regions are solid boxes; every interior cell whose center lies inside becomes
/// BLOCKED. Inlet, outlet and wall regions are planar rectangles (zero thickness along one
/// axis) lying on a domain boundary; they flag the ghost cells behind that rectangle.
struct RegionSpec {
  CellFlag kind = CellFlag::Blocked;
  Vec3 lo{};
  Vec3 hi{};

  bool operator==(const RegionSpec&) const = default;
};

struct GridConfig {
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 extent{1.0, 1.0, 1.0};
  Index3 cells{2, 2, 2};
  std::vector<RegionSpec> regions;

  bool operator==(const GridConfig&) const = default;
};

struct Mesh {
  GridSpec grid;
  CellFlags flags;
};

/// Builds the mesh and classifies cells. Boundary ghosts default to WALL, interior to
/// FLUID. Throws GeometryError for regions outside the domain, contradictory overlaps and
/// inlet/outlet cells without a fluid neighbour.
Mesh build_grid(const GridConfig& config);

/// Stored index of the cell containing `pos`. Points on a face resolve to the higher index.
/// Throws GeometryError when `pos` lies outside the ghost-extended box.
std::size_t cell_of_point(const Vec3& pos, const GridSpec& grid);

/// Eight lattice nodes surrounding `pos` with tensor-product linear weights.
struct InterpStencil {
  std::array<std::size_t, 8> node{};
  std::array<double, 8> weight{};
};

/// Throws GeometryError when `pos` is outside the interior box.
InterpStencil trilinear_stencil(const Vec3& pos, const GridSpec& grid, Lattice lattice);

/// Evaluates a lattice field at the stencil.
inline double gather(std::span<const double> field, const InterpStencil& s) {
  double v = 0.0;
  for (int m = 0; m < 8; ++m) v += s.weight[m] * field[s.node[m]];
  return v;
}

/// Maps a node onto the nearest interior node: cell-centered and tangential axes clamp into
/// 1..n, the normal axis of a face lattice into the interior faces 1..n-1. Boundary faces
/// carry prescribed values, so parcels next to a wall exchange with the first solved face.
std::size_t fold_into_domain(std::size_t idx, const GridSpec& grid, Lattice lattice);

/// `s` with every node folded into the domain. Gathering through it is the transpose of the
/// folded scatter, so parcels next to a wall see the values they deposit into.
InterpStencil fold_stencil(InterpStencil s, const GridSpec& grid, Lattice lattice);

bool inside_interior(const Vec3& pos, const GridSpec& grid);

}  // namespace mppic
