#include "mppic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mppic/error.hpp"

namespace mppic {

const char* to_string(CellFlag flag) {
  switch (flag) {
    case CellFlag::Fluid: return "fluid";
    case CellFlag::Wall: return "wall";
    case CellFlag::Inlet: return "inlet";
    case CellFlag::Outlet: return "outlet";
    case CellFlag::Blocked: return "blocked";
  }
  return "?";
}

double GridSpec::min_spacing() const { return std::min({h[0], h[1], h[2]}); }

Vec3 GridSpec::node_position(Lattice lattice, const Index3& c) const {
  Vec3 p{};
  for (int a = 0; a < 3; ++a) {
    const bool on_face = lattice == face_lattice(a);
    const double shift = on_face ? 0.0 : 0.5;
    p[a] = origin[a] + (c[a] - shift) * h[a];
  }
  return p;
}

std::size_t CellFlags::count(CellFlag flag) const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), flag));
}

namespace {

bool is_boundary_kind(CellFlag k) {
  return k == CellFlag::Inlet || k == CellFlag::Outlet || k == CellFlag::Wall;
}

void mark(CellFlags& flags, std::vector<int>& owner, std::size_t idx, CellFlag kind,
          int region) {
  if (owner[idx] >= 0 && flags[idx] != kind) {
    throw GeometryError("region " + std::to_string(region) + " (" + to_string(kind) +
                        ") contradicts region " + std::to_string(owner[idx]) + " (" +
                        to_string(flags[idx]) + ")");
  }
  flags[idx] = kind;
  owner[idx] = region;
}

}  // namespace

Mesh build_grid(const GridConfig& config) {
  Mesh mesh;
  GridSpec& g = mesh.grid;
  for (int a = 0; a < 3; ++a) {
    if (config.cells[a] < 2) throw GeometryError("each axis needs at least 2 cells");
    if (!(config.extent[a] > 0.0)) throw GeometryError("domain extents must be positive");
    g.n[a] = config.cells[a];
    g.h[a] = config.extent[a] / config.cells[a];
    g.origin[a] = config.origin[a];
  }

  mesh.flags = CellFlags(g.stored_count(), CellFlag::Wall);
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) mesh.flags[g.index(i, j, k)] = CellFlag::Fluid;

  std::vector<int> owner(g.stored_count(), -1);
  const Vec3 ext = g.extent();

  for (std::size_t r = 0; r < config.regions.size(); ++r) {
    const RegionSpec& reg = config.regions[r];
    const int rid = static_cast<int>(r);
    int planar_axis = -1;
    for (int a = 0; a < 3; ++a) {
      const double tol = 1e-9 * ext[a];
      if (reg.hi[a] < reg.lo[a]) throw GeometryError("region " + std::to_string(r) + " has lo > hi");
      if (reg.lo[a] < g.origin[a] - tol || reg.hi[a] > g.origin[a] + ext[a] + tol)
        throw GeometryError("region " + std::to_string(r) + " lies outside the domain");
      if (reg.hi[a] - reg.lo[a] <= tol) {
        if (planar_axis >= 0) throw GeometryError("region " + std::to_string(r) + " is degenerate");
        planar_axis = a;
      }
    }

    auto inside = [&](int a, double x) {
      const double tol = 1e-9 * ext[a];
      return x >= reg.lo[a] - tol && x <= reg.hi[a] + tol;
    };

    if (planar_axis >= 0) {
      if (!is_boundary_kind(reg.kind))
        throw GeometryError("planar region " + std::to_string(r) + " must be inlet, outlet or wall");
      const int a = planar_axis;
      const double tol = 1e-9 * ext[a];
      int ghost;
      if (std::abs(reg.lo[a] - g.origin[a]) <= tol) {
        ghost = 0;
      } else if (std::abs(reg.lo[a] - (g.origin[a] + ext[a])) <= tol) {
        ghost = g.n[a] + 1;
      } else {
        throw GeometryError("planar region " + std::to_string(r) + " is not on a domain boundary");
      }
      const int b = (a + 1) % 3;
      const int c = (a + 2) % 3;
      for (int q = 1; q <= g.n[c]; ++q) {
        for (int p = 1; p <= g.n[b]; ++p) {
          Index3 cell{};
          cell[a] = ghost;
          cell[b] = p;
          cell[c] = q;
          const Vec3 x = g.cell_center(cell);
          if (inside(b, x[b]) && inside(c, x[c])) mark(mesh.flags, owner, g.index(cell), reg.kind, rid);
        }
      }
    } else {
      if (reg.kind != CellFlag::Blocked)
        throw GeometryError("solid region " + std::to_string(r) + " must be blocked");
      for (int k = 1; k <= g.n[2]; ++k)
        for (int j = 1; j <= g.n[1]; ++j)
          for (int i = 1; i <= g.n[0]; ++i) {
            const Vec3 x = g.cell_center({i, j, k});
            if (inside(0, x[0]) && inside(1, x[1]) && inside(2, x[2]))
              mark(mesh.flags, owner, g.index(i, j, k), reg.kind, rid);
          }
    }
  }

  // Every inlet/outlet ghost must face a fluid cell.
  for (std::size_t idx = 0; idx < g.stored_count(); ++idx) {
    const CellFlag f = mesh.flags[idx];
    if (f != CellFlag::Inlet && f != CellFlag::Outlet) continue;
    const Index3 c = g.coords(idx);
    bool touches_fluid = false;
    for (int a = 0; a < 3 && !touches_fluid; ++a) {
      for (int d : {-1, 1}) {
        Index3 nb = c;
        nb[a] += d;
        if (nb[a] < 0 || nb[a] > g.n[a] + 1) continue;
        if (mesh.flags[g.index(nb)] == CellFlag::Fluid) touches_fluid = true;
      }
    }
    if (!touches_fluid)
      throw GeometryError(std::string(to_string(f)) + " cell without a fluid neighbour");
  }
  return mesh;
}

std::size_t cell_of_point(const Vec3& pos, const GridSpec& grid) {
  Index3 c{};
  for (int a = 0; a < 3; ++a) {
    const double t = (pos[a] - grid.origin[a]) / grid.h[a];
    if (!std::isfinite(t)) throw GeometryError("non-finite position");
    const int i = static_cast<int>(std::floor(t)) + 1;
    if (i < 0 || i > grid.n[a] + 1) throw GeometryError("point outside the domain");
    c[a] = i;
  }
  return grid.index(c);
}

bool inside_interior(const Vec3& pos, const GridSpec& grid) {
  for (int a = 0; a < 3; ++a) {
    if (!(pos[a] >= grid.origin[a] && pos[a] <= grid.origin[a] + grid.n[a] * grid.h[a])) return false;
  }
  return true;
}

InterpStencil trilinear_stencil(const Vec3& pos, const GridSpec& grid, Lattice lattice) {
  if (!inside_interior(pos, grid)) throw GeometryError("interpolation point outside the interior");
  std::array<int, 3> lo{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double shift = lattice == face_lattice(a) ? 0.0 : 0.5;
    const double t = (pos[a] - grid.origin[a]) / grid.h[a] + shift;
    // t lies in [0, n + 0.5], so both nodes i0 and i0 + 1 are stored.
    const int i0 = static_cast<int>(std::floor(t));
    lo[a] = i0;
    frac[a] = t - i0;
  }
  InterpStencil s;
  int m = 0;
  for (int dk = 0; dk < 2; ++dk) {
    const double wz = dk ? frac[2] : 1.0 - frac[2];
    for (int dj = 0; dj < 2; ++dj) {
      const double wy = dj ? frac[1] : 1.0 - frac[1];
      for (int di = 0; di < 2; ++di) {
        const double wx = di ? frac[0] : 1.0 - frac[0];
        s.node[m] = grid.index(lo[0] + di, lo[1] + dj, lo[2] + dk);
        s.weight[m] = wx * wy * wz;
        ++m;
      }
    }
  }
  return s;
}

std::size_t fold_into_domain(std::size_t idx, const GridSpec& grid, Lattice lattice) {
  Index3 c = grid.coords(idx);
  for (int a = 0; a < 3; ++a) {
    const bool normal = lattice == face_lattice(a);
    c[a] = normal ? std::clamp(c[a], 1, grid.n[a] - 1) : std::clamp(c[a], 1, grid.n[a]);
  }
  return grid.index(c);
}

InterpStencil fold_stencil(InterpStencil s, const GridSpec& grid, Lattice lattice) {
  for (std::size_t& node : s.node) node = fold_into_domain(node, grid, lattice);
  return s;
}

}  // namespace mppic
