#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mppic/grid.hpp"

namespace mppic {

using Field = std::vector<double>;

/// Neighbour slot of a 7-point stencil: 2*axis for the minus side, 2*axis+1 for the plus side.
enum Neighbour : int { West = 0, East, South, North, Bottom, Top };

inline int neighbour_slot(int axis, int side) { return 2 * axis + (side > 0 ? 1 : 0); }

/// Linear system for one transport equation on a 7-point stencil:
///   a_p x_P - sum_nb a_nb x_nb = rhs
///
/// Rows are indexed like stored cells. Rows outside `active` are identities holding their
/// prescribed value (a_p = 1, rhs = x); active rows never couple to them.
struct EquationSystem {
  std::array<std::size_t, 3> stride{};
  Field a_p;
  std::array<Field, 6> a_nb;
  Field rhs;
  Field x;
  /// Sum of |source contributions| per row; used as a floor when normalizing residuals.
  Field source_scale;
  std::vector<std::size_t> active;

  EquationSystem() = default;
  explicit EquationSystem(const GridSpec& grid);

  std::size_t size() const { return a_p.size(); }

  std::size_t neighbour_index(std::size_t row, int slot) const {
    const std::size_t s = stride[slot / 2];
    return (slot % 2) ? row + s : row - s;
  }

  /// y = A v on active rows; inactive rows of y are left untouched.
  void multiply(std::span<const double> v, std::span<double> y) const;

  /// b - A x on active rows.
  double row_residual(std::size_t row, std::span<const double> v) const;
};

}  // namespace mppic
