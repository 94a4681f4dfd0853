#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mgvol {

/// Location in length units. Two-dimensional data leave the third coordinate at 0.
using Point = std::array<double, 3>;

double distance(const Point& a, const Point& b);

/// Regular grid of nodes; node index = ix + nx * (iy + ny * iz).
struct Grid {
  Point origin{0.0, 0.0, 0.0};
  Point spacing{1.0, 1.0, 1.0};
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;
  /// 2 or 3; controls CSV layouts only.
  int dims = 2;

  std::size_t node_count() const { return nx * ny * nz; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz = 0) const {
    return ix + nx * (iy + ny * iz);
  }
  std::array<std::size_t, 3> cell(std::size_t node) const {
    return {node % nx, (node / nx) % ny, node / (nx * ny)};
  }
  Point position(std::size_t node) const;
  std::vector<Point> positions() const;
};

}  // namespace mgvol
