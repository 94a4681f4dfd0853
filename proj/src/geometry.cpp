#include "mgvol/geometry.hpp"

#include <cmath>

namespace mgvol {

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point Grid::position(std::size_t node) const {
  const auto c = cell(node);
  return {origin[0] + spacing[0] * double(c[0]), origin[1] + spacing[1] * double(c[1]),
          origin[2] + spacing[2] * double(c[2])};
}

std::vector<Point> Grid::positions() const {
  std::vector<Point> out(node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = position(i);
  return out;
}

}  // namespace mgvol
