#include "honls/grid.hpp"

#include <cmath>

namespace honls {

GridSpec make_grid(int dim, int n, double box) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("make_grid: dim must be 1, 2 or 3");
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("make_grid: n must be a power of two >= 8");
  if (!(box > 0.0) || !std::isfinite(box))
    throw std::invalid_argument("make_grid: box length must be positive");
  return GridSpec{dim, n, box};
}

} // namespace honls
