#include "gpd/scene/assignment.hpp"

#include <cmath>
#include <limits>

#include "gpd/scene/error.hpp"

namespace gpd::scene {

namespace {

// Shortest augmenting path with row/column potentials; requires rows <= cols.
std::vector<long> solve_wide(const CostMatrix& c) {
  const std::size_t n = c.rows;
  const std::size_t m = c.cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<long> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<long>(j - 1);
  }
  return row_to_col;
}

}  // namespace

Assignment solve_assignment(const CostMatrix& cost) {
  Assignment out;
  out.row_to_col.assign(cost.rows, -1);
  out.col_to_row.assign(cost.cols, -1);
  if (cost.rows == 0 || cost.cols == 0) return out;
  for (double v : cost.data) {
    if (!std::isfinite(v)) throw NumericalError("assignment cost is not finite");
  }

  if (cost.rows <= cost.cols) {
    out.row_to_col = solve_wide(cost);
  } else {
    CostMatrix t(cost.cols, cost.rows);
    for (std::size_t r = 0; r < cost.rows; ++r) {
      for (std::size_t c = 0; c < cost.cols; ++c) t(c, r) = cost(r, c);
    }
    const auto col_to_row = solve_wide(t);
    for (std::size_t c = 0; c < col_to_row.size(); ++c) out.row_to_col[col_to_row[c]] = static_cast<long>(c);
  }
  for (std::size_t r = 0; r < cost.rows; ++r) {
    const long c = out.row_to_col[r];
    if (c >= 0) {
      out.col_to_row[c] = static_cast<long>(r);
      out.total_cost += cost(r, c);
    }
  }
  return out;
}

}  // namespace gpd::scene
