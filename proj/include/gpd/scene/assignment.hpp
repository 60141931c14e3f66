#pragma once

#include <cstddef>
#include <vector>

namespace gpd::scene {

/// Dense cost matrix, row-major.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Minimum-cost one-to-one assignment (Hungarian method with potentials).
/// row_to_col[r] is the matched column or -1 when rows > cols leaves r unmatched.
struct Assignment {
  std::vector<long> row_to_col;
  std::vector<long> col_to_row;
  double total_cost = 0.0;
};

Assignment solve_assignment(const CostMatrix& cost);

}  // namespace gpd::scene
