#include "capcount/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "capcount/error.hpp"

namespace capcount {

std::vector<double> vandermonde_solve(const std::vector<double>& nodes,
                                      std::vector<double> values) {
  const std::size_t count = nodes.size();
  if (values.size() != count) throw DimensionError("vandermonde_solve: node/value count mismatch");
  if (count == 0) return values;
  const std::size_t n = count - 1;
  // Newton divided differences, then expansion into the monomial basis.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = n; i > k; --i) {
      const double denom = nodes[i] - nodes[i - k - 1];
      if (denom == 0.0) throw DomainError("vandermonde_solve: repeated node");
      values[i] = (values[i] - values[i - 1]) / denom;
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t i = k; i < n; ++i) values[i] -= nodes[k] * values[i + 1];
  }
  return values;
}

double vandermonde_condition(const std::vector<double>& nodes) {
  const std::size_t count = nodes.size();
  if (count == 0) return 1.0;
  double norm = 0.0;
  for (double x : nodes) {
    double row = 0.0, p = 1.0;
    for (std::size_t k = 0; k < count; ++k, p *= x) row += std::abs(p);
    norm = std::max(norm, row);
  }
  // Column j of the inverse solves V a = e_j; accumulate row sums of |inverse|.
  std::vector<double> inv_rows(count, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<double> e(count, 0.0);
    e[j] = 1.0;
    const auto col = vandermonde_solve(nodes, std::move(e));
    for (std::size_t r = 0; r < count; ++r) inv_rows[r] += std::abs(col[r]);
  }
  return norm * *std::max_element(inv_rows.begin(), inv_rows.end());
}

}  // namespace capcount
