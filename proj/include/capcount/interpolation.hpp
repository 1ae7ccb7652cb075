#pragma once

#include <vector>

namespace capcount {

/// Monomial coefficients a_0..a_n of the polynomial through (nodes[k], values[k]),
/// by the Bjorck-Pereyra recurrences. Nodes must be distinct.
std::vector<double> vandermonde_solve(const std::vector<double>& nodes,
                                      std::vector<double> values);

/// Infinity-norm condition number of the Vandermonde matrix V_jk = nodes[j]^k.
double vandermonde_condition(const std::vector<double>& nodes);

}  // namespace capcount
