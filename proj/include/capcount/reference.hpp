#pragma once

#include <vector>

#include <Eigen/Dense>

#include "capcount/matroid.hpp"
#include "capcount/poly.hpp"

namespace capcount {

/// Slow, independent oracles for desk-scale validation.

/// Coefficient of z^alpha. Square-free alpha of full degree in a homogeneous
/// g goes through inclusion-exclusion over 0/1 evaluations (|alpha| <= 16);
/// anything else through tensor interpolation on nodes 1..deg+1.
double coeff_extract(const PolynomialOracle& g, const std::vector<int>& alpha);

/// Coefficient of z^S for a set S.
double coeff_extract_set(const PolynomialOracle& g, const IndexSet& s);

/// Full monomial expansion, built from the structural description of each
/// kind (products multiplied out, determinantal coefficients from minors).
std::vector<Term> expand(const PolynomialOracle& g, std::size_t max_terms = 200000);

/// sum_{S in B} g_S and max_{S in B} g_S.
double coeff_sum_brute(const PolynomialOracle& g, const MatroidSpec& mat);
double max_coeff_brute(const PolynomialOracle& g, const MatroidSpec& mat);

/// Permanent by summing over all permutations.
double permanent(const Eigen::MatrixXd& A);

/// Minimum of g over z with z^S >= 1 on a log-uniform grid in [-4, 4]^(m-1)
/// (one coordinate pinned by homogeneity, the point pushed onto the
/// feasible boundary along the all-ones ray), then refined by coordinate
/// descent. An upper bound on the capacity.
double grid_cap_oracle(const PolynomialOracle& g, const MatroidSpec& mat, int resolution = 64,
                       long long max_points = 2000000);

}  // namespace capcount
