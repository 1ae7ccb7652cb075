#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "capcount/matroid.hpp"
#include "capcount/poly.hpp"
#include "capcount/solver.hpp"

namespace capcount {

struct CapacityOptions {
  double eps = 1e-6;                 // additive accuracy on log-values
  int budget = 10000;                // Newton iterations per convex solve
  int outer_budget = 1000;           // Frank-Wolfe iterations for sup-inf forms
  std::optional<double> radius;      // box radius in log coordinates
  unsigned long long seed = 0;       // homogeneity probe and multistart draws
  bool concavity_check = false;      // midpoint test on sup-inf outer steps
};

struct CapacityResult {
  double value = 0.0;
  double log_value = 0.0;
  Eigen::VectorXd minimizer;         // y with z = e^y
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  std::vector<IndexSet> active_bases;
  bool zero = false;                 // boxed infimum fell below the zero threshold
  double radius = 0.0;
};

/// Default box radius 4 (|log g(1)| + n log(m + 1)).
double default_radius(const PolynomialOracle& g, int n);

/// Throws DomainError unless log g(lambda z) = n log(lambda) + log g(z) at a
/// few seeded random points.
void check_homogeneous(const PolynomialOracle& g, unsigned long long seed);

/// inf{ g(z) : z > 0, z^S >= 1 for all S in B } for n-homogeneous g.
CapacityResult cap(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts = {});

struct PrimalResult {
  double value = 0.0;
  double log_value = 0.0;
  Eigen::VectorXd theta;
  double gap = 0.0;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
};

/// sup over theta in P(B) of inf_z g(z) / z^theta, by the saddle engine.
PrimalResult cap_primal(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts = {});

struct LowerCapResult {
  double value = 0.0;
  double log_value = 0.0;
  IndexSet argmin;
};

/// min over bases S of inf_z h(z) / z^S.
LowerCapResult lower_cap(const PolynomialOracle& h, const MatroidSpec& mat, const CapacityOptions& opts = {},
                         long long limit = 5000);

/// inf{ g(z) : z > 0, prod z_i = 1 }.
CapacityResult gurvits_cap(const PolynomialOracle& g, const CapacityOptions& opts = {});

struct EntropyResult {
  double value = 0.0;
  double log_value = 0.0;            // optimum of -KL(q, p)
  Eigen::VectorXd theta;             // optimal marginal
  Eigen::VectorXd q;                 // optimal distribution over the support
  bool boundary_warning = false;     // marginal not reachable by a positive q
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
};

/// Capacity through the relative-entropy program over distributions on the
/// monomial support of a sparse polynomial.
EntropyResult entropy_cap(const PolynomialOracle& p, const MatroidSpec& mat, const CapacityOptions& opts = {},
                          std::size_t max_support = 20000);

/// Distinct bases covering every element that lies in some base; used as
/// starting vertices for Frank-Wolfe.
std::vector<Eigen::VectorXd> spread_vertices(const MatroidSpec& mat);

}  // namespace capcount
