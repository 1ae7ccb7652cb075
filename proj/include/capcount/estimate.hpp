#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "capcount/capacity.hpp"

namespace capcount {

/// A certified upper bound on the worst-case ratio Cap_B(g) / g_B.
struct RatioBound {
  std::string name;
  double value = 0.0;
  double c = 1.0;      // selection unbalance, when a selection was used
  double kappa = 1.0;  // selection lower-capacity constant
};

/// Smallest applicable certified bound for the family. With `multilinear`
/// the bound holds only for multilinear g.
RatioBound bound_M(const MatroidSpec& mat, bool multilinear);

/// Bounds on max { sum_{S in B} x^S : x in P(B) }.
struct ABound {
  std::optional<double> numeric;  // desk-scale multistart value (a lower estimate)
  double certified = 0.0;         // proven upper bound
  std::string certified_name;
  double value() const { return numeric.value_or(certified); }
};

ABound A_bound(const MatroidSpec& mat, unsigned long long seed = 0, long long limit = 2000);

struct EstimateInterval {
  double point = 0.0;
  double log_point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string bound_name;
  double bound_value = 0.0;
  double c = 1.0;
  double kappa = 1.0;
  double a_value = 1.0;         // certified A(B) bound used in the interval
  std::string a_name;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  bool zero = false;
  int concavity_violations = 0;
  double gap = 0.0;             // final Frank-Wolfe gap; infinite at vertices with unbounded slope
  Eigen::VectorXd x;            // optimization marginal
};

/// Interval containing g_B = sum_{S in B} g_S.
EstimateInterval count_estimate(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts = {});

/// Interval containing max_{S in B} g_S.
EstimateInterval max_estimate(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts = {});

/// Interval containing max_{S in B} det(L_{S,S}) for PSD L.
EstimateInterval subdet_max(const Eigen::MatrixXd& L, const MatroidSpec& mat, const CapacityOptions& opts = {});

}  // namespace capcount
