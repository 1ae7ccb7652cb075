#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace capcount {

enum class PolyKind { Sparse, Product, Determinantal, PartitionPower, Restricted, ProductOfTwo };

std::string to_string(PolyKind kind);

struct Term {
  std::vector<int> exponents;
  double coeff = 0.0;
};

// Derivative information of f(u) = log g(e^u) at a point u of log
// coordinates. Entries of u may be -inf (the coordinate is zero).
struct LogDerivatives {
  double log_value = 0.0;
  // log(dg/dz_i / g); -inf where the partial derivative vanishes.
  Eigen::VectorXd log_rel_grad;
  // grad_i = z_i * (dg/dz_i) / g, the gradient of f.
  Eigen::VectorXd grad;
  // Hessian of f; only filled when requested.
  Eigen::MatrixXd hessian;
};

struct InterpolatedDerivative {
  double value = 0.0;
  double condition = 0.0;  // infinity-norm condition of the node Vandermonde
  double ratio = 0.0;      // geometric node ratio actually used
};

namespace detail {
struct PolyNode;
}

/// Evaluation oracle for a polynomial with nonnegative coefficients.
///
/// Oracles are immutable and cheap to copy (shared payload), so they can be
/// evaluated concurrently. All numerics run in log coordinates; the plain
/// evaluate() is a convenience that may overflow for huge values.
class PolynomialOracle {
 public:
  /// g(z) = sum_alpha c_alpha z^alpha. Zero coefficients are dropped and
  /// duplicate exponents merged.
  static PolynomialOracle sparse(int num_vars, std::vector<Term> terms,
                                 bool assert_real_stable = false);
  /// g(z) = prod_i (sum_j A_ij z_j) for a nonnegative n x m matrix A.
  static PolynomialOracle linear_product(const Eigen::MatrixXd& A);
  /// g(z) = sum_{|S| = degree} det(V_S V_S^T) z^S for rows v_1..v_m of V.
  /// The degree defaults to the column rank of V.
  static PolynomialOracle determinantal(const Eigen::MatrixXd& V,
                                        std::optional<int> degree = std::nullopt);
  /// g(z) = coeff * prod_j (sum_{i in P_j} z_i)^{b_j}; parts must be disjoint.
  static PolynomialOracle partition_power(int num_vars, std::vector<std::vector<int>> parts,
                                          std::vector<int> powers, double coeff = 1.0);
  static PolynomialOracle constant(int num_vars, double value);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  bool is_homogeneous() const { return homogeneous_; }
  bool is_multilinear() const { return multilinear_; }
  bool is_real_stable_asserted() const { return stable_; }
  PolyKind kind() const;

  /// g(z) for strictly positive z.
  double evaluate(const Eigen::VectorXd& z) const;
  /// log g(z) for strictly positive z; -inf when g(z) = 0.
  double log_evaluate(const Eigen::VectorXd& z) const;
  /// log g(e^u); entries of u may be -inf.
  double log_eval_at(const Eigen::VectorXd& u) const;
  /// Value and derivatives of log g(e^u). order 1 fills log_rel_grad/grad,
  /// order 2 additionally fills the Hessian.
  LogDerivatives log_derivatives(const Eigen::VectorXd& u, int order) const;

  /// dg/dz_i at w > 0 recovered from degree+1 evaluations along z_i by
  /// univariate interpolation. Requires a homogeneous polynomial.
  InterpolatedDerivative partial_derivative(int i, const Eigen::VectorXd& w) const;

  /// y -> g(x_1 y_1, ..., x_m y_m) for x >= 0.
  PolynomialOracle restrict_scale(const Eigen::VectorXd& x) const;

  const detail::PolyNode& node() const { return *node_; }

 private:
  PolynomialOracle() = default;

  std::shared_ptr<const detail::PolyNode> node_;
  int num_vars_ = 0;
  int degree_ = 0;
  bool homogeneous_ = true;
  bool multilinear_ = true;
  bool stable_ = false;

  friend PolynomialOracle product(const PolynomialOracle& a, const PolynomialOracle& b);
};

/// Pointwise product; degrees add and the stability flag is the AND of both.
PolynomialOracle product(const PolynomialOracle& a, const PolynomialOracle& b);

inline PolynomialOracle restrict_scale(const PolynomialOracle& g, const Eigen::VectorXd& x) {
  return g.restrict_scale(x);
}

// Kind payloads. These are what the reference module expands symbolically.

struct SparseTerms {
  std::vector<Term> terms;
};

struct ProductSpec {
  Eigen::MatrixXd A;
};

struct DeterminantalSpec {
  Eigen::MatrixXd V;      // as supplied
  Eigen::MatrixXd basis;  // m x rank, same row Gram determinants as V
  int degree = 0;
};

struct PartitionPowerSpec {
  std::vector<std::vector<int>> parts;
  std::vector<int> powers;
  double coeff = 1.0;
};

struct RestrictedSpec {
  PolynomialOracle base;
  Eigen::VectorXd scale;
};

struct ProductOfTwoSpec {
  PolynomialOracle left;
  PolynomialOracle right;
};

namespace detail {
struct PolyNode {
  std::variant<SparseTerms, ProductSpec, DeterminantalSpec, PartitionPowerSpec, RestrictedSpec,
               ProductOfTwoSpec>
      payload;
};
}  // namespace detail

/// log(exp(a) + exp(b)) tolerant of -inf operands.
double log_add_exp(double a, double b);

}  // namespace capcount
