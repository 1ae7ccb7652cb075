#include "capcount/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "capcount/error.hpp"
#include "capcount/interpolation.hpp"

namespace capcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// log-sum-exp of the entries in `xs` (ignores -inf).
double log_sum_exp(const std::vector<double>& xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) {
    if (x != kNegInf) s += std::exp(x - hi);
  }
  return hi + std::log(s);
}

LogDerivatives empty_derivs(int m, double log_value, int order) {
  LogDerivatives d;
  d.log_value = log_value;
  if (order >= 1) {
    d.log_rel_grad = Eigen::VectorXd::Constant(m, kNegInf);
    d.grad = Eigen::VectorXd::Zero(m);
  }
  if (order >= 2) d.hessian = Eigen::MatrixXd::Zero(m, m);
  return d;
}

// ---------------------------------------------------------------- sparse

double sparse_value(const SparseTerms& p, const Eigen::VectorXd& u) {
  std::vector<double> logs;
  logs.reserve(p.terms.size());
  for (const auto& t : p.terms) {
    double s = std::log(t.coeff);
    for (std::size_t j = 0; j < t.exponents.size(); ++j) {
      if (t.exponents[j] != 0) s += t.exponents[j] * u[j];
    }
    logs.push_back(s);
  }
  return log_sum_exp(logs);
}

LogDerivatives sparse_derivs(const SparseTerms& p, const Eigen::VectorXd& u, int order) {
  const int m = static_cast<int>(u.size());
  std::vector<double> logs;
  logs.reserve(p.terms.size());
  for (const auto& t : p.terms) {
    double s = std::log(t.coeff);
    for (int j = 0; j < m; ++j) {
      if (t.exponents[j] != 0) s += t.exponents[j] * u[j];
    }
    logs.push_back(s);
  }
  const double lv = log_sum_exp(logs);
  LogDerivatives d = empty_derivs(m, lv, order);
  if (order < 1 || lv == kNegInf) return d;

  Eigen::VectorXd weights(static_cast<int>(logs.size()));
  for (std::size_t k = 0; k < logs.size(); ++k) weights[k] = std::exp(logs[k] - lv);
  for (std::size_t k = 0; k < p.terms.size(); ++k) {
    for (int j = 0; j < m; ++j) d.grad[j] += weights[k] * p.terms[k].exponents[j];
  }
  for (int i = 0; i < m; ++i) {
    std::vector<double> parts;
    for (const auto& t : p.terms) {
      if (t.exponents[i] == 0) continue;
      double s = std::log(t.coeff * t.exponents[i]);
      for (int j = 0; j < m; ++j) {
        const int e = t.exponents[j] - (j == i ? 1 : 0);
        if (e != 0) s += e * u[j];
      }
      parts.push_back(s);
    }
    d.log_rel_grad[i] = log_sum_exp(parts) - lv;
  }
  if (order >= 2) {
    for (std::size_t k = 0; k < p.terms.size(); ++k) {
      if (weights[k] == 0.0) continue;
      for (int a = 0; a < m; ++a) {
        const int ea = p.terms[k].exponents[a];
        if (ea == 0) continue;
        for (int b = 0; b < m; ++b) d.hessian(a, b) += weights[k] * ea * p.terms[k].exponents[b];
      }
    }
    d.hessian -= d.grad * d.grad.transpose();
  }
  return d;
}

// ---------------------------------------------------------------- product

// Row log-sums s_r = log sum_j A_rj e^{u_j}.
std::vector<double> row_log_sums(const Eigen::MatrixXd& A, const Eigen::VectorXd& u) {
  std::vector<double> rows(A.rows());
  std::vector<double> buf;
  for (int r = 0; r < A.rows(); ++r) {
    buf.clear();
    for (int j = 0; j < A.cols(); ++j) {
      if (A(r, j) > 0.0) buf.push_back(std::log(A(r, j)) + u[j]);
    }
    rows[r] = log_sum_exp(buf);
  }
  return rows;
}

double product_value(const ProductSpec& p, const Eigen::VectorXd& u) {
  double total = 0.0;
  for (double s : row_log_sums(p.A, u)) {
    if (s == kNegInf) return kNegInf;
    total += s;
  }
  return total;
}

LogDerivatives product_derivs(const ProductSpec& p, const Eigen::VectorXd& u, int order) {
  const int m = static_cast<int>(u.size());
  const auto rows = row_log_sums(p.A, u);
  double lv = 0.0;
  for (double s : rows) lv = (s == kNegInf || lv == kNegInf) ? kNegInf : lv + s;
  LogDerivatives d = empty_derivs(m, lv, order);
  if (order < 1 || lv == kNegInf) return d;
  std::vector<std::vector<double>> rel(m);
  Eigen::VectorXd prob(m);
  for (int r = 0; r < p.A.rows(); ++r) {
    for (int j = 0; j < m; ++j) {
      prob[j] = p.A(r, j) > 0.0 ? std::exp(std::log(p.A(r, j)) + u[j] - rows[r]) : 0.0;
      if (p.A(r, j) > 0.0) rel[j].push_back(std::log(p.A(r, j)) - rows[r]);
    }
    d.grad += prob;
    if (order >= 2) {
      d.hessian.diagonal() += prob;
      d.hessian -= prob * prob.transpose();
    }
  }
  for (int j = 0; j < m; ++j) d.log_rel_grad[j] = log_sum_exp(rel[j]);
  return d;
}

// ---------------------------------------------------------- partition power

double part_log_sum(const std::vector<int>& part, const Eigen::VectorXd& u) {
  std::vector<double> buf;
  buf.reserve(part.size());
  for (int i : part) buf.push_back(u[i]);
  return log_sum_exp(buf);
}

double partition_value(const PartitionPowerSpec& p, const Eigen::VectorXd& u) {
  double total = std::log(p.coeff);
  for (std::size_t j = 0; j < p.parts.size(); ++j) {
    if (p.powers[j] == 0) continue;
    const double s = part_log_sum(p.parts[j], u);
    if (s == kNegInf) return kNegInf;
    total += p.powers[j] * s;
  }
  return total;
}

LogDerivatives partition_derivs(const PartitionPowerSpec& p, const Eigen::VectorXd& u,
                                int order) {
  const int m = static_cast<int>(u.size());
  LogDerivatives d = empty_derivs(m, partition_value(p, u), order);
  if (order < 1 || d.log_value == kNegInf) return d;
  for (std::size_t j = 0; j < p.parts.size(); ++j) {
    const int b = p.powers[j];
    if (b == 0) continue;
    const double s = part_log_sum(p.parts[j], u);
    Eigen::VectorXd prob = Eigen::VectorXd::Zero(m);
    for (int i : p.parts[j]) {
      prob[i] = std::exp(u[i] - s);
      d.log_rel_grad[i] = std::log(static_cast<double>(b)) - s;
    }
    d.grad += b * prob;
    if (order >= 2) {
      d.hessian.diagonal() += b * prob;
      d.hessian -= b * (prob * prob.transpose());
    }
  }
  return d;
}

// ------------------------------------------------------------ determinantal

// log e_j(lambda) for j = 0..n from log eigenvalues, skipping index `skip`.
std::vector<double> log_elementary(const std::vector<double>& log_lambda, int n, int skip) {
  std::vector<double> le(n + 1, kNegInf);
  le[0] = 0.0;
  int used = 0;
  for (int k = 0; k < static_cast<int>(log_lambda.size()); ++k) {
    if (k == skip) continue;
    ++used;
    for (int j = std::min(used, n); j >= 1; --j) le[j] = log_add_exp(le[j], le[j - 1] + log_lambda[k]);
  }
  return le;
}

struct DetSpectrum {
  double log_value = kNegInf;
  std::vector<double> log_lambda;  // eigenvalues of V^T Z V
  Eigen::MatrixXd left;            // left singular vectors of Z^{1/2} V (m x r)
  Eigen::MatrixXd right;           // eigenvectors of V^T Z V (r x r)
};

DetSpectrum det_spectrum(const DeterminantalSpec& p, const Eigen::VectorXd& u, bool vectors) {
  DetSpectrum out;
  const int m = static_cast<int>(p.basis.rows());
  const int r = static_cast<int>(p.basis.cols());
  if (r < p.degree || r == 0) return out;  // identically zero
  double umax = kNegInf;
  for (int i = 0; i < m; ++i) umax = std::max(umax, u[i]);
  if (umax == kNegInf) return out;
  // Rows sorted by decreasing scaled norm keep the SVD accurate on graded inputs.
  Eigen::MatrixXd scaled(m, r);
  for (int i = 0; i < m; ++i) scaled.row(i) = std::exp(0.5 * (u[i] - umax)) * p.basis.row(i);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd norms = scaled.rowwise().norm();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return norms[a] > norms[b]; });
  Eigen::MatrixXd sorted(m, r);
  for (int i = 0; i < m; ++i) sorted.row(i) = scaled.row(order[i]);

  // Column-pivoted QR, then one-sided Jacobi on R^T. Unlike a two-sided SVD
  // this keeps the small singular values of strongly graded rows accurate.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sorted);
  const Eigen::MatrixXd R = qr.matrixR().topRows(r).triangularView<Eigen::Upper>();
  Eigen::MatrixXd W = R.transpose();
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(r, r);
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (int a = 0; a + 1 < r; ++a) {
      for (int b = a + 1; b < r; ++b) {
        const double aa = W.col(a).squaredNorm(), bb = W.col(b).squaredNorm(), ab = W.col(a).dot(W.col(b));
        if (ab == 0.0 || std::abs(ab) <= 1e-16 * std::sqrt(aa * bb)) continue;
        rotated = true;
        const double zeta = (bb - aa) / (2.0 * ab);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), sn = c * t;
        const Eigen::VectorXd wa = W.col(a), ja = J.col(a);
        W.col(a) = c * wa - sn * W.col(b);
        W.col(b) = sn * wa + c * W.col(b);
        J.col(a) = c * ja - sn * J.col(b);
        J.col(b) = sn * ja + c * J.col(b);
      }
    }
    if (!rotated) break;
  }
  Eigen::VectorXd sigma(r);
  for (int k = 0; k < r; ++k) sigma[k] = W.col(k).norm();
  out.log_lambda.resize(r);
  for (int k = 0; k < r; ++k) out.log_lambda[k] = 2.0 * safe_log(sigma[k]) + umax;
  out.log_value = log_elementary(out.log_lambda, p.degree, -1)[p.degree];
  if (vectors) {
    // sorted * P = Q R and R^T J = W, so sorted = (Q J) diag(sigma) (P W / sigma)^T.
    const Eigen::MatrixXd U = (qr.householderQ() * Eigen::MatrixXd::Identity(m, r)) * J;
    out.left.resize(m, r);
    for (int i = 0; i < m; ++i) out.left.row(order[i]) = U.row(i);
    Eigen::MatrixXd right = Eigen::MatrixXd::Zero(r, r);
    std::vector<int> null_cols;
    for (int k = 0; k < r; ++k) {
      if (sigma[k] > 0.0) {
        right.col(k) = W.col(k) / sigma[k];
      } else {
        null_cols.push_back(k);
      }
    }
    if (!null_cols.empty()) {
      // Orthonormal completion for the null directions.
      std::vector<int> live;
      for (int k = 0; k < r; ++k) {
        if (sigma[k] > 0.0) live.push_back(k);
      }
      Eigen::MatrixXd basis(r, static_cast<int>(live.size()));
      for (std::size_t k = 0; k < live.size(); ++k) basis.col(static_cast<int>(k)) = right.col(live[k]);
      const Eigen::MatrixXd full = Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ();
      for (std::size_t k = 0; k < null_cols.size(); ++k) right.col(null_cols[k]) = full.col(static_cast<int>(live.size() + k));
    }
    out.right = qr.colsPermutation() * right;
  }
  return out;
}

double det_value(const DeterminantalSpec& p, const Eigen::VectorXd& u) {
  if (p.degree == 0) return 0.0;
  return det_spectrum(p, u, false).log_value;
}

// Gradient part shared by the analytic and finite-difference Hessian paths.
void det_first_order(const DeterminantalSpec& p, const DetSpectrum& s, LogDerivatives& d) {
  const int m = static_cast<int>(p.basis.rows());
  const int r = static_cast<int>(p.basis.cols());
  const int n = p.degree;
  // log of e_{n-1}(lambda without k) / e_n(lambda)
  std::vector<double> ratio(r);
  for (int k = 0; k < r; ++k) ratio[k] = log_elementary(s.log_lambda, n - 1, k)[n - 1] - s.log_value;
  for (int i = 0; i < m; ++i) {
    double g = 0.0;
    std::vector<double> parts;
    for (int k = 0; k < r; ++k) {
      const double incl = s.log_lambda[k] + ratio[k];
      if (incl != kNegInf) g += s.left(i, k) * s.left(i, k) * std::exp(incl);
      const double proj = p.basis.row(i).dot(s.right.col(k));
      if (proj != 0.0 && ratio[k] != kNegInf) parts.push_back(2.0 * std::log(std::abs(proj)) + ratio[k]);
    }
    d.grad[i] = g;
    d.log_rel_grad[i] = log_sum_exp(parts);
  }
}

LogDerivatives det_derivs(const DeterminantalSpec& p, const Eigen::VectorXd& u, int order) {
  const int m = static_cast<int>(u.size());
  if (p.degree == 0) {
    LogDerivatives d = empty_derivs(m, 0.0, order);
    return d;
  }
  const DetSpectrum s = det_spectrum(p, u, order >= 1);
  LogDerivatives d = empty_derivs(m, s.log_value, order);
  if (order < 1 || s.log_value == kNegInf) return d;
  det_first_order(p, s, d);
  if (order < 2) return d;
  const int r = static_cast<int>(p.basis.cols());
  if (p.degree == r) {
    const Eigen::MatrixXd proj = s.left * s.left.transpose();
    d.hessian = -proj.cwiseProduct(proj);
    d.hessian.diagonal() += proj.diagonal();
    return d;
  }
  // General degree: central differences of the analytic gradient.
  const double h = 1e-5;
  for (int j = 0; j < m; ++j) {
    if (!std::isfinite(u[j])) continue;
    Eigen::VectorXd up = u, dn = u;
    up[j] += h;
    dn[j] -= h;
    LogDerivatives a = empty_derivs(m, 0.0, 1), b = empty_derivs(m, 0.0, 1);
    const DetSpectrum sa = det_spectrum(p, up, true), sb = det_spectrum(p, dn, true);
    a.log_value = sa.log_value;
    b.log_value = sb.log_value;
    det_first_order(p, sa, a);
    det_first_order(p, sb, b);
    d.hessian.col(j) = (a.grad - b.grad) / (2.0 * h);
  }
  d.hessian = 0.5 * (d.hessian + d.hessian.transpose()).eval();
  return d;
}

// --------------------------------------------------------------- composite

Eigen::VectorXd shifted(const Eigen::VectorXd& u, const Eigen::VectorXd& scale) {
  Eigen::VectorXd out(u.size());
  for (int i = 0; i < u.size(); ++i) out[i] = scale[i] > 0.0 ? u[i] + std::log(scale[i]) : kNegInf;
  return out;
}

double node_value(const detail::PolyNode& node, const Eigen::VectorXd& u);
LogDerivatives node_derivs(const detail::PolyNode& node, const Eigen::VectorXd& u, int order);

double node_value(const detail::PolyNode& node, const Eigen::VectorXd& u) {
  return std::visit(
      Overloaded{
          [&](const SparseTerms& p) { return sparse_value(p, u); },
          [&](const ProductSpec& p) { return product_value(p, u); },
          [&](const DeterminantalSpec& p) { return det_value(p, u); },
          [&](const PartitionPowerSpec& p) { return partition_value(p, u); },
          [&](const RestrictedSpec& p) { return p.base.log_eval_at(shifted(u, p.scale)); },
          [&](const ProductOfTwoSpec& p) {
            const double a = p.left.log_eval_at(u);
            if (a == kNegInf) return kNegInf;
            const double b = p.right.log_eval_at(u);
            return b == kNegInf ? kNegInf : a + b;
          },
      },
      node.payload);
}

LogDerivatives node_derivs(const detail::PolyNode& node, const Eigen::VectorXd& u, int order) {
  return std::visit(
      Overloaded{
          [&](const SparseTerms& p) { return sparse_derivs(p, u, order); },
          [&](const ProductSpec& p) { return product_derivs(p, u, order); },
          [&](const DeterminantalSpec& p) { return det_derivs(p, u, order); },
          [&](const PartitionPowerSpec& p) { return partition_derivs(p, u, order); },
          [&](const RestrictedSpec& p) {
            LogDerivatives d = p.base.log_derivatives(shifted(u, p.scale), order);
            if (order >= 1) {
              for (int i = 0; i < u.size(); ++i) {
                d.log_rel_grad[i] = p.scale[i] > 0.0 ? d.log_rel_grad[i] + std::log(p.scale[i]) : kNegInf;
              }
            }
            return d;
          },
          [&](const ProductOfTwoSpec& p) {
            LogDerivatives a = p.left.log_derivatives(u, order);
            const LogDerivatives b = p.right.log_derivatives(u, order);
            a.log_value = (a.log_value == kNegInf || b.log_value == kNegInf) ? kNegInf
                                                                             : a.log_value + b.log_value;
            if (order >= 1) {
              a.grad += b.grad;
              for (int i = 0; i < u.size(); ++i) a.log_rel_grad[i] = log_add_exp(a.log_rel_grad[i], b.log_rel_grad[i]);
            }
            if (order >= 2) a.hessian += b.hessian;
            return a;
          },
      },
      node.payload);
}

void check_point(const Eigen::VectorXd& z, int m, const char* op) {
  if (z.size() != m) {
    throw DimensionError(std::string(op) + ": expected " + std::to_string(m) + " coordinates, got " +
                         std::to_string(z.size()));
  }
  for (int i = 0; i < m; ++i) {
    if (!(z[i] > 0.0) || !std::isfinite(z[i])) {
      throw DomainError(std::string(op) + ": coordinate " + std::to_string(i) + " must be positive and finite");
    }
  }
}

}  // namespace

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::string to_string(PolyKind kind) {
  switch (kind) {
    case PolyKind::Sparse: return "sparse";
    case PolyKind::Product: return "product";
    case PolyKind::Determinantal: return "determinantal";
    case PolyKind::PartitionPower: return "partition_power";
    case PolyKind::Restricted: return "restricted";
    case PolyKind::ProductOfTwo: return "product_of_two";
  }
  return "unknown";
}

PolynomialOracle PolynomialOracle::sparse(int num_vars, std::vector<Term> terms,
                                          bool assert_real_stable) {
  if (num_vars <= 0) throw DomainError("sparse polynomial: number of variables must be positive");
  std::map<std::vector<int>, double> merged;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    auto& t = terms[k];
    if (static_cast<int>(t.exponents.size()) != num_vars) {
      throw DimensionError("sparse polynomial: term " + std::to_string(k) + " has " +
                           std::to_string(t.exponents.size()) + " exponents, expected " +
                           std::to_string(num_vars));
    }
    if (!(t.coeff >= 0.0) || !std::isfinite(t.coeff)) {
      throw DomainError("sparse polynomial: term " + std::to_string(k) + " has a negative or non-finite coefficient");
    }
    for (int e : t.exponents) {
      if (e < 0) throw DomainError("sparse polynomial: negative exponent in term " + std::to_string(k));
    }
    if (t.coeff > 0.0) merged[t.exponents] += t.coeff;
  }
  if (merged.empty()) throw DomainError("sparse polynomial: no positive coefficients");

  SparseTerms payload;
  PolynomialOracle g;
  g.num_vars_ = num_vars;
  int lo = std::numeric_limits<int>::max(), hi = 0;
  for (auto& [exps, c] : merged) {
    const int deg = std::accumulate(exps.begin(), exps.end(), 0);
    lo = std::min(lo, deg);
    hi = std::max(hi, deg);
    for (int e : exps) g.multilinear_ = g.multilinear_ && e <= 1;
    payload.terms.push_back({exps, c});
  }
  g.degree_ = hi;
  g.homogeneous_ = lo == hi;
  g.stable_ = assert_real_stable;
  g.node_ = std::make_shared<detail::PolyNode>(detail::PolyNode{std::move(payload)});
  return g;
}

PolynomialOracle PolynomialOracle::constant(int num_vars, double value) {
  return sparse(num_vars, {Term{std::vector<int>(num_vars, 0), value}}, true);
}

PolynomialOracle PolynomialOracle::linear_product(const Eigen::MatrixXd& A) {
  if (A.cols() <= 0) throw DomainError("product polynomial: matrix needs at least one column");
  for (int r = 0; r < A.rows(); ++r) {
    bool any = false;
    for (int j = 0; j < A.cols(); ++j) {
      if (!(A(r, j) >= 0.0) || !std::isfinite(A(r, j))) {
        throw DomainError("product polynomial: entry (" + std::to_string(r) + "," + std::to_string(j) +
                          ") must be nonnegative and finite");
      }
      any = any || A(r, j) > 0.0;
    }
    if (!any) throw DomainError("product polynomial: row " + std::to_string(r) + " is identically zero");
  }
  PolynomialOracle g;
  g.num_vars_ = static_cast<int>(A.cols());
  g.degree_ = static_cast<int>(A.rows());
  g.homogeneous_ = true;
  g.stable_ = true;
  for (int j = 0; j < A.cols(); ++j) g.multilinear_ = g.multilinear_ && (A.col(j).array() > 0.0).count() <= 1;
  g.node_ = std::make_shared<detail::PolyNode>(detail::PolyNode{ProductSpec{A}});
  return g;
}

PolynomialOracle PolynomialOracle::determinantal(const Eigen::MatrixXd& V, std::optional<int> degree) {
  if (V.rows() <= 0) throw DomainError("determinantal polynomial: matrix needs at least one row");
  if (!V.allFinite()) throw DomainError("determinantal polynomial: non-finite entry");
  DeterminantalSpec spec;
  spec.V = V;
  int rank = 0;
  if (V.cols() > 0 && V.norm() > 0.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double tol = s[0] * 1e-10 * std::max(V.rows(), V.cols());
    for (int k = 0; k < s.size(); ++k) rank += s[k] > tol ? 1 : 0;
    // Rotating the columns keeps every row Gram determinant.
    spec.basis = V * svd.matrixV().leftCols(rank);
  } else {
    spec.basis = Eigen::MatrixXd::Zero(V.rows(), 0);
  }
  spec.degree = degree.value_or(rank);
  if (spec.degree < 0) throw DomainError("determinantal polynomial: negative degree");
  if (spec.degree > V.rows()) throw DomainError("determinantal polynomial: degree exceeds number of rows");

  PolynomialOracle g;
  g.num_vars_ = static_cast<int>(V.rows());
  g.degree_ = spec.degree;
  g.homogeneous_ = true;
  g.multilinear_ = true;
  g.stable_ = true;
  if (spec.degree > rank) {
    // Every minor of order `degree` vanishes: keep a zero-column basis so
    // evaluation returns log 0.
    spec.basis = Eigen::MatrixXd::Zero(V.rows(), 0);
  }
  g.node_ = std::make_shared<detail::PolyNode>(detail::PolyNode{std::move(spec)});
  return g;
}

PolynomialOracle PolynomialOracle::partition_power(int num_vars, std::vector<std::vector<int>> parts,
                                                   std::vector<int> powers, double coeff) {
  if (num_vars <= 0) throw DomainError("partition power: number of variables must be positive");
  if (parts.size() != powers.size()) throw DimensionError("partition power: parts and powers differ in length");
  if (!(coeff > 0.0) || !std::isfinite(coeff)) throw DomainError("partition power: coefficient must be positive");
  std::vector<int> owner(num_vars, -1);
  PolynomialOracle g;
  g.num_vars_ = num_vars;
  g.degree_ = 0;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (powers[j] < 0) throw DomainError("partition power: negative power for part " + std::to_string(j));
    if (parts[j].empty() && powers[j] > 0) throw DomainError("partition power: empty part " + std::to_string(j));
    std::sort(parts[j].begin(), parts[j].end());
    for (int i : parts[j]) {
      if (i < 0 || i >= num_vars) throw DomainError("partition power: index out of range in part " + std::to_string(j));
      if (owner[i] != -1) throw DomainError("partition power: parts overlap at variable " + std::to_string(i));
      owner[i] = static_cast<int>(j);
    }
    g.degree_ += powers[j];
    g.multilinear_ = g.multilinear_ && powers[j] <= 1;
  }
  g.homogeneous_ = true;
  g.stable_ = true;
  g.node_ = std::make_shared<detail::PolyNode>(
      detail::PolyNode{PartitionPowerSpec{std::move(parts), std::move(powers), coeff}});
  return g;
}

PolyKind PolynomialOracle::kind() const {
  return static_cast<PolyKind>(node_->payload.index());
}

double PolynomialOracle::log_eval_at(const Eigen::VectorXd& u) const {
  if (u.size() != num_vars_) throw DimensionError("log_eval_at: dimension mismatch");
  return node_value(*node_, u);
}

LogDerivatives PolynomialOracle::log_derivatives(const Eigen::VectorXd& u, int order) const {
  if (u.size() != num_vars_) throw DimensionError("log_derivatives: dimension mismatch");
  return node_derivs(*node_, u, order);
}

double PolynomialOracle::log_evaluate(const Eigen::VectorXd& z) const {
  check_point(z, num_vars_, "evaluate");
  return node_value(*node_, z.array().log().matrix());
}

double PolynomialOracle::evaluate(const Eigen::VectorXd& z) const { return std::exp(log_evaluate(z)); }

InterpolatedDerivative PolynomialOracle::partial_derivative(int i, const Eigen::VectorXd& w) const {
  check_point(w, num_vars_, "partial_derivative");
  if (i < 0 || i >= num_vars_) throw DomainError("partial_derivative: variable index out of range");
  if (!homogeneous_) throw DomainError("partial_derivative: polynomial must be homogeneous");
  InterpolatedDerivative out;
  const int n = degree_;
  if (n == 0) {
    out.condition = 1.0;
    return out;
  }
  // Pick the geometric ratio with the best conditioned node set.
  std::vector<double> best_nodes;
  out.condition = std::numeric_limits<double>::infinity();
  for (double ratio : {1.25, 1.5, 1.75, 2.0}) {
    std::vector<double> nodes(n + 1);
    for (int k = 0; k <= n; ++k) nodes[k] = std::pow(ratio, k);
    const double cond = vandermonde_condition(nodes);
    if (cond < out.condition) {
      out.condition = cond;
      out.ratio = ratio;
      best_nodes = nodes;
    }
  }
  if (out.condition > 1e12) {
    throw ConditioningError("partial_derivative: interpolation nodes too ill-conditioned", out.condition);
  }
  const double base = log_evaluate(w);
  if (base == -std::numeric_limits<double>::infinity()) return out;
  std::vector<double> values(n + 1);
  Eigen::VectorXd u = w.array().log().matrix();
  for (int k = 0; k <= n; ++k) {
    Eigen::VectorXd uk = u;
    uk[i] += std::log(best_nodes[k]);
    values[k] = std::exp(node_value(*node_, uk) - base);
  }
  const auto coeffs = vandermonde_solve(best_nodes, std::move(values));
  double slope = 0.0;
  for (int k = 1; k <= n; ++k) slope += k * coeffs[k];
  out.value = std::exp(base) * slope / w[i];
  return out;
}

PolynomialOracle PolynomialOracle::restrict_scale(const Eigen::VectorXd& x) const {
  if (x.size() != num_vars_) throw DimensionError("restrict_scale: dimension mismatch");
  for (int i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || !std::isfinite(x[i])) throw DomainError("restrict_scale: scale must be nonnegative and finite");
  }
  PolynomialOracle g = *this;
  g.node_ = std::make_shared<detail::PolyNode>(detail::PolyNode{RestrictedSpec{*this, x}});
  return g;
}

PolynomialOracle product(const PolynomialOracle& a, const PolynomialOracle& b) {
  if (a.num_vars() != b.num_vars()) throw DimensionError("product: polynomials have different variable counts");
  PolynomialOracle g;
  g.num_vars_ = a.num_vars();
  g.degree_ = a.degree() + b.degree();
  g.homogeneous_ = a.is_homogeneous() && b.is_homogeneous();
  g.stable_ = a.is_real_stable_asserted() && b.is_real_stable_asserted();
  // Conservative: a product of multilinear factors is multilinear only when
  // one side is constant.
  g.multilinear_ = (a.is_multilinear() && b.degree() == 0) || (b.is_multilinear() && a.degree() == 0);
  g.node_ = std::make_shared<detail::PolyNode>(detail::PolyNode{ProductOfTwoSpec{a, b}});
  return g;
}

}  // namespace capcount
