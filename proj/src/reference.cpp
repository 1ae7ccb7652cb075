#include "capcount/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "capcount/error.hpp"

namespace capcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Poly = std::map<std::vector<int>, long double>;

long double eval_at(const PolynomialOracle& g, const Eigen::VectorXd& z) {
  Eigen::VectorXd u(z.size());
  for (int i = 0; i < z.size(); ++i) u[i] = z[i] > 0.0 ? std::log(z[i]) : kNegInf;
  const double lv = g.log_eval_at(u);
  return lv == kNegInf ? 0.0L : std::exp(static_cast<long double>(lv));
}

// Monomial coefficients through (nodes[k], values[k]) in extended precision.
std::vector<long double> solve_vandermonde_ld(const std::vector<long double>& nodes, std::vector<long double> v) {
  const std::size_t n = nodes.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = n; i > k; --i) v[i] = (v[i] - v[i - 1]) / (nodes[i] - nodes[i - k - 1]);
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t i = k; i < n; ++i) v[i] -= nodes[k] * v[i + 1];
  }
  return v;
}

Poly multiply(const Poly& a, const Poly& b, std::size_t max_terms) {
  Poly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out[e] += ca * cb;
      if (out.size() > max_terms) throw LimitError("expand: too many terms", static_cast<long long>(out.size()));
    }
  }
  return out;
}

Poly one(int m) { return Poly{{std::vector<int>(m, 0), 1.0L}}; }

Poly linear_form(const Eigen::VectorXd& coeffs) {
  const int m = static_cast<int>(coeffs.size());
  Poly out;
  for (int j = 0; j < m; ++j) {
    if (coeffs[j] == 0.0) continue;
    std::vector<int> e(m, 0);
    e[j] = 1;
    out[e] = coeffs[j];
  }
  return out;
}

Poly expand_node(const PolynomialOracle& g, std::size_t max_terms) {
  const int m = g.num_vars();
  const auto& payload = g.node().payload;
  if (const auto* p = std::get_if<SparseTerms>(&payload)) {
    Poly out;
    for (const auto& t : p->terms) out[t.exponents] += t.coeff;
    return out;
  }
  if (const auto* p = std::get_if<ProductSpec>(&payload)) {
    Poly out = one(m);
    for (int r = 0; r < p->A.rows(); ++r) out = multiply(out, linear_form(p->A.row(r).transpose()), max_terms);
    return out;
  }
  if (const auto* p = std::get_if<PartitionPowerSpec>(&payload)) {
    Poly out = one(m);
    for (std::size_t j = 0; j < p->parts.size(); ++j) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
      for (int i : p->parts[j]) c[i] = 1.0;
      const Poly lf = linear_form(c);
      for (int k = 0; k < p->powers[j]; ++k) out = multiply(out, lf, max_terms);
    }
    for (auto& [e, c] : out) c *= p->coeff;
    return out;
  }
  if (const auto* p = std::get_if<DeterminantalSpec>(&payload)) {
    // Cauchy-Binet: coefficient of z^S is det(V_S V_S^T).
    Poly out;
    const int n = p->degree;
    std::vector<int> mask(m, 0);
    std::fill(mask.begin(), mask.begin() + std::min(n, m), 1);
    do {
      IndexSet s;
      for (int i = 0; i < m; ++i) {
        if (mask[i]) s.push_back(i);
      }
      Eigen::MatrixXd rows(n, p->V.cols());
      for (int k = 0; k < n; ++k) rows.row(k) = p->V.row(s[k]);
      const double d = n == 0 ? 1.0 : (rows * rows.transpose()).determinant();
      if (d > 1e-13 * std::max(1.0, std::pow(p->V.squaredNorm(), n))) {
        out[mask] += d;
        if (out.size() > max_terms) throw LimitError("expand: too many terms", static_cast<long long>(out.size()));
      }
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return out;
  }
  if (const auto* p = std::get_if<RestrictedSpec>(&payload)) {
    Poly base = expand_node(p->base, max_terms), out;
    for (const auto& [e, c] : base) {
      long double s = c;
      for (int i = 0; i < m; ++i) {
        if (e[i] > 0) s *= std::pow(static_cast<long double>(p->scale[i]), e[i]);
      }
      if (s != 0.0L) out[e] += s;
    }
    return out;
  }
  if (const auto* p = std::get_if<ProductOfTwoSpec>(&payload)) {
    return multiply(expand_node(p->left, max_terms), expand_node(p->right, max_terms), max_terms);
  }
  throw UnsupportedError("expand: unknown polynomial kind");
}

}  // namespace

double coeff_extract(const PolynomialOracle& g, const std::vector<int>& alpha) {
  const int m = g.num_vars();
  if (static_cast<int>(alpha.size()) != m) throw DimensionError("coeff_extract: multi-index has wrong length");
  IndexSet support;
  int total = 0;
  bool square_free = true;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] < 0) throw DomainError("coeff_extract: negative exponent");
    if (alpha[i] > 0) support.push_back(i);
    square_free = square_free && alpha[i] <= 1;
    total += alpha[i];
  }
  if (total > g.degree()) return 0.0;
  const int k = static_cast<int>(support.size());

  if (square_free && g.is_homogeneous() && total == g.degree() && k <= 16) {
    long double sum = 0.0L;
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << k); ++mask) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
      int bits = 0;
      for (int j = 0; j < k; ++j) {
        if ((mask >> j) & 1) {
          z[support[j]] = 1.0;
          ++bits;
        }
      }
      const long double v = eval_at(g, z);
      sum += ((k - bits) % 2 == 0) ? v : -v;
    }
    return static_cast<double>(sum);
  }

  // Tensor interpolation over the support variables (all others zero).
  const int D = g.degree();
  long long points = 1;
  for (int j = 0; j < k; ++j) {
    points *= D + 1;
    if (points > 4000000) throw LimitError("coeff_extract: interpolation grid too large", points);
  }
  std::vector<long double> nodes(D + 1);
  for (int t = 0; t <= D; ++t) nodes[t] = t + 1.0L;
  std::vector<long double> grid(static_cast<std::size_t>(points));
  std::vector<int> idx(k, 0);
  for (long long p = 0; p < points; ++p) {
    long long rest = p;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < k; ++j) {
      idx[j] = static_cast<int>(rest % (D + 1));
      rest /= D + 1;
      z[support[j]] = static_cast<double>(nodes[idx[j]]);
    }
    grid[static_cast<std::size_t>(p)] = eval_at(g, z);
  }
  // Solve along each axis in turn; axis j has stride (D+1)^j.
  long long stride = 1;
  for (int j = 0; j < k; ++j, stride *= D + 1) {
    for (long long base = 0; base < points; ++base) {
      if ((base / stride) % (D + 1) != 0) continue;
      std::vector<long double> line(D + 1);
      for (int t = 0; t <= D; ++t) line[t] = grid[static_cast<std::size_t>(base + t * stride)];
      line = solve_vandermonde_ld(nodes, line);
      for (int t = 0; t <= D; ++t) grid[static_cast<std::size_t>(base + t * stride)] = line[t];
    }
  }
  long long pos = 0;
  stride = 1;
  for (int j = 0; j < k; ++j, stride *= D + 1) {
    if (alpha[support[j]] > D) return 0.0;
    pos += alpha[support[j]] * stride;
  }
  return static_cast<double>(grid[static_cast<std::size_t>(pos)]);
}

double coeff_extract_set(const PolynomialOracle& g, const IndexSet& s) {
  std::vector<int> alpha(g.num_vars(), 0);
  for (int i : s) {
    if (i < 0 || i >= g.num_vars()) throw DomainError("coeff_extract_set: index out of range");
    alpha[i] += 1;
  }
  return coeff_extract(g, alpha);
}

std::vector<Term> expand(const PolynomialOracle& g, std::size_t max_terms) {
  std::vector<Term> out;
  for (const auto& [e, c] : expand_node(g, max_terms)) {
    if (c != 0.0L) out.push_back({e, static_cast<double>(c)});
  }
  return out;
}

double coeff_sum_brute(const PolynomialOracle& g, const MatroidSpec& mat) {
  if (g.num_vars() != mat.m()) throw DimensionError("coeff_sum_brute: polynomial and family sizes differ");
  long double total = 0.0L;
  for (const auto& s : enumerate_bases(mat)) total += coeff_extract_set(g, s);
  return static_cast<double>(total);
}

double max_coeff_brute(const PolynomialOracle& g, const MatroidSpec& mat) {
  if (g.num_vars() != mat.m()) throw DimensionError("max_coeff_brute: polynomial and family sizes differ");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : enumerate_bases(mat)) best = std::max(best, coeff_extract_set(g, s));
  return best;
}

double permanent(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw DimensionError("permanent: matrix must be square");
  const int n = static_cast<int>(A.rows());
  if (n > 10) throw LimitError("permanent: brute force limited to 10 x 10", n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  long double total = 0.0L;
  do {
    long double p = 1.0L;
    for (int i = 0; i < n; ++i) p *= A(i, perm[i]);
    total += p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(total);
}

double grid_cap_oracle(const PolynomialOracle& g, const MatroidSpec& mat, int resolution, long long max_points) {
  const int m = mat.m();
  const int n = mat.n();
  if (g.num_vars() != m) throw DimensionError("grid_cap_oracle: polynomial and family sizes differ");
  if (m > 8) throw LimitError("grid_cap_oracle: limited to m <= 8", m);
  if (!g.is_homogeneous() || g.degree() != n) throw DomainError("grid_cap_oracle: needs degree equal to rank");
  if (n == 0) return std::exp(g.log_eval_at(Eigen::VectorXd::Zero(m)));

  // Along y + t*1 the best feasible point has min_S y(S) = 0, where the log
  // value is f(y) - min_S y(S).
  auto h = [&](const Eigen::VectorXd& y) { return g.log_eval_at(y) - min_weight_base(mat, y).weight; };

  const int free = m - 1;
  int per_axis = std::max(3, resolution);
  if (free > 0) {
    const int cap_axis = static_cast<int>(std::floor(std::pow(static_cast<double>(max_points), 1.0 / free)));
    per_axis = std::min(per_axis, std::max(3, cap_axis));
  }
  if (per_axis % 2 == 0) per_axis += (per_axis + 1 <= resolution + 1 ? 1 : -1);
  const double lo = -4.0, step = 8.0 / (per_axis - 1);

  Eigen::VectorXd best_y = Eigen::VectorXd::Zero(m);
  double best = h(best_y);
  long long total = 1;
  for (int j = 0; j < free; ++j) total *= per_axis;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  for (long long p = 0; p < total; ++p) {
    long long rest = p;
    for (int j = 0; j < free; ++j) {
      y[j] = lo + step * static_cast<double>(rest % per_axis);
      rest /= per_axis;
    }
    const double v = h(y);
    if (v < best) {
      best = v;
      best_y = y;
    }
  }

  // Coordinate descent with golden-section line searches.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double width = 2.0 * step;
  for (int sweep = 0; sweep < 200; ++sweep) {
    const double before = best;
    for (int j = 0; j < free; ++j) {
      double a = best_y[j] - width, b = best_y[j] + width;
      auto at = [&](double t) {
        Eigen::VectorXd q = best_y;
        q[j] = t;
        return h(q);
      };
      double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
      double f1 = at(c1), f2 = at(c2);
      for (int k = 0; k < 60; ++k) {
        if (f1 > f2) {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + phi * (b - a);
          f2 = at(c2);
        } else {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - phi * (b - a);
          f1 = at(c1);
        }
      }
      const double t = 0.5 * (a + b);
      const double v = at(t);
      if (v < best) {
        best = v;
        best_y[j] = t;
      }
    }
    if (before - best < 1e-13) {
      width *= 0.5;
      if (width < 1e-9) break;
    }
  }
  return std::exp(best);
}

}  // namespace capcount
