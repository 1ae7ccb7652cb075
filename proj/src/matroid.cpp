#include "capcount/matroid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "capcount/error.hpp"

namespace capcount {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

constexpr double kRankTol = 1e-9;

int numeric_rank(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(kRankTol);
  return static_cast<int>(qr.rank());
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& V, const IndexSet& rows) {
  Eigen::MatrixXd out(static_cast<int>(rows.size()), V.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<int>(k)) = V.row(rows[k]);
  return out;
}

std::uint64_t to_mask(const IndexSet& s) {
  std::uint64_t mask = 0;
  for (int i : s) mask |= std::uint64_t{1} << i;
  return mask;
}

void check_index_set(const IndexSet& s, int m, const std::string& what) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 0 || s[k] >= m) throw DomainError(what + ": index " + std::to_string(s[k]) + " out of range");
    if (k > 0 && s[k] == s[k - 1]) throw DomainError(what + ": repeated index " + std::to_string(s[k]));
  }
}

// Orthonormal basis of the orthogonal complement of the column space of V.
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& V) {
  const int m = static_cast<int>(V.rows());
  const int r = static_cast<int>(V.cols());
  if (r == 0) return Eigen::MatrixXd::Identity(m, m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(m - r);
}

double gram_det(const Eigen::MatrixXd& V, const IndexSet& s) {
  if (s.empty()) return 1.0;
  const Eigen::MatrixXd rows = select_rows(V, s);
  return (rows * rows.transpose()).determinant();
}

// Wolfe's minimum-norm-point algorithm for conv(vertices) - x, with the
// vertices accessed only through a linear minimization oracle.
Eigen::VectorXd min_norm_point(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& lmo,
                               const Eigen::VectorXd& x, double tol) {
  std::vector<Eigen::VectorXd> pts{lmo(x) - x};
  std::vector<double> lambda{1.0};
  Eigen::VectorXd p = pts[0];
  for (int iter = 0; iter < 1000; ++iter) {
    const Eigen::VectorXd q = lmo(p) - x;
    if (p.squaredNorm() - p.dot(q) <= tol * tol * 1e-2 || p.norm() <= tol * 1e-3) break;
    bool dup = false;
    for (const auto& s : pts) dup = dup || (s - q).squaredNorm() == 0.0;
    if (dup) break;
    pts.push_back(q);
    lambda.push_back(0.0);
    for (int minor = 0; minor < 1000; ++minor) {
      // Affine minimizer of the norm over the current corral.
      const int k = static_cast<int>(pts.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) kkt(i, j) = pts[i].dot(pts[j]);
        kkt(i, k) = kkt(k, i) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs[k] = 1.0;
      const Eigen::VectorXd mu = kkt.completeOrthogonalDecomposition().solve(rhs).head(k);
      if (mu.minCoeff() > 1e-12) {
        for (int i = 0; i < k; ++i) lambda[i] = mu[i];
        break;
      }
      double theta = 1.0;
      for (int i = 0; i < k; ++i) {
        if (mu[i] <= 1e-12 && lambda[i] - mu[i] > 0.0) theta = std::min(theta, lambda[i] / (lambda[i] - mu[i]));
      }
      for (int i = 0; i < k; ++i) lambda[i] += theta * (mu[i] - lambda[i]);
      std::vector<Eigen::VectorXd> kept_pts;
      std::vector<double> kept_lambda;
      for (int i = 0; i < k; ++i) {
        if (lambda[i] > 1e-14) {
          kept_pts.push_back(pts[i]);
          kept_lambda.push_back(lambda[i]);
        }
      }
      pts = std::move(kept_pts);
      lambda = std::move(kept_lambda);
      const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
      for (double& l : lambda) l /= total;
    }
    p = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < pts.size(); ++i) p += lambda[i] * pts[i];
  }
  return p + x;
}

}  // namespace

std::string to_string(MatroidKind kind) {
  switch (kind) {
    case MatroidKind::Uniform: return "uniform";
    case MatroidKind::Partition: return "partition";
    case MatroidKind::Graphic: return "graphic";
    case MatroidKind::Linear: return "linear";
    case MatroidKind::Explicit: return "explicit";
  }
  return "unknown";
}

Eigen::VectorXd indicator(int m, const IndexSet& set) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  for (int i : set) v[i] = 1.0;
  return v;
}

MatroidSpec MatroidSpec::uniform(int m, int n) {
  if (m <= 0) throw DomainError("uniform matroid: m must be positive");
  if (n < 0 || n > m) throw DomainError("uniform matroid: rank must lie in [0, m]");
  MatroidSpec mat;
  mat.kind_ = MatroidKind::Uniform;
  mat.m_ = m;
  mat.n_ = n;
  mat.sr_ = true;
  return mat;
}

MatroidSpec MatroidSpec::partition(int m, std::vector<IndexSet> parts, std::vector<int> quotas) {
  if (m <= 0) throw DomainError("partition matroid: m must be positive");
  if (parts.size() != quotas.size()) throw DimensionError("partition matroid: parts and quotas differ in length");
  MatroidSpec mat;
  mat.kind_ = MatroidKind::Partition;
  mat.m_ = m;
  mat.part_of_.assign(m, -1);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    auto& part = parts[j];
    std::sort(part.begin(), part.end());
    if (part.empty()) throw DomainError("partition matroid: part " + std::to_string(j) + " is empty");
    check_index_set(part, m, "partition matroid part " + std::to_string(j));
    for (int i : part) {
      if (mat.part_of_[i] != -1) throw DomainError("partition matroid: element " + std::to_string(i) + " in two parts");
      mat.part_of_[i] = static_cast<int>(j);
    }
    if (quotas[j] < 0 || quotas[j] > static_cast<int>(part.size())) {
      throw DomainError("partition matroid: quota " + std::to_string(j) + " must lie in [0, |part|]");
    }
    mat.n_ += quotas[j];
  }
  for (int i = 0; i < m; ++i) {
    if (mat.part_of_[i] == -1) throw DomainError("partition matroid: element " + std::to_string(i) + " in no part");
  }
  mat.parts_ = std::move(parts);
  mat.quotas_ = std::move(quotas);
  mat.sr_ = true;
  return mat;
}

MatroidSpec MatroidSpec::graphic(int vertices, std::vector<std::pair<int, int>> edges) {
  if (vertices <= 0) throw DomainError("graphic matroid: vertex count must be positive");
  if (edges.empty()) throw DomainError("graphic matroid: no edges");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    if (u < 0 || u >= vertices || v < 0 || v >= vertices) {
      throw DomainError("graphic matroid: edge " + std::to_string(e) + " has an endpoint out of range");
    }
  }
  MatroidSpec mat;
  mat.kind_ = MatroidKind::Graphic;
  mat.m_ = static_cast<int>(edges.size());
  mat.vertices_ = vertices;
  UnionFind uf(vertices);
  for (const auto& [u, v] : edges) uf.unite(u, v);
  // Reduced incidence matrix: one root vertex per component is dropped.
  std::vector<int> column(vertices, -1);
  int cols = 0;
  for (int v = 0; v < vertices; ++v) {
    if (uf.find(v) != v) column[v] = cols++;
  }
  mat.n_ = cols;
  mat.rep_ = Eigen::MatrixXd::Zero(mat.m_, cols);
  for (int e = 0; e < mat.m_; ++e) {
    const auto [u, v] = edges[e];
    if (u == v) continue;
    if (column[u] >= 0) mat.rep_(e, column[u]) += 1.0;
    if (column[v] >= 0) mat.rep_(e, column[v]) -= 1.0;
  }
  mat.edges_ = std::move(edges);
  mat.sr_ = true;
  mat.regular_ = true;
  return mat;
}

MatroidSpec MatroidSpec::linear(const Eigen::MatrixXd& V, bool regular) {
  if (V.rows() <= 0) throw DomainError("linear matroid: matrix needs at least one row");
  if (!V.allFinite()) throw DomainError("linear matroid: non-finite entry");
  MatroidSpec mat;
  mat.kind_ = MatroidKind::Linear;
  mat.m_ = static_cast<int>(V.rows());
  if (V.cols() == 0 || V.norm() == 0.0) {
    mat.rep_ = Eigen::MatrixXd::Zero(V.rows(), 0);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    int rank = 0;
    for (int k = 0; k < s.size(); ++k) rank += s[k] > kRankTol * s[0] ? 1 : 0;
    mat.rep_ = V * svd.matrixV().leftCols(rank);
  }
  mat.n_ = static_cast<int>(mat.rep_.cols());
  mat.sr_ = true;
  mat.regular_ = regular;
  return mat;
}

MatroidSpec MatroidSpec::explicit_family(int m, std::vector<IndexSet> bases, bool assert_strongly_rayleigh) {
  if (m <= 0 || m > 64) throw DomainError("explicit family: m must lie in [1, 64]");
  if (bases.empty()) throw DomainError("explicit family: no bases");
  for (auto& b : bases) std::sort(b.begin(), b.end());
  std::sort(bases.begin(), bases.end());
  bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
  MatroidSpec mat;
  mat.kind_ = MatroidKind::Explicit;
  mat.m_ = m;
  mat.n_ = static_cast<int>(bases.front().size());
  for (std::size_t k = 0; k < bases.size(); ++k) {
    if (static_cast<int>(bases[k].size()) != mat.n_) {
      throw DomainError("explicit family: bases " + std::to_string(k) + " and 0 differ in size");
    }
    check_index_set(bases[k], m, "explicit family base " + std::to_string(k));
    mat.masks_.push_back(to_mask(bases[k]));
  }
  if (bases.size() <= 5000) {
    std::unordered_set<std::uint64_t> lookup(mat.masks_.begin(), mat.masks_.end());
    for (std::size_t a = 0; a < bases.size() && mat.is_matroid_; ++a) {
      for (std::size_t b = 0; b < bases.size() && mat.is_matroid_; ++b) {
        const std::uint64_t sa = mat.masks_[a], sb = mat.masks_[b];
        for (int x = 0; x < m && mat.is_matroid_; ++x) {
          if (!((sa >> x) & 1) || ((sb >> x) & 1)) continue;
          bool found = false;
          for (int y = 0; y < m && !found; ++y) {
            if (((sb >> y) & 1) && !((sa >> y) & 1)) {
              found = lookup.count((sa & ~(std::uint64_t{1} << x)) | (std::uint64_t{1} << y)) > 0;
            }
          }
          mat.is_matroid_ = found;
        }
      }
    }
  } else {
    mat.is_matroid_ = false;
  }
  mat.bases_ = std::move(bases);
  mat.sr_ = assert_strongly_rayleigh || mat.bases_.size() == 1;
  return mat;
}

int MatroidSpec::rank_of(const IndexSet& set) const {
  for (int i : set) {
    if (i < 0 || i >= m_) throw DomainError("rank_of: index out of range");
  }
  IndexSet s = set;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  switch (kind_) {
    case MatroidKind::Uniform:
      return std::min(static_cast<int>(s.size()), n_);
    case MatroidKind::Partition: {
      std::vector<int> count(parts_.size(), 0);
      for (int i : s) ++count[part_of_[i]];
      int r = 0;
      for (std::size_t j = 0; j < parts_.size(); ++j) r += std::min(count[j], quotas_[j]);
      return r;
    }
    case MatroidKind::Graphic: {
      UnionFind uf(vertices_);
      int r = 0;
      for (int e : s) r += uf.unite(edges_[e].first, edges_[e].second) ? 1 : 0;
      return r;
    }
    case MatroidKind::Linear:
      return numeric_rank(select_rows(rep_, s));
    case MatroidKind::Explicit: {
      const std::uint64_t mask = to_mask(s);
      int best = 0;
      for (std::uint64_t b : masks_) best = std::max(best, std::popcount(b & mask));
      return best;
    }
  }
  return 0;
}

bool MatroidSpec::is_base(const IndexSet& set) const {
  if (static_cast<int>(set.size()) != n_) return false;
  IndexSet s = set;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
  if (kind_ == MatroidKind::Explicit) return std::binary_search(bases_.begin(), bases_.end(), s);
  return rank_of(s) == n_;
}

WeightedBase min_weight_base(const MatroidSpec& mat, const Eigen::VectorXd& w) {
  const int m = mat.m();
  if (w.size() != m) throw DimensionError("min_weight_base: weight vector has wrong length");
  WeightedBase out;
  if (mat.kind() == MatroidKind::Explicit) {
    double best = std::numeric_limits<double>::infinity();
    const IndexSet* arg = nullptr;
    for (const auto& b : mat.bases()) {
      double s = 0.0;
      for (int i : b) s += w[i];
      if (s < best) {
        best = s;
        arg = &b;
      }
    }
    out.base = *arg;
    out.weight = best;
    return out;
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] < w[b]; });
  switch (mat.kind()) {
    case MatroidKind::Uniform:
      out.base.assign(order.begin(), order.begin() + mat.n());
      break;
    case MatroidKind::Partition: {
      std::vector<int> taken(mat.parts().size(), 0);
      std::vector<int> part_of(m);
      for (std::size_t j = 0; j < mat.parts().size(); ++j) {
        for (int i : mat.parts()[j]) part_of[i] = static_cast<int>(j);
      }
      for (int i : order) {
        if (taken[part_of[i]] < mat.quotas()[part_of[i]]) {
          ++taken[part_of[i]];
          out.base.push_back(i);
        }
      }
      break;
    }
    case MatroidKind::Graphic: {
      UnionFind uf(mat.vertices());
      for (int e : order) {
        if (uf.unite(mat.edges()[e].first, mat.edges()[e].second)) out.base.push_back(e);
      }
      break;
    }
    case MatroidKind::Linear: {
      // Incremental Gram-Schmidt on the accepted rows.
      const Eigen::MatrixXd& V = mat.representation();
      std::vector<Eigen::VectorXd> q;
      for (int i : order) {
        if (static_cast<int>(out.base.size()) == mat.n()) break;
        Eigen::VectorXd r = V.row(i).transpose();
        const double scale = std::max(1.0, r.norm());
        for (int pass = 0; pass < 2; ++pass) {
          for (const auto& u : q) r -= u.dot(r) * u;
        }
        if (r.norm() > kRankTol * scale) {
          q.push_back(r / r.norm());
          out.base.push_back(i);
        }
      }
      break;
    }
    case MatroidKind::Explicit:
      break;
  }
  std::sort(out.base.begin(), out.base.end());
  for (int i : out.base) out.weight += w[i];
  return out;
}

Membership membership_P(const MatroidSpec& mat, const Eigen::VectorXd& x, double tol) {
  const int m = mat.m();
  if (x.size() != m) throw DimensionError("membership_P: point has wrong length");
  Membership best;
  best.a = Eigen::VectorXd::Zero(m);
  best.violation = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::VectorXd& a, double b) {
    const double v = b - a.dot(x);
    if (v > best.violation) {
      best.violation = v;
      best.a = a;
      best.b = b;
    }
  };

  if (mat.is_matroid() && m <= 20) {
    for (int i = 0; i < m; ++i) consider(Eigen::VectorXd::Unit(m, i), 0.0);
    consider(Eigen::VectorXd::Ones(m), mat.n());
    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
      IndexSet u;
      for (int i = 0; i < m; ++i) {
        if ((mask >> i) & 1) u.push_back(i);
      }
      consider(-indicator(m, u), -static_cast<double>(mat.rank_of(u)));
    }
    best.inside = best.violation <= tol;
    return best;
  }

  auto lmo = [&](const Eigen::VectorXd& c) { return indicator(m, min_weight_base(mat, c).base); };
  const Eigen::VectorXd p = min_norm_point(lmo, x, tol);
  const Eigen::VectorXd a = p - x;
  if (a.norm() <= tol) {
    best.inside = true;
    best.violation = a.norm();
    best.a = Eigen::VectorXd::Zero(m);
    best.b = 0.0;
    return best;
  }
  best.inside = false;
  best.a = a;
  best.b = a.dot(p);
  best.violation = best.b - a.dot(x);
  return best;
}

MatroidSpec dual(const MatroidSpec& mat) {
  switch (mat.kind()) {
    case MatroidKind::Uniform:
      return MatroidSpec::uniform(mat.m(), mat.m() - mat.n());
    case MatroidKind::Partition: {
      std::vector<int> q;
      for (std::size_t j = 0; j < mat.parts().size(); ++j) {
        q.push_back(static_cast<int>(mat.parts()[j].size()) - mat.quotas()[j]);
      }
      return MatroidSpec::partition(mat.m(), mat.parts(), q);
    }
    case MatroidKind::Graphic:
    case MatroidKind::Linear:
      return MatroidSpec::linear(complement_basis(mat.representation()), mat.is_regular());
    case MatroidKind::Explicit: {
      std::vector<IndexSet> comp;
      for (const auto& b : mat.bases()) {
        IndexSet c;
        for (int i = 0, k = 0; i < mat.m(); ++i) {
          if (k < static_cast<int>(b.size()) && b[k] == i) {
            ++k;
          } else {
            c.push_back(i);
          }
        }
        comp.push_back(std::move(c));
      }
      return MatroidSpec::explicit_family(mat.m(), std::move(comp), mat.strongly_rayleigh_asserted());
    }
  }
  throw UnsupportedError("dual: unknown matroid kind");
}

std::vector<IndexSet> enumerate_bases(const MatroidSpec& mat, long long limit) {
  std::vector<IndexSet> out;
  if (mat.kind() == MatroidKind::Explicit) {
    if (static_cast<long long>(mat.bases().size()) > limit) {
      throw LimitError("enumerate_bases: family exceeds limit", limit);
    }
    return mat.bases();
  }
  const int m = mat.m();
  const int n = mat.n();
  IndexSet chosen;
  // Depth-first in increasing element order; a prefix is extended only when
  // it can still be completed to a base from the remaining elements.
  std::function<void(int)> rec = [&](int next) {
    if (static_cast<int>(chosen.size()) == n) {
      if (static_cast<long long>(out.size()) >= limit) {
        throw LimitError("enumerate_bases: more than " + std::to_string(limit) + " bases", limit);
      }
      out.push_back(chosen);
      return;
    }
    for (int e = next; e <= m - (n - static_cast<int>(chosen.size())); ++e) {
      chosen.push_back(e);
      IndexSet reach = chosen;
      for (int k = e + 1; k < m; ++k) reach.push_back(k);
      if (mat.rank_of(chosen) == static_cast<int>(chosen.size()) && mat.rank_of(reach) == n) rec(e + 1);
      chosen.pop_back();
    }
  };
  rec(0);
  return out;
}

double unbalance(const Eigen::MatrixXd& V, const std::vector<IndexSet>& bases) {
  if (bases.empty()) throw DomainError("unbalance: no bases");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : bases) {
    const double d = gram_det(V, s);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (!(lo > 1e-12 * std::max(1.0, hi))) {
    throw DomainError("unbalance: a base has vanishing determinant; V does not represent the family");
  }
  return hi / lo;
}

SelectionPoly build_selection(const MatroidSpec& mat) {
  const int m = mat.m();
  auto partition_selection = [&](const std::vector<IndexSet>& parts, const std::vector<int>& quotas) {
    double log_coeff = 0.0, log_kappa = 0.0;
    for (int b : quotas) {
      log_coeff -= std::lgamma(b + 1.0);
      log_kappa += (b > 0 ? b * std::log(static_cast<double>(b)) : 0.0) - std::lgamma(b + 1.0);
    }
    return SelectionPoly{PolynomialOracle::partition_power(m, parts, quotas, std::exp(log_coeff)), 1.0,
                         std::exp(log_kappa), "partition-power"};
  };
  switch (mat.kind()) {
    case MatroidKind::Uniform: {
      IndexSet all(m);
      std::iota(all.begin(), all.end(), 0);
      return partition_selection({all}, {mat.n()});
    }
    case MatroidKind::Partition:
      return partition_selection(mat.parts(), mat.quotas());
    case MatroidKind::Graphic:
      return SelectionPoly{PolynomialOracle::determinantal(mat.representation()), 1.0, 1.0,
                           "determinantal-unimodular"};
    case MatroidKind::Linear: {
      const Eigen::MatrixXd& V = mat.representation();
      const int n = mat.n();
      double lo = 0.0, c = 1.0;
      if (mat.is_regular()) {
        lo = gram_det(V, min_weight_base(mat, Eigen::VectorXd::Zero(m)).base);
      } else {
        const auto bases = enumerate_bases(mat);
        c = unbalance(V, bases);
        lo = std::numeric_limits<double>::infinity();
        for (const auto& s : bases) lo = std::min(lo, gram_det(V, s));
      }
      // Scaling V by s multiplies every degree-n coefficient by s^{2n}.
      const double s = n > 0 ? std::pow(lo, -0.5 / n) : 1.0;
      return SelectionPoly{PolynomialOracle::determinantal(s * V, n), c, 1.0,
                           mat.is_regular() ? "determinantal-unimodular" : "determinantal-scaled"};
    }
    case MatroidKind::Explicit: {
      if (!mat.strongly_rayleigh_asserted()) {
        throw UnsupportedError(
            "build_selection: explicit family is not asserted strongly Rayleigh, so its generating "
            "polynomial is not known to be real stable");
      }
      std::vector<Term> terms;
      for (const auto& b : mat.bases()) {
        std::vector<int> e(m, 0);
        for (int i : b) e[i] = 1;
        terms.push_back({e, 1.0});
      }
      return SelectionPoly{PolynomialOracle::sparse(m, terms, true), 1.0, 1.0, "generating-polynomial"};
    }
  }
  throw UnsupportedError("build_selection: unknown matroid kind");
}

}  // namespace capcount
