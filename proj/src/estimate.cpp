#include "capcount/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "capcount/error.hpp"

namespace capcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double xlogx(double k) { return k > 0.0 ? k * std::log(k) : 0.0; }

// log(k^k / k!)
double log_power_over_factorial(int k) { return xlogx(k) - std::lgamma(k + 1.0); }

// Largest power of z_i in h.
int variable_degree(const PolynomialOracle& h, int i) {
  const auto& payload = h.node().payload;
  if (const auto* p = std::get_if<PartitionPowerSpec>(&payload)) {
    for (std::size_t j = 0; j < p->parts.size(); ++j) {
      if (std::find(p->parts[j].begin(), p->parts[j].end(), i) != p->parts[j].end()) return p->powers[j];
    }
    return 0;
  }
  if (const auto* d = std::get_if<DeterminantalSpec>(&payload)) {
    return d->degree > 0 && d->basis.cols() > 0 && d->basis.row(i).norm() > 0.0 ? 1 : 0;
  }
  if (const auto* s = std::get_if<SparseTerms>(&payload)) {
    int best = 0;
    for (const auto& t : s->terms) best = std::max(best, t.exponents[i]);
    return best;
  }
  return h.degree();
}

// log((d / (d - 1))^(d - 1)), the per-variable factor in the degree-refined
// form of Gurvits' inequality.
double log_degree_factor(int d) { return d <= 1 ? 0.0 : (d - 1) * std::log(d / (d - 1.0)); }

struct PartitionView {
  std::vector<IndexSet> parts;
  std::vector<int> quotas;
};

std::optional<PartitionView> as_partition(const MatroidSpec& mat) {
  if (mat.kind() == MatroidKind::Partition) return PartitionView{mat.parts(), mat.quotas()};
  if (mat.kind() == MatroidKind::Uniform) {
    IndexSet all(mat.m());
    std::iota(all.begin(), all.end(), 0);
    return PartitionView{{all}, {mat.n()}};
  }
  return std::nullopt;
}

void consider(RatioBound& best, const std::string& name, double log_value, double c, double kappa) {
  const double v = std::exp(log_value);
  if (best.name.empty() || v < best.value) best = RatioBound{name, v, c, kappa};
}

double log_binomial(int a, int b) { return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0); }

// A(B) over explicit vertices: value and gradient of sum_S x^S.
struct FamilySum {
  std::vector<IndexSet> bases;
  double value(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (const auto& s : bases) {
      double p = 1.0;
      for (int i : s) p *= x[i];
      total += p;
    }
    return total;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (const auto& s : bases) {
      for (int i : s) {
        double p = 1.0;
        for (int j : s) {
          if (j != i) p *= x[j];
        }
        g[i] += p;
      }
    }
    return g;
  }
};

InnerSolution restricted_capacity(const PolynomialOracle& g, const MatroidSpec& mat, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& warm, double radius, const CapacityOptions& opts,
                                  const std::vector<Cut>& seed_cuts) {
  const int m = mat.m();
  const int n = mat.n();
  Eigen::VectorXd logx(m);
  for (int i = 0; i < m; ++i) logx[i] = x[i] > 1e-15 ? std::log(x[i]) : kNegInf;
  if (!std::isfinite(g.log_eval_at(logx))) {
    return InnerSolution{kNegInf, Eigen::VectorXd::Zero(m), warm, SolveStatus::BoxActive, 0};
  }
  ConvexProgram prog;
  prog.dim = m;
  prog.objective = [&g, &logx](const Eigen::VectorXd& w, bool hessian) {
    LogDerivatives d = g.log_derivatives(logx + w, hessian ? 2 : 1);
    return ObjectiveEval{d.log_value, std::move(d.grad), std::move(d.hessian)};
  };
  prog.separation = [&mat](const Eigen::VectorXd& w) -> std::optional<Cut> {
    const WeightedBase wb = min_weight_base(mat, w);
    if (wb.weight >= 0.0) return std::nullopt;
    return Cut{indicator(mat.m(), wb.base), 0.0};
  };
  prog.cuts = seed_cuts;
  prog.radius = radius;
  prog.eps = 0.1 * opts.eps;
  prog.budget = opts.budget;
  prog.start = warm;
  const MinimizeResult r = minimize(prog);
  Eigen::VectorXd w = r.point;
  const double phi = min_weight_base(mat, w).weight;
  if (phi < 0.0 && n > 0) w.array() -= phi / n;
  // Where x_i = 0 the solver leaves w_i wherever the cuts allowed, often on
  // the box. The one-sided slope belongs to the smallest feasible w_i.
  for (int i = 0; i < m; ++i) {
    if (logx[i] != kNegInf) continue;
    Eigen::VectorXd forced = w;
    const double pull = 1e3 * (1.0 + w.cwiseAbs().maxCoeff());
    forced[i] = -pull;
    const WeightedBase wb = min_weight_base(mat, forced);
    if (std::find(wb.base.begin(), wb.base.end(), i) == wb.base.end()) continue;  // loop
    w[i] = -(wb.weight + pull);
  }
  const LogDerivatives d = g.log_derivatives(logx + w, 1);
  Eigen::VectorXd s(m);
  for (int i = 0; i < m; ++i) s[i] = std::exp(w[i] + d.log_rel_grad[i]);
  return InnerSolution{d.log_value, s, w, r.status, r.iterations};
}

void require_stable(const PolynomialOracle& g, const char* op) {
  if (!g.is_real_stable_asserted()) {
    throw UnsupportedError(std::string(op) +
                           ": polynomial is not asserted real stable, so the certified lower bound does not apply");
  }
}

}  // namespace

RatioBound bound_M(const MatroidSpec& mat, bool multilinear) {
  if (!mat.is_matroid()) {
    throw UnsupportedError("bound_M: the family fails the exchange axiom, so no approximation bound is available");
  }
  const int m = mat.m();
  const int n = mat.n();
  RatioBound best;

  std::optional<SelectionPoly> sel;
  try {
    sel = build_selection(dual(mat));
  } catch (const UnsupportedError&) {
  } catch (const LimitError&) {
  }
  if (sel) {
    const double log_ratio = std::log(sel->c) - std::log(sel->kappa);
    consider(best, "selection-" + sel->construction, log_ratio + xlogx(m) - std::lgamma(m + 1.0), sel->c,
             sel->kappa);
    if (multilinear) {
      double log_factor = 0.0;
      for (int i = 0; i < m; ++i) log_factor += log_degree_factor(1 + variable_degree(sel->h, i));
      consider(best, "selection-" + sel->construction + "-multilinear", log_ratio + log_factor, sel->c,
               sel->kappa);
    }
  }
  if (const auto part = as_partition(mat)) {
    double log_general = xlogx(m) - std::lgamma(m + 1.0);
    double log_multi = log_power_over_factorial(n);
    for (std::size_t j = 0; j < part->parts.size(); ++j) {
      const int free = static_cast<int>(part->parts[j].size()) - part->quotas[j];
      log_general -= log_power_over_factorial(free);
      log_multi -= log_power_over_factorial(part->quotas[j]);
    }
    consider(best, "partition", log_general, 1.0, 1.0);
    if (multilinear) consider(best, "partition-multilinear", log_multi, 1.0, 1.0);
    if (mat.kind() == MatroidKind::Uniform) consider(best, "uniform-exponential", n, 1.0, 1.0);
  }
  if (best.name.empty()) {
    throw UnsupportedError(
        "bound_M: no certified selection for the dual family; it must be a partition, graphic, linear, or "
        "strongly Rayleigh family");
  }
  return best;
}

ABound A_bound(const MatroidSpec& mat, unsigned long long seed, long long limit) {
  const int m = mat.m();
  const int n = mat.n();
  ABound out;
  out.certified = std::exp(static_cast<double>(n));
  out.certified_name = "exponential";
  const double maclaurin = std::exp(log_binomial(m, n) + (n > 0 ? n * std::log(static_cast<double>(n) / m) : 0.0));
  if (maclaurin < out.certified) {
    out.certified = maclaurin;
    out.certified_name = "maclaurin";
  }
  if (const auto part = as_partition(mat)) {
    double log_exact = 0.0;
    for (std::size_t j = 0; j < part->parts.size(); ++j) {
      const int size = static_cast<int>(part->parts[j].size());
      const int b = part->quotas[j];
      log_exact += log_binomial(size, b) + (b > 0 ? b * std::log(static_cast<double>(b) / size) : 0.0);
    }
    if (std::exp(log_exact) <= out.certified) {
      out.certified = std::exp(log_exact);
      out.certified_name = "partition-exact";
    }
  }

  FamilySum fs;
  try {
    fs.bases = enumerate_bases(mat, limit);
  } catch (const LimitError&) {
    return out;
  }
  std::vector<Eigen::VectorXd> verts;
  for (const auto& s : fs.bases) verts.push_back(indicator(m, s));
  auto oracle = [&](const Eigen::VectorXd& c) { return indicator(m, min_weight_base(mat, c).base); };

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  double best = 1.0;  // every vertex attains 1
  for (int start = 0; start < 201; ++start) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    if (start == 0) {
      for (const auto& v : verts) x += v;
      x /= static_cast<double>(verts.size());
    } else {
      double total = 0.0;
      for (const auto& v : verts) {
        const double w = expo(rng);
        x += w * v;
        total += w;
      }
      x /= total;
    }
    for (int it = 0; it < 100; ++it) {
      const Eigen::VectorXd grad = fs.grad(x);
      const Eigen::VectorXd d = oracle(-grad) - x;
      if (grad.dot(d) <= 1e-12) break;
      // Golden-section search along the segment.
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = 0.0, b = 1.0;
      double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
      double f1 = fs.value(x + c1 * d), f2 = fs.value(x + c2 * d);
      for (int k = 0; k < 40; ++k) {
        if (f1 < f2) {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + phi * (b - a);
          f2 = fs.value(x + c2 * d);
        } else {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - phi * (b - a);
          f1 = fs.value(x + c1 * d);
        }
      }
      const double gamma = 0.5 * (a + b);
      const double before = fs.value(x);
      const Eigen::VectorXd next = x + gamma * d;
      if (fs.value(next) <= before + 1e-15) break;
      x = next;
    }
    best = std::max(best, fs.value(x));
  }
  out.numeric = std::min(best, out.certified);
  return out;
}

EstimateInterval count_estimate(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts) {
  require_stable(g, "count_estimate");
  const CapacityResult r = cap(g, mat, opts);
  const RatioBound b = bound_M(mat, g.is_multilinear());
  EstimateInterval out;
  out.point = r.value;
  out.log_point = r.log_value;
  out.upper = r.value;
  out.lower = r.zero ? 0.0 : std::exp(r.log_value - opts.eps - std::log(b.value));
  out.bound_name = b.name;
  out.bound_value = b.value;
  out.c = b.c;
  out.kappa = b.kappa;
  out.status = r.status;
  out.iterations = r.iterations;
  out.zero = r.zero;
  return out;
}

EstimateInterval max_estimate(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts) {
  require_stable(g, "max_estimate");
  if (g.num_vars() != mat.m()) throw DimensionError("max_estimate: polynomial and family sizes differ");
  if (!g.is_homogeneous() || g.degree() != mat.n()) {
    throw DomainError("max_estimate: polynomial must be homogeneous of degree equal to the family rank");
  }
  check_homogeneous(g, opts.seed);
  const int m = mat.m();
  const double L = g.log_eval_at(Eigen::VectorXd::Zero(m));
  const double radius = opts.radius.value_or(default_radius(g, mat.n()));

  EstimateInterval out;
  const auto starts = spread_vertices(mat);
  std::vector<Cut> seed_cuts;
  for (const auto& v : starts) seed_cuts.push_back(Cut{v, 0.0});

  SaddleProgram sp;
  sp.dim = m;
  sp.linear_oracle = [&mat](const Eigen::VectorXd& c) { return indicator(mat.m(), min_weight_base(mat, c).base); };
  sp.inner = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& warm) {
    return restricted_capacity(g, mat, x, warm, radius, opts, seed_cuts);
  };
  sp.start_vertices = starts;
  sp.eps = opts.eps;
  sp.budget = opts.outer_budget;
  sp.concavity_check = opts.concavity_check;
  const SaddleResult sr = std::isfinite(L) ? saddle(sp) : SaddleResult{};

  out.x = sr.x;
  out.iterations = sr.iterations;
  out.concavity_violations = sr.concavity_violations;
  out.status = sr.status;
  if (!std::isfinite(L) || !std::isfinite(sr.value) || sr.value <= L - radius) {
    out.zero = true;
    out.log_point = kNegInf;
    out.status = sr.status == SolveStatus::BudgetExhausted ? sr.status : SolveStatus::BoxActive;
  } else {
    out.log_point = sr.value;
    out.point = std::exp(sr.value);
    out.upper = out.point;
    out.gap = sr.gap;
  }

  const ABound a = A_bound(mat, opts.seed);
  out.a_value = a.certified;
  out.a_name = a.certified_name;
  try {
    const RatioBound b = bound_M(mat, g.is_multilinear());
    out.bound_name = b.name;
    out.bound_value = b.value;
    out.c = b.c;
    out.kappa = b.kappa;
    if (!out.zero) out.lower = std::exp(out.log_point - opts.eps - std::log(b.value) - std::log(a.certified));
  } catch (const UnsupportedError&) {
    out.bound_name = "uncertified";
    out.bound_value = std::numeric_limits<double>::infinity();
    out.lower = 0.0;
  }
  return out;
}

EstimateInterval subdet_max(const Eigen::MatrixXd& L, const MatroidSpec& mat, const CapacityOptions& opts) {
  const int m = mat.m();
  if (L.rows() != m || L.cols() != m) throw DimensionError("subdet_max: kernel must be m x m");
  if (!L.allFinite()) throw DomainError("subdet_max: kernel has a non-finite entry");
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw DomainError("subdet_max: kernel is not symmetric");
  const Eigen::MatrixXd sym = 0.5 * (L + L.transpose());
  const double shift = 1e-10 * std::max(sym.trace(), 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(sym + (shift > 0.0 ? shift : 1e-300) * Eigen::MatrixXd::Identity(m, m));
  if (llt.info() != Eigen::Success) throw DomainError("subdet_max: kernel is not positive semidefinite");

  // Factor L = V V^T from the positive part of the spectrum, so that
  // det(L_SS) = det(V_S V_S^T).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double top = std::max(lam.maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int k = 0; k < m; ++k) {
    if (lam[k] > 1e-12 * top && lam[k] > 0.0) keep.push_back(k);
  }
  Eigen::MatrixXd V(m, static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    V.col(static_cast<int>(k)) = eig.eigenvectors().col(keep[k]) * std::sqrt(lam[keep[k]]);
  }
  if (static_cast<int>(keep.size()) < mat.n()) {
    EstimateInterval out;
    out.zero = true;
    out.log_point = kNegInf;
    out.status = SolveStatus::BoxActive;
    const RatioBound b = bound_M(mat, true);
    out.bound_name = b.name;
    out.bound_value = b.value;
    const ABound a = A_bound(mat, opts.seed);
    out.a_value = a.certified;
    out.a_name = a.certified_name;
    return out;
  }
  return max_estimate(PolynomialOracle::determinantal(V, mat.n()), mat, opts);
}

}  // namespace capcount
