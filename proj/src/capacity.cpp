#include "capcount/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "capcount/error.hpp"

namespace capcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Objective log_objective(const PolynomialOracle& g) {
  return [g](const Eigen::VectorXd& y, bool hessian) {
    LogDerivatives d = g.log_derivatives(y, hessian ? 2 : 1);
    return ObjectiveEval{d.log_value, std::move(d.grad), std::move(d.hessian)};
  };
}

Separation base_separation(const MatroidSpec& mat) {
  return [mat](const Eigen::VectorXd& y) -> std::optional<Cut> {
    const WeightedBase wb = min_weight_base(mat, y);
    if (wb.weight >= 0.0) return std::nullopt;
    return Cut{indicator(mat.m(), wb.base), 0.0};
  };
}

IndexSet support_of(const Eigen::VectorXd& a) {
  IndexSet s;
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0) s.push_back(i);
  }
  return s;
}

void check_problem(const PolynomialOracle& g, const MatroidSpec& mat, const char* op) {
  if (g.num_vars() != mat.m()) {
    throw DimensionError(std::string(op) + ": polynomial has " + std::to_string(g.num_vars()) +
                         " variables but the family lives on " + std::to_string(mat.m()) + " elements");
  }
  if (!g.is_homogeneous()) throw DomainError(std::string(op) + ": polynomial must be homogeneous");
  if (g.degree() != mat.n()) {
    throw DomainError(std::string(op) + ": polynomial degree " + std::to_string(g.degree()) +
                      " differs from the family rank " + std::to_string(mat.n()));
  }
}

}  // namespace

double default_radius(const PolynomialOracle& g, int n) {
  const double L = g.log_eval_at(Eigen::VectorXd::Zero(g.num_vars()));
  const double base = std::isfinite(L) ? std::abs(L) : 0.0;
  return std::max(1.0, 4.0 * (base + n * std::log(g.num_vars() + 1.0)));
}

void check_homogeneous(const PolynomialOracle& g, unsigned long long seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> coord(-0.7, 0.7);
  const int m = g.num_vars();
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd u(m);
    for (int i = 0; i < m; ++i) u[i] = coord(rng);
    const double a = g.log_eval_at(u);
    if (!std::isfinite(a)) continue;
    const double shift = 0.53;
    const double b = g.log_eval_at((u.array() + shift).matrix());
    if (std::abs(b - a - g.degree() * shift) > 1e-8 * (1.0 + std::abs(a))) {
      throw DomainError("polynomial fails the homogeneity probe for degree " + std::to_string(g.degree()));
    }
  }
}

CapacityResult cap(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts) {
  check_problem(g, mat, "cap");
  check_homogeneous(g, opts.seed);
  const int m = mat.m();
  const int n = mat.n();
  CapacityResult out;
  out.minimizer = Eigen::VectorXd::Zero(m);
  const double L = g.log_eval_at(out.minimizer);
  out.radius = opts.radius.value_or(default_radius(g, n));
  if (!std::isfinite(L)) {
    out.zero = true;
    out.log_value = kNegInf;
    out.status = SolveStatus::BoxActive;
    return out;
  }
  if (n == 0) {
    out.log_value = L;
    out.value = std::exp(L);
    return out;
  }

  ConvexProgram prog;
  prog.dim = m;
  prog.objective = log_objective(g);
  prog.separation = base_separation(mat);
  for (const auto& v : spread_vertices(mat)) prog.cuts.push_back(Cut{v, 0.0});
  prog.radius = out.radius;
  prog.eps = opts.eps;
  prog.budget = opts.budget;
  const MinimizeResult res = minimize(prog);

  // Homogeneity turns any residual infeasibility into an exact shift along
  // the all-ones direction.
  Eigen::VectorXd y = res.point;
  const double phi = min_weight_base(mat, y).weight;
  if (phi < 0.0) y.array() -= phi / n;
  out.minimizer = y;
  out.log_value = g.log_eval_at(y);
  out.status = res.status;
  out.iterations = res.iterations;
  for (const auto& c : res.active) out.active_bases.push_back(support_of(c.a));
  if (out.log_value <= L - out.radius) {
    out.zero = true;
    out.status = SolveStatus::BoxActive;
    out.value = 0.0;
  } else {
    out.value = std::exp(out.log_value);
  }
  return out;
}

std::vector<Eigen::VectorXd> spread_vertices(const MatroidSpec& mat) {
  const int m = mat.m();
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    w[i] = -1.0;
    const Eigen::VectorXd v = indicator(m, min_weight_base(mat, w).base);
    if (std::none_of(out.begin(), out.end(), [&](const Eigen::VectorXd& u) { return u == v; })) out.push_back(v);
  }
  return out;
}

PrimalResult cap_primal(const PolynomialOracle& g, const MatroidSpec& mat, const CapacityOptions& opts) {
  check_problem(g, mat, "cap_primal");
  check_homogeneous(g, opts.seed);
  const int m = mat.m();
  const double radius = opts.radius.value_or(default_radius(g, mat.n()));
  const Objective f = log_objective(g);

  SaddleProgram sp;
  sp.dim = m;
  sp.linear_oracle = [&mat](const Eigen::VectorXd& c) { return indicator(mat.m(), min_weight_base(mat, c).base); };
  sp.inner = [&](const Eigen::VectorXd& theta, const Eigen::VectorXd& warm) {
    ConvexProgram prog;
    prog.dim = m;
    prog.objective = [&f, theta](const Eigen::VectorXd& y, bool hessian) {
      ObjectiveEval ev = f(y, hessian);
      ev.value -= theta.dot(y);
      ev.grad -= theta;
      return ev;
    };
    prog.radius = radius;
    prog.eps = 0.1 * opts.eps;
    prog.budget = opts.budget;
    prog.start = warm;
    const MinimizeResult r = minimize(prog);
    return InnerSolution{r.value, -r.point, r.point, r.status, r.iterations};
  };
  sp.start_vertices = spread_vertices(mat);
  sp.eps = opts.eps;
  sp.budget = opts.outer_budget;
  const SaddleResult sr = saddle(sp);

  PrimalResult out;
  out.log_value = sr.value;
  out.value = std::exp(sr.value);
  out.theta = sr.x;
  out.gap = sr.gap;
  out.status = sr.status;
  out.iterations = sr.iterations;
  return out;
}

LowerCapResult lower_cap(const PolynomialOracle& h, const MatroidSpec& mat, const CapacityOptions& opts,
                         long long limit) {
  check_problem(h, mat, "lower_cap");
  std::vector<IndexSet> bases;
  try {
    bases = enumerate_bases(mat, limit);
  } catch (const LimitError& e) {
    throw LimitError(std::string("lower_cap: too many bases to enumerate; use the certified constant of the "
                                 "selection instead (") + e.what() + ")",
                     e.partial_count());
  }
  LowerCapResult out;
  out.log_value = std::numeric_limits<double>::infinity();
  for (const auto& s : bases) {
    const CapacityResult r = cap(h, MatroidSpec::explicit_family(mat.m(), {s}), opts);
    if (r.log_value < out.log_value) {
      out.log_value = r.log_value;
      out.argmin = s;
    }
  }
  out.value = std::isfinite(out.log_value) ? std::exp(out.log_value) : 0.0;
  return out;
}

CapacityResult gurvits_cap(const PolynomialOracle& g, const CapacityOptions& opts) {
  const int m = g.num_vars();
  if (g.is_homogeneous() && g.degree() == m) return cap(g, MatroidSpec::uniform(m, m), opts);

  CapacityResult out;
  out.minimizer = Eigen::VectorXd::Zero(m);
  const double L = g.log_eval_at(out.minimizer);
  out.radius = opts.radius.value_or(default_radius(g, g.degree()));
  if (!std::isfinite(L)) {
    out.zero = true;
    out.log_value = kNegInf;
    out.status = SolveStatus::BoxActive;
    return out;
  }
  ConvexProgram prog;
  prog.dim = m;
  prog.objective = log_objective(g);
  prog.cuts = {Cut{Eigen::VectorXd::Ones(m), 0.0}, Cut{-Eigen::VectorXd::Ones(m), 0.0}};
  prog.radius = out.radius;
  prog.eps = opts.eps;
  prog.budget = opts.budget;
  const MinimizeResult res = minimize(prog);
  Eigen::VectorXd y = res.point;
  y.array() -= y.mean();
  out.minimizer = y;
  out.log_value = g.log_eval_at(y);
  out.status = res.status;
  out.iterations = res.iterations;
  if (out.log_value <= L - out.radius) {
    out.zero = true;
    out.status = SolveStatus::BoxActive;
  } else {
    out.value = std::exp(out.log_value);
  }
  return out;
}

EntropyResult entropy_cap(const PolynomialOracle& p, const MatroidSpec& mat, const CapacityOptions& opts,
                          std::size_t max_support) {
  check_problem(p, mat, "entropy_cap");
  const auto* sparse = std::get_if<SparseTerms>(&p.node().payload);
  if (sparse == nullptr) throw UnsupportedError("entropy_cap: needs a polynomial with explicit monomial support");
  if (sparse->terms.size() > max_support) {
    throw LimitError("entropy_cap: monomial support larger than " + std::to_string(max_support),
                     static_cast<long long>(sparse->terms.size()));
  }
  const int m = mat.m();
  const int k = static_cast<int>(sparse->terms.size());
  Eigen::MatrixXd alpha(k, m);
  Eigen::VectorXd logp(k);
  for (int t = 0; t < k; ++t) {
    for (int i = 0; i < m; ++i) alpha(t, i) = sparse->terms[t].exponents[i];
    logp[t] = std::log(sparse->terms[t].coeff);
  }
  const double radius = opts.radius.value_or(default_radius(p, mat.n()));

  // Distribution q_lambda proportional to p_alpha e^{-<lambda, alpha>}.
  auto tilt = [&](const Eigen::VectorXd& lambda, double& log_z) {
    Eigen::VectorXd s = logp - alpha * lambda;
    const double hi = s.maxCoeff();
    Eigen::VectorXd q = (s.array() - hi).exp().matrix();
    log_z = hi + std::log(q.sum());
    return Eigen::VectorXd(q / q.sum());
  };

  struct Detail {
    Eigen::VectorXd q;
    double primal;
  };
  std::vector<Detail> last(1);

  SaddleProgram sp;
  sp.dim = m;
  sp.linear_oracle = [&mat](const Eigen::VectorXd& c) { return indicator(mat.m(), min_weight_base(mat, c).base); };
  sp.inner = [&](const Eigen::VectorXd& theta, const Eigen::VectorXd& warm) {
    ConvexProgram prog;
    prog.dim = m;
    prog.objective = [&, theta](const Eigen::VectorXd& lambda, bool hessian) {
      double log_z = 0.0;
      const Eigen::VectorXd q = tilt(lambda, log_z);
      const Eigen::VectorXd mean = alpha.transpose() * q;
      ObjectiveEval ev;
      ev.value = log_z + lambda.dot(theta);
      ev.grad = theta - mean;
      if (hessian) {
        const Eigen::MatrixXd centered = alpha.rowwise() - mean.transpose();
        ev.hessian = centered.transpose() * q.asDiagonal() * centered;
      }
      return ev;
    };
    prog.radius = radius;
    prog.eps = 0.1 * opts.eps;
    prog.budget = opts.budget;
    prog.start = warm;
    const MinimizeResult r = minimize(prog);
    double log_z = 0.0;
    const Eigen::VectorXd q = tilt(r.point, log_z);
    double primal = 0.0;
    for (int t = 0; t < k; ++t) {
      if (q[t] > 0.0) primal += q[t] * (logp[t] - std::log(q[t]));
    }
    last[0] = {q, primal};
    return InnerSolution{primal, r.point, r.point, r.status, r.iterations};
  };
  sp.start_vertices = spread_vertices(mat);
  sp.eps = opts.eps;
  sp.budget = opts.outer_budget;
  const SaddleResult sr = saddle(sp);
  // Re-solve at the final marginal so q matches the reported point.
  const InnerSolution fin = sp.inner(sr.x, sr.inner_point);

  EntropyResult out;
  out.log_value = fin.value;
  out.value = std::exp(fin.value);
  out.theta = sr.x;
  out.q = last[0].q;
  out.status = sr.status;
  out.iterations = sr.iterations;
  out.boundary_warning = fin.status == SolveStatus::BoxActive;
  return out;
}

}  // namespace capcount
