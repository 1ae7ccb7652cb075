// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capcount/capacity.hpp"
#include "capcount/cli.hpp"
#include "capcount/estimate.hpp"
#include "capcount/reference.hpp"
#include "support/generators.hpp"

using namespace capcount;
using namespace testsupport;

namespace {

// Pinned tolerances.
constexpr double kExampleRel = 1e-5;
constexpr double kGridOracleRel = 1e-4;
constexpr double kClosedFormRel = 1e-4;
constexpr double kGurvitsRel = 1e-7;
constexpr double kDualityRel = 1e-4;
constexpr double kCapSlack = 1e-5;
constexpr double kOptRel = 1e-4;
constexpr double kEntropyRel = 1e-4;
constexpr double kNormalizedAbs = 1e-6;
constexpr double kSelectionTol = 1e-9;
constexpr double kKappaAbs = 1e-6;
constexpr double kLowerSlack = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

PolynomialOracle example_one() {
  Eigen::MatrixXd A(2, 4);
  A << 1, 1, 0, 0, 0, 0, 1, 1;
  return PolynomialOracle::linear_product(A);
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

MatroidSpec random_matroid(Rng& rng, int kind, int lo, int hi) {
  switch (kind % 3) {
    case 0: return random_uniform(rng, pick(rng, lo, hi));
    case 1: return random_partition(rng, pick(rng, lo, hi));
    default: return random_graphic(rng, pick(rng, lo, hi));
  }
}

Outcome example_1() {
  Outcome o;
  const auto g = example_one();
  const auto fam = MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}});
  const auto t0 = Clock::now();
  const auto r = cap(g, fam);
  const double dt = seconds_since(t0);
  const double gb = coeff_sum_brute(g, fam);
  if (relerr(r.value, 4.0) > kExampleRel) o.fail(fmt("cap %.10g != 4", r.value));
  if (gb != 0.0) o.fail(fmt("g_B %.3g != 0", gb));
  if (dt >= 1.0) o.fail(fmt("runtime %.3g s", dt));
  if (o.pass) o.detail = fmt("cap %.10g, g_B 0, %.3g s", r.value, dt);
  return o;
}

Outcome example_2() {
  Outcome o;
  const auto g = PolynomialOracle::sparse(4, {{{1, 1, 0, 0}, 1.0}, {{0, 0, 1, 1}, 1.0}}, true);
  const auto part = MatroidSpec::partition(4, {{0, 1}, {2, 3}}, {1, 1});
  const double c = cap(g, part).value;
  const double grid = grid_cap_oracle(g, part);
  const double gb = coeff_sum_brute(g, part);
  if (c < 2.0 - kExampleRel) o.fail(fmt("cap %.10g below 2", c));
  if (relerr(c, grid) > kGridOracleRel) o.fail(fmt("cap %.10g vs grid %.10g", c, grid));
  if (gb != 0.0) o.fail(fmt("g_B %.3g != 0", gb));
  if (o.pass) o.detail = fmt("cap %.10g, grid %.10g, g_B 0", c, grid);
  return o;
}

Outcome closed_forms() {
  Outcome o;
  for (int n : {2, 3}) {
    const int m = n * n;
    std::vector<IndexSet> rows(n);
    for (int i = 0; i < m; ++i) rows[i / n].push_back(i);
    const auto g = PolynomialOracle::linear_product(Eigen::MatrixXd::Ones(n, m));
    const auto mat = MatroidSpec::partition(m, rows, std::vector<int>(n, 1));
    const double c = cap(g, mat).value;
    const double gb = coeff_sum_brute(g, mat);
    const double want_cap = std::pow(n, 2 * n);
    const double want_gb = std::pow(n, n) * factorial(n);
    if (relerr(c, want_cap) > kClosedFormRel) o.fail(fmt("n=%g: cap %.10g vs %.10g", n, c, want_cap));
    if (relerr(gb, want_gb) > 1e-12) o.fail(fmt("n=%g: g_B %.10g vs %.10g", n, gb, want_gb));
    if (relerr(c / gb, want_cap / want_gb) > kClosedFormRel) o.fail(fmt("n=%g: ratio %.10g", n, c / gb));
    o.detail += fmt("n=%g ratio %.8g; ", n, c / gb);
  }
  return o;
}

Outcome gurvits_sandwich() {
  Outcome o;
  Rng rng(1001);
  const auto t0 = Clock::now();
  int violations = 0;
  for (int k = 0; k < 50; ++k) {
    const int m = 2 + k % 5;
    const Eigen::MatrixXd A = random_nonneg(rng, m, m, 0.0, 1.0);
    const double per = permanent(A);
    const double c = gurvits_cap(PolynomialOracle::linear_product(A)).value;
    const double ratio = std::pow(m, m) / factorial(m);
    if (per > c * (1 + kGurvitsRel) || c > ratio * per * (1 + kGurvitsRel)) ++violations;
  }
  const double dt = seconds_since(t0);
  if (violations) o.fail(fmt("%g violations", violations));
  if (dt >= 60.0) o.fail(fmt("runtime %.3g s", dt));
  if (o.pass) o.detail = fmt("50 matrices, 0 violations, %.3g s", dt);
  return o;
}

Outcome duality() {
  Outcome o;
  Rng rng(1002);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto mat = random_matroid(rng, k, 3, 8);
    const auto g = (k / 3) % 2 == 0 ? random_product(rng, mat.n(), mat.m()) : random_determinantal(rng, mat.m(), mat.n());
    const double c = cap(g, mat).value;
    const double p = cap_primal(g, mat).value;
    const double e = relerr(c, p);
    worst = std::max(worst, e);
    if (e > kDualityRel) o.fail(fmt("instance %g: cap %.10g primal %.10g", k, c, p));
  }
  o.detail += fmt(" worst relative gap %.3g", worst);
  return o;
}

Outcome counting_sandwich() {
  Outcome o;
  Rng rng(1003);
  int determinantal = 0;
  for (int k = 0; k < 100; ++k) {
    const auto mat = k % 2 ? random_partition(rng, pick(rng, 3, 8)) : random_graphic(rng, pick(rng, 3, 8));
    const bool det = (k / 2) % 2 == 1;
    const auto g = det ? random_determinantal(rng, mat.m(), mat.n()) : random_product(rng, mat.n(), mat.m());
    const auto e = count_estimate(g, mat);
    const double gb = coeff_sum_brute(g, mat);
    if (e.lower > gb * (1 + kLowerSlack)) o.fail(fmt("instance %g: lower %.10g > g_B %.10g", k, e.lower, gb));
    if (gb > e.point * (1 + kCapSlack)) o.fail(fmt("instance %g: g_B %.10g > cap %.10g", k, gb, e.point));
    if (det) {
      // Determinantal generating polynomials are multilinear.
      ++determinantal;
      const auto ml = bound_M(mat, true);
      const auto sel = build_selection(dual(mat));
      if (ml.value > sel.c * std::pow(2.0, mat.m()) / sel.kappa * (1 + 1e-12))
        o.fail(fmt("instance %g: multilinear bound %.10g exceeds the 2^m form", k, ml.value));
      if (e.point / ml.value > gb * (1 + kLowerSlack))
        o.fail(fmt("instance %g: cap/M_lin %.10g > g_B %.10g", k, e.point / ml.value, gb));
    }
  }
  if (o.pass) o.detail = fmt("100 instances, %g multilinear checks", determinantal);
  return o;
}

Outcome optimization_sandwich() {
  Outcome o;
  Rng rng(1004);
  for (int k = 0; k < 50; ++k) {
    const auto mat = random_matroid(rng, k, 3, 8);
    const auto g = (k / 3) % 2 == 0 ? random_product(rng, mat.n(), mat.m()) : random_determinantal(rng, mat.m(), mat.n());
    const auto e = max_estimate(g, mat);
    const double mx = max_coeff_brute(g, mat);
    if (e.lower > mx * (1 + kLowerSlack)) o.fail(fmt("instance %g: lower %.10g > max %.10g", k, e.lower, mx));
    if (mx > e.upper * (1 + kOptRel)) o.fail(fmt("instance %g: max %.10g > OPT %.10g", k, mx, e.upper));
  }
  if (o.pass) o.detail = "50 instances";
  return o;
}

Outcome subdeterminants() {
  Outcome o;
  Rng rng(1005);
  for (int k = 0; k < 25; ++k) {
    const MatroidSpec mat = k % 3 == 0 ? triangle() : k % 3 == 1 ? k4() : random_partition(rng, pick(rng, 3, 8));
    const Eigen::MatrixXd L = random_psd(rng, mat.m(), mat.m());
    double best = 0.0;
    for (const auto& s : enumerate_bases(mat)) best = std::max(best, subset_det(L, s));
    const auto e = subdet_max(L, mat);
    if (e.lower > best * (1 + kLowerSlack)) o.fail(fmt("kernel %g: lower %.10g > max minor %.10g", k, e.lower, best));
    if (best > e.upper * (1 + kOptRel)) o.fail(fmt("kernel %g: max minor %.10g > upper %.10g", k, best, e.upper));
    if (e.a_value > std::exp(static_cast<double>(mat.n())) * (1 + 1e-12))
      o.fail(fmt("kernel %g: A bound %.10g exceeds e^n", k, e.a_value));
  }
  if (o.pass) o.detail = "25 kernels";
  return o;
}

Outcome entropy() {
  Outcome o;
  Rng rng(1006);
  double worst = 0.0;
  for (int k = 0; k < 25; ++k) {
    const int m = pick(rng, 3, 6);
    const auto mat = k % 2 ? random_partition(rng, m) : random_uniform(rng, m);
    const auto p = PolynomialOracle::sparse(m, expand(random_product(rng, mat.n(), m)));
    const double a = entropy_cap(p, mat).value;
    const double b = cap(p, mat).value;
    worst = std::max(worst, relerr(a, b));
    if (relerr(a, b) > kEntropyRel) o.fail(fmt("instance %g: entropy %.10g cap %.10g", k, a, b));
  }
  // Normalized polynomials whose marginal already lies in the base polytope.
  const std::vector<std::pair<PolynomialOracle, MatroidSpec>> normalized{
      {PolynomialOracle::sparse(2, {{{1, 1}, 1.0}}), MatroidSpec::uniform(2, 2)},
      {PolynomialOracle::sparse(3, {{{1, 1, 0}, 1. / 3}, {{1, 0, 1}, 1. / 3}, {{0, 1, 1}, 1. / 3}}),
       MatroidSpec::uniform(3, 2)},
      {PolynomialOracle::sparse(4, {{{1, 0, 1, 0}, .25}, {{1, 0, 0, 1}, .25}, {{0, 1, 1, 0}, .25}, {{0, 1, 0, 1}, .25}}),
       MatroidSpec::partition(4, {{0, 1}, {2, 3}}, {1, 1})}};
  for (const auto& [p, mat] : normalized) {
    const double v = entropy_cap(p, mat).value;
    if (std::abs(v - 1.0) > kNormalizedAbs) o.fail(fmt("normalized case returned %.12g", v));
  }
  if (o.pass) o.detail = fmt("worst relative gap %.3g, normalized cases within 1e-6", worst);
  return o;
}

Outcome selections() {
  Outcome o;
  Rng rng(1007);
  std::vector<MatroidSpec> mats{MatroidSpec::uniform(10, 5), MatroidSpec::uniform(6, 2), triangle(), k4(),
                                MatroidSpec::partition(10, {{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}}, {2, 2, 1}),
                                MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}}, true)};
  for (int k = 0; k < 3; ++k) {
    mats.push_back(random_partition(rng, pick(rng, 4, 10)));
    mats.push_back(random_graphic(rng, pick(rng, 4, 10)));
    const int m = pick(rng, 3, 7);
    mats.push_back(MatroidSpec::linear(random_gauss(rng, m, pick(rng, 1, m - 1))));
  }
  mats.push_back(MatroidSpec::linear(k4().representation(), true));
  int checked = 0;
  for (const auto& mat : mats) {
    const auto sel = build_selection(mat);
    std::set<IndexSet> bases;
    for (const auto& b : enumerate_bases(mat)) bases.insert(b);
    std::vector<int> mask(mat.m(), 0);
    std::fill(mask.begin(), mask.begin() + mat.n(), 1);
    do {
      IndexSet s;
      for (int i = 0; i < mat.m(); ++i) {
        if (mask[i]) s.push_back(i);
      }
      const double coeff = coeff_extract_set(sel.h, s);
      const bool in = bases.count(s) > 0;
      if (in && (coeff < 1.0 - kSelectionTol || coeff > sel.c * (1 + kSelectionTol)))
        o.fail(sel.construction + ": base coefficient " + std::to_string(coeff) + " outside [1, c]");
      if (!in && std::abs(coeff) > kSelectionTol)
        o.fail(sel.construction + ": coefficient " + std::to_string(coeff) + " off the family");
      ++checked;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    const double lc = lower_cap(sel.h, mat).value;
    if (lc < sel.kappa - kKappaAbs) o.fail(sel.construction + ": lower capacity below kappa");
  }
  // Partition kappa is the product of b^b / b! over the blocks.
  const auto part = build_selection(MatroidSpec::partition(10, {{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}}, {2, 2, 1}));
  if (std::abs(part.kappa - 2.0 * 2.0 * 1.0) > 1e-12) o.fail(fmt("partition kappa %.10g != 4", part.kappa));
  if (o.pass) o.detail = fmt("%g matroids, %g coefficients", static_cast<double>(mats.size()), checked);
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::string dir = CAPCOUNT_TEST_DATA;
  const std::vector<std::vector<std::string>> runs{
      {"capacity", "--problem", dir + "/ex1.json", "--problem", dir + "/perm3.json", "--seed", "11"},
      {"count", "--problem", dir + "/perm3.json", "--seed", "11", "--verify"},
      {"maximize", "--problem", dir + "/skewed.json", "--seed", "11"},
      {"subdet", "--problem", dir + "/diag.json", "--seed", "11"},
      {"entropy", "--problem", dir + "/ex2_sparse.json", "--seed", "11"},
      {"capacity", "--problem", dir + "/ex1.json", "--problem", dir + "/perm3.json", "--jobs", "2", "--format", "tsv"}};
  for (const auto& args : runs) {
    std::ostringstream a, b, ea, eb;
    const int ca = cli::run(args, a, ea);
    const int cb = cli::run(args, b, eb);
    if (ca != cb || a.str() != b.str() || a.str().empty()) o.fail(args[0] + " documents differ");
  }
  if (o.pass) o.detail = fmt("%g command lines, byte-identical", static_cast<double>(runs.size()));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"example-1", example_1},
      {"example-2", example_2},
      {"grid-closed-forms", closed_forms},
      {"gurvits-permanent-sandwich", gurvits_sandwich},
      {"duality", duality},
      {"counting-sandwich", counting_sandwich},
      {"optimization-sandwich", optimization_sandwich},
      {"subdeterminant-interval", subdeterminants},
      {"entropy-equivalence", entropy},
      {"selection-certificates", selections},
      {"determinism", determinism}};
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
