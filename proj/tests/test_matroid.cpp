#include <doctest.h>

#include <cmath>
#include <set>

#include "capcount/capacity.hpp"
#include "capcount/error.hpp"
#include "capcount/matroid.hpp"
#include "capcount/reference.hpp"
#include "support/generators.hpp"

using namespace capcount;
using namespace testsupport;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::set<IndexSet> base_set(const MatroidSpec& mat) {
  const auto b = enumerate_bases(mat);
  return {b.begin(), b.end()};
}

// The supported kinds at a random size with m <= max_m.
std::vector<MatroidSpec> random_matroids(Rng& rng, int max_m) {
  std::vector<MatroidSpec> out;
  out.push_back(random_uniform(rng, pick(rng, 2, max_m)));
  out.push_back(random_partition(rng, pick(rng, 2, max_m)));
  out.push_back(random_graphic(rng, pick(rng, 3, max_m)));
  const int m = pick(rng, 3, max_m);
  out.push_back(MatroidSpec::linear(random_gauss(rng, m, pick(rng, 1, m - 1))));
  // A linear matroid with dependencies: duplicate and zero rows.
  Eigen::MatrixXd V = random_gauss(rng, m, 2);
  V.row(m - 1) = V.row(0);
  V.row(1).setZero();
  out.push_back(MatroidSpec::linear(V));
  out.push_back(MatroidSpec::explicit_family(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}));
  return out;
}

}  // namespace

TEST_CASE("min_weight_base examples") {
  auto w = min_weight_base(MatroidSpec::uniform(4, 2), vec({3, 1, 2, 4}));
  CHECK(w.base == IndexSet{1, 2});
  CHECK(w.weight == doctest::Approx(3.0));
  w = min_weight_base(triangle(), vec({5, 1, 2}));
  CHECK(w.base == IndexSet{1, 2});
  CHECK(w.weight == doctest::Approx(3.0));
  w = min_weight_base(MatroidSpec::partition(4, {{0, 1}, {2, 3}}, {1, 1}), vec({2, 9, 4, 1}));
  CHECK(w.base == IndexSet{0, 3});
  CHECK(w.weight == doctest::Approx(3.0));
  w = min_weight_base(MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}}), vec({1, 1, 0, 3}));
  CHECK(w.base == IndexSet{0, 1});
}

TEST_CASE("membership in the base polytope") {
  const auto ex = MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}});
  CHECK(membership_P(ex, vec({.5, .5, .5, .5})).inside);
  const auto out = membership_P(ex, vec({1, 0, 1, 0}));
  CHECK_FALSE(out.inside);
  CHECK(out.a.dot(vec({1, 0, 1, 0})) < out.b);
  CHECK(membership_P(MatroidSpec::uniform(3, 2), vec({2. / 3, 2. / 3, 2. / 3})).inside);
  CHECK_FALSE(membership_P(MatroidSpec::uniform(3, 2), vec({1, 1, 1})).inside);
}

TEST_CASE("dual examples") {
  const auto u = dual(MatroidSpec::uniform(4, 2));
  CHECK(u.kind() == MatroidKind::Uniform);
  CHECK(u.n() == 2);
  const auto p = dual(MatroidSpec::partition(4, {{0, 1}, {2, 3}}, {1, 1}));
  CHECK(p.kind() == MatroidKind::Partition);
  CHECK(p.quotas() == std::vector<int>{1, 1});
  const auto e = dual(MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}}));
  CHECK(base_set(e) == std::set<IndexSet>{{0, 1}, {2, 3}});
  const auto sr = dual(MatroidSpec::explicit_family(3, {{0, 1}, {1, 2}}, true));
  CHECK(sr.strongly_rayleigh_asserted());
}

TEST_CASE("enumerate_bases examples") {
  CHECK(enumerate_bases(MatroidSpec::uniform(4, 2)).size() == 6);
  CHECK(enumerate_bases(triangle()) == std::vector<IndexSet>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(enumerate_bases(MatroidSpec::partition(4, {{0, 1}, {2, 3}}, {1, 1})).size() == 4);
  CHECK(enumerate_bases(k4()).size() == 16);
  CHECK_THROWS_AS(enumerate_bases(MatroidSpec::uniform(20, 10), 1000), LimitError);
}

TEST_CASE("unbalance") {
  CHECK(unbalance(Eigen::MatrixXd::Identity(3, 3), {{0, 1, 2}}) == doctest::Approx(1.0));
  Eigen::MatrixXd V(3, 2);
  V << 1, 0, 0, 1, 1, 1;
  CHECK(unbalance(V, enumerate_bases(MatroidSpec::linear(V))) == doctest::Approx(1.0));
  const auto g = k4();
  CHECK(unbalance(g.representation(), enumerate_bases(g)) == doctest::Approx(1.0));
  V << 1, 0, 0, 2, 1, 1;
  CHECK(unbalance(V, enumerate_bases(MatroidSpec::linear(V))) == doctest::Approx(4.0));
}

TEST_CASE("build_selection examples") {
  auto s = build_selection(MatroidSpec::partition(2, {{0, 1}}, {1}));
  CHECK(s.c == 1.0);
  CHECK(s.kappa == doctest::Approx(1.0));
  CHECK(s.h.evaluate(vec({2, 3})) == doctest::Approx(5.0));
  s = build_selection(MatroidSpec::partition(3, {{0, 1, 2}}, {2}));
  CHECK(s.kappa == doctest::Approx(2.0));
  CHECK(s.h.evaluate(vec({1, 1, 1})) == doctest::Approx(4.5));
  s = build_selection(MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}}, true));
  CHECK(s.c == 1.0);
  CHECK(s.kappa == 1.0);
  CHECK(s.h.evaluate(vec({1, 2, 3, 4})) == doctest::Approx(14.0));
  CHECK_THROWS_AS(build_selection(MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}, {0, 2}})), UnsupportedError);
}

TEST_CASE("explicit families that are not matroids are flagged") {
  CHECK_FALSE(MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}}).is_matroid());
  CHECK(MatroidSpec::explicit_family(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}).is_matroid());
  CHECK_THROWS_AS(MatroidSpec::explicit_family(3, {{0, 1}, {2}}), DomainError);
  CHECK_THROWS_AS(MatroidSpec::partition(3, {{0, 1}, {1, 2}}, {1, 1}), DomainError);
  CHECK_THROWS_AS(MatroidSpec::uniform(3, 4), DomainError);
}

TEST_CASE("property: greedy base matches brute force") {
  Rng rng(21);
  for (int round = 0; round < 10; ++round) {
    for (const auto& mat : random_matroids(rng, 12)) {
      if (mat.m() > 12) continue;
      const auto bases = enumerate_bases(mat);
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd w = random_gauss(rng, mat.m(), 1).col(0);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : bases) best = std::min(best, indicator(mat.m(), s).dot(w));
        const auto got = min_weight_base(mat, w);
        CHECK(got.weight == doctest::Approx(best).epsilon(1e-12));
        CHECK(mat.is_base(got.base));
      }
    }
  }
}

TEST_CASE("property: dual is an involution on base families") {
  Rng rng(22);
  for (int round = 0; round < 10; ++round) {
    for (const auto& mat : random_matroids(rng, 12)) {
      const auto dd = dual(dual(mat));
      CHECK(base_set(dd) == base_set(mat));
      for (const auto& s : enumerate_bases(dual(mat))) CHECK(static_cast<int>(s.size()) == mat.m() - mat.n());
    }
  }
}

TEST_CASE("property: membership answers carry certificates") {
  Rng rng(23);
  for (int round = 0; round < 8; ++round) {
    for (const auto& mat : random_matroids(rng, 7)) {
      const auto verts = vertices_of(mat);
      for (int k = 0; k < 6; ++k) {
        Eigen::VectorXd x;
        if (k % 2 == 0) {
          // Random convex combination of vertices.
          Eigen::VectorXd lam = random_positive(rng, static_cast<int>(verts.size()), 0.0, 1.0);
          lam /= lam.sum();
          x = Eigen::VectorXd::Zero(mat.m());
          for (std::size_t j = 0; j < verts.size(); ++j) x += lam[j] * verts[j];
        } else {
          x = random_positive(rng, mat.m(), 0.0, 1.0);
          x *= mat.n() / x.sum();
        }
        const auto r = membership_P(mat, x);
        if (r.inside) {
          CHECK(convex_weights(verts, x, 1e-6).has_value());
        } else {
          CHECK(r.a.dot(x) < r.b);
          for (const auto& v : verts) CHECK(r.a.dot(v) >= r.b - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("property: complements of marginals lie in the dual polytope") {
  Rng rng(24);
  for (int round = 0; round < 10; ++round) {
    for (const auto& mat : random_matroids(rng, 8)) {
      const auto verts = vertices_of(mat);
      Eigen::VectorXd lam = random_positive(rng, static_cast<int>(verts.size()), 0.0, 1.0);
      lam /= lam.sum();
      Eigen::VectorXd x = Eigen::VectorXd::Zero(mat.m());
      for (std::size_t j = 0; j < verts.size(); ++j) x += lam[j] * verts[j];
      CHECK(membership_P(dual(mat), Eigen::VectorXd::Ones(mat.m()) - x, 1e-8).inside);
    }
  }
}

TEST_CASE("property: selection coefficients and lower capacity") {
  Rng rng(25);
  std::vector<MatroidSpec> mats{triangle(), k4(), MatroidSpec::uniform(5, 2),
                                MatroidSpec::partition(5, {{0, 1, 2}, {3, 4}}, {2, 1}),
                                MatroidSpec::explicit_family(4, {{0, 1}, {2, 3}}, true)};
  for (int k = 0; k < 3; ++k) {
    mats.push_back(random_partition(rng, pick(rng, 3, 8)));
    mats.push_back(random_graphic(rng, pick(rng, 3, 8)));
    const int m = pick(rng, 3, 6);
    mats.push_back(MatroidSpec::linear(random_gauss(rng, m, pick(rng, 1, m - 1))));
  }
  for (const auto& mat : mats) {
    const auto sel = build_selection(mat);
    CHECK(sel.c >= 1.0);
    const auto bases = base_set(mat);
    std::vector<int> mask(mat.m(), 0);
    std::fill(mask.begin(), mask.begin() + mat.n(), 1);
    do {
      IndexSet s;
      for (int i = 0; i < mat.m(); ++i) {
        if (mask[i]) s.push_back(i);
      }
      const double coeff = coeff_extract_set(sel.h, s);
      if (bases.count(s)) {
        CHECK(coeff >= 1.0 - 1e-9);
        CHECK(coeff <= sel.c * (1.0 + 1e-9));
      } else {
        CHECK(std::abs(coeff) <= 1e-9);
      }
    } while (std::prev_permutation(mask.begin(), mask.end()));
    CHECK(lower_cap(sel.h, mat).value >= sel.kappa - 1e-6);
  }
}
