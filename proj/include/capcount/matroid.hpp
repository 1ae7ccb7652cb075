#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "capcount/poly.hpp"

namespace capcount {

enum class MatroidKind { Uniform, Partition, Graphic, Linear, Explicit };

std::string to_string(MatroidKind kind);

using IndexSet = std::vector<int>;

/// A family of n-subsets of {0..m-1}, given structurally.
///
/// Explicit families are accepted even when they violate the exchange axiom
/// (is_matroid() reports the outcome of the check), because capacities are
/// defined for arbitrary families; bound certification refuses them.
class MatroidSpec {
 public:
  static MatroidSpec uniform(int m, int n);
  static MatroidSpec partition(int m, std::vector<IndexSet> parts, std::vector<int> quotas);
  /// Edges are (u, v) vertex pairs, vertices numbered 0..vertices-1.
  static MatroidSpec graphic(int vertices, std::vector<std::pair<int, int>> edges);
  /// Row i of V represents element i. `regular` records that V comes from a
  /// totally unimodular representation (all nonzero base minors equal).
  static MatroidSpec linear(const Eigen::MatrixXd& V, bool regular = false);
  static MatroidSpec explicit_family(int m, std::vector<IndexSet> bases,
                                     bool assert_strongly_rayleigh = false);

  MatroidKind kind() const { return kind_; }
  int m() const { return m_; }
  int n() const { return n_; }
  const std::vector<IndexSet>& parts() const { return parts_; }
  const std::vector<int>& quotas() const { return quotas_; }
  int vertices() const { return vertices_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  /// Linear/graphic: an m x n full-column-rank representation.
  const Eigen::MatrixXd& representation() const { return rep_; }
  /// Explicit kind only: the bases, sorted and in lexicographic order.
  const std::vector<IndexSet>& bases() const { return bases_; }

  bool is_matroid() const { return is_matroid_; }
  bool strongly_rayleigh_asserted() const { return sr_; }
  bool is_regular() const { return regular_; }

  int rank_of(const IndexSet& set) const;
  bool is_base(const IndexSet& set) const;

 private:
  MatroidSpec() = default;

  MatroidKind kind_ = MatroidKind::Uniform;
  int m_ = 0;
  int n_ = 0;
  std::vector<IndexSet> parts_;
  std::vector<int> quotas_;
  std::vector<int> part_of_;
  int vertices_ = 0;
  std::vector<std::pair<int, int>> edges_;
  Eigen::MatrixXd rep_;
  std::vector<IndexSet> bases_;
  std::vector<std::uint64_t> masks_;
  bool is_matroid_ = true;
  bool sr_ = false;
  bool regular_ = false;
};

struct WeightedBase {
  IndexSet base;
  double weight = 0.0;
};

/// Minimum-weight base by the greedy algorithm (brute force for explicit
/// families). Ties go to the smaller index.
WeightedBase min_weight_base(const MatroidSpec& mat, const Eigen::VectorXd& w);

/// Hyperplane <a, x> >= b satisfied by every point of the base polytope.
struct Membership {
  bool inside = true;
  Eigen::VectorXd a;
  double b = 0.0;
  double violation = 0.0;  // b - <a, x> for the returned hyperplane
};

/// Decides x in P(B) up to tol. Matroids with m <= 20 are checked against the
/// full rank inequality system; everything else by a min-norm-point
/// projection onto the vertex hull.
Membership membership_P(const MatroidSpec& mat, const Eigen::VectorXd& x, double tol = 1e-9);

MatroidSpec dual(const MatroidSpec& mat);

/// All bases in lexicographic order. Throws LimitError once more than
/// `limit` bases are found.
std::vector<IndexSet> enumerate_bases(const MatroidSpec& mat, long long limit = 100000);

/// max/min ratio of Gram determinants det(V_S V_S^T) over the given bases.
double unbalance(const Eigen::MatrixXd& V, const std::vector<IndexSet>& bases);

/// Real stable polynomial h whose square-free degree-n coefficients lie in
/// [1, c] on the family and vanish elsewhere, with lowerCap(h) >= kappa.
struct SelectionPoly {
  PolynomialOracle h;
  double c = 1.0;
  double kappa = 1.0;
  std::string construction;
};

SelectionPoly build_selection(const MatroidSpec& mat);

/// Indicator vector of a set.
Eigen::VectorXd indicator(int m, const IndexSet& set);

}  // namespace capcount
