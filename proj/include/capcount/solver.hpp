#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace capcount {

enum class SolveStatus { Converged, BoxActive, BudgetExhausted };

std::string to_string(SolveStatus status);

/// Objective value and derivatives at a point. The Hessian may be left empty,
/// in which case the solver differentiates the gradient numerically.
struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hessian;
};

using Objective = std::function<ObjectiveEval(const Eigen::VectorXd& y, bool want_hessian)>;

/// Linear inequality <a, y> >= b.
struct Cut {
  Eigen::VectorXd a;
  double b = 0.0;
};

/// Returns a violated cut, or nothing when y is feasible.
using Separation = std::function<std::optional<Cut>(const Eigen::VectorXd& y)>;

struct ConvexProgram {
  int dim = 0;
  Objective objective;
  Separation separation;        // optional
  std::vector<Cut> cuts;        // constraints known up front
  double radius = 20.0;         // box |y_i| <= radius
  double eps = 1e-6;            // additive target on the objective
  int budget = 10000;           // Newton iterations
  Eigen::VectorXd start;        // optional warm start
};

struct MinimizeResult {
  Eigen::VectorXd point;
  double value = 0.0;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  std::vector<Cut> active;       // cuts tight at the solution (box cuts excluded)
  std::vector<double> multipliers;
};

/// Convex minimization by constraint generation: the separation oracle
/// supplies cuts, each cut set is solved by an augmented Lagrangian with
/// damped Newton inner steps, and box faces enter only when crossed.
MinimizeResult minimize(const ConvexProgram& prog);

struct InnerSolution {
  double value = 0.0;
  Eigen::VectorXd supergradient;  // with respect to the outer variable
  Eigen::VectorXd warm;           // inner optimum, reused as the next start
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
};

/// max over the base polytope of a concave function whose value and
/// supergradient come from an inner minimization.
struct SaddleProgram {
  int dim = 0;
  /// Vertex (0/1 vector) minimizing <c, v> over the polytope.
  std::function<Eigen::VectorXd(const Eigen::VectorXd& c)> linear_oracle;
  std::function<InnerSolution(const Eigen::VectorXd& x, const Eigen::VectorXd& warm)> inner;
  std::vector<Eigen::VectorXd> start_vertices;  // defaults to one oracle call
  double eps = 1e-6;                            // stop once the duality gap is below
  int budget = 500;                             // outer iterations
  bool concavity_check = false;
};

struct SaddleResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  int inner_iterations = 0;
  int concavity_violations = 0;
  Eigen::VectorXd inner_point;
  SolveStatus inner_status = SolveStatus::Converged;  // of the final inner solve
};

/// Frank-Wolfe ascent with away steps and an exact line search on the
/// directional supergradient.
SaddleResult saddle(const SaddleProgram& prog);

}  // namespace capcount
