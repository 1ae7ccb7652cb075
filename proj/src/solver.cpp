#include "capcount/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capcount/error.hpp"

namespace capcount {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMax = 1e10;

// Augmented Lagrangian term for the inequality c >= 0 with multiplier lam.
struct Penalty {
  double value, slope, curvature;
};

Penalty penalty(double c, double lam, double rho) {
  if (c < lam / rho) return {-lam * c + 0.5 * rho * c * c, -lam + rho * c, rho};
  return {-0.5 * lam * lam / rho, 0.0, 0.0};
}

struct CutState {
  Cut cut;
  double lam = 0.0;
  bool box = false;
};

class Engine {
 public:
  explicit Engine(const ConvexProgram& prog) : prog_(prog) {
    y_ = prog.start.size() == prog.dim ? prog.start : Eigen::VectorXd::Zero(prog.dim);
    for (const auto& c : prog.cuts) cuts_.push_back({c, 0.0, false});
    box_lo_.assign(prog.dim, false);
    box_hi_.assign(prog.dim, false);
    feas_tol_ = 1e-10 * (1.0 + prog.radius);
  }

  MinimizeResult run() {
    bool exhausted = false;
    for (int round = 0; round < 10000 && !exhausted; ++round) {
      exhausted = !augmented_lagrangian();
      if (exhausted) break;
      if (!add_violated_cuts()) break;
    }
    MinimizeResult out;
    out.point = y_;
    out.value = prog_.objective(y_, false).value;
    out.iterations = iterations_;
    bool box_tight = false;
    for (const auto& s : cuts_) {
      const double c = s.cut.a.dot(y_) - s.cut.b;
      const bool tight = c <= 1e-7 * (1.0 + prog_.radius);
      if (s.box) {
        box_tight = box_tight || tight || s.lam > 0.0;
      } else if (tight) {
        out.active.push_back(s.cut);
        out.multipliers.push_back(s.lam);
      }
    }
    for (int i = 0; i < prog_.dim; ++i) box_tight = box_tight || std::abs(y_[i]) >= prog_.radius * (1.0 - 1e-9);
    out.status = exhausted ? SolveStatus::BudgetExhausted
                           : (box_tight ? SolveStatus::BoxActive : SolveStatus::Converged);
    return out;
  }

 private:
  ObjectiveEval eval(const Eigen::VectorXd& y, bool hessian) const {
    ObjectiveEval ev = prog_.objective(y, hessian);
    if (hessian && ev.hessian.size() == 0 && std::isfinite(ev.value)) {
      const int n = prog_.dim;
      ev.hessian.resize(n, n);
      for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(y[j]));
        Eigen::VectorXd up = y, dn = y;
        up[j] += h;
        dn[j] -= h;
        ev.hessian.col(j) = (prog_.objective(up, false).grad - prog_.objective(dn, false).grad) / (2.0 * h);
      }
      ev.hessian = 0.5 * (ev.hessian + ev.hessian.transpose()).eval();
    }
    return ev;
  }

  double lagrangian(const Eigen::VectorXd& y, double f) const {
    double total = f;
    for (const auto& s : cuts_) total += penalty(s.cut.a.dot(y) - s.cut.b, s.lam, rho_).value;
    return total;
  }

  bool outside_box() const {
    for (int i = 0; i < prog_.dim; ++i) {
      if ((y_[i] > prog_.radius + feas_tol_ && !box_hi_[i]) || (y_[i] < -prog_.radius - feas_tol_ && !box_lo_[i])) {
        return true;
      }
    }
    return false;
  }

  enum class Step { Done, Exhausted, LeftBox };

  // Damped Newton on the augmented Lagrangian. Stops early once the iterate
  // crosses a box face that is not yet a constraint.
  Step newton() {
    const int n = prog_.dim;
    const double max_step = std::max(1.0, prog_.radius);
    for (int it = 0; it < 200; ++it) {
      if (iterations_ >= prog_.budget) return Step::Exhausted;
      ++iterations_;
      ObjectiveEval ev = eval(y_, true);
      if (!std::isfinite(ev.value)) throw DomainError("minimize: objective is not finite at the current point");
      double L = ev.value;
      Eigen::VectorXd g = ev.grad;
      Eigen::MatrixXd H = ev.hessian;
      for (const auto& s : cuts_) {
        const Penalty p = penalty(s.cut.a.dot(y_) - s.cut.b, s.lam, rho_);
        L += p.value;
        if (p.slope != 0.0) g += p.slope * s.cut.a;
        if (p.curvature != 0.0) H += p.curvature * (s.cut.a * s.cut.a.transpose());
      }
      double delta = 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      Eigen::VectorXd d;
      for (int attempt = 0; attempt < 30; ++attempt) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H + delta * Eigen::MatrixXd::Identity(n, n));
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
          d = -ldlt.solve(g);
          if (d.allFinite() && g.dot(d) < 0.0) break;
        }
        delta *= 100.0;
        d.resize(0);
      }
      if (d.size() == 0) d = -g;
      const double decrement = -g.dot(d);
      if (decrement <= 2.0 * newton_tol() || g.norm() == 0.0) return Step::Done;
      const double norm = d.norm();
      if (norm > max_step) d *= max_step / norm;
      const double slope = g.dot(d);
      double t = 1.0;
      bool moved = false;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        const Eigen::VectorXd trial = y_ + t * d;
        const double f = prog_.objective(trial, false).value;
        if (std::isfinite(f) && lagrangian(trial, f) <= L + 1e-4 * t * slope) {
          y_ = trial;
          moved = true;
          break;
        }
      }
      if (!moved) return Step::Done;
      if (outside_box()) return Step::LeftBox;
    }
    return Step::Done;
  }

  double newton_tol() const { return std::min(1e-3 * prog_.eps, 1e-10); }

  // Outer multiplier loop on the current cut set.
  bool augmented_lagrangian() {
    double prev = kInf;
    for (int k = 0; k < 60; ++k) {
      const Step st = newton();
      if (st == Step::Exhausted) return false;
      if (st == Step::LeftBox) return true;
      double viol = 0.0, gap = 0.0;
      for (auto& s : cuts_) {
        const double c = s.cut.a.dot(y_) - s.cut.b;
        viol = std::max(viol, -c);
        s.lam = std::max(0.0, s.lam - rho_ * c);
        gap += s.lam * std::max(c, 0.0);
      }
      if (viol <= feas_tol_ && gap <= 0.1 * prog_.eps) return true;
      if (viol > 0.25 * prev) rho_ = std::min(rho_ * 10.0, kRhoMax);
      prev = viol;
    }
    return true;
  }

  bool add_violated_cuts() {
    bool added = false;
    if (prog_.separation) {
      if (auto cut = prog_.separation(y_)) {
        if (cut->b - cut->a.dot(y_) > feas_tol_) {
          bool known = false;
          for (const auto& s : cuts_) known = known || (s.cut.b == cut->b && s.cut.a == cut->a);
          if (!known) {
            cuts_.push_back({*cut, 0.0, false});
            added = true;
          } else if (rho_ < kRhoMax) {
            rho_ = std::min(rho_ * 10.0, kRhoMax);
            added = true;
          }
        }
      }
    }
    const double R = prog_.radius;
    for (int i = 0; i < prog_.dim; ++i) {
      if (y_[i] > R + feas_tol_ && !box_hi_[i]) {
        cuts_.push_back({Cut{-Eigen::VectorXd::Unit(prog_.dim, i), -R}, 0.0, true});
        box_hi_[i] = true;
        added = true;
      }
      if (y_[i] < -R - feas_tol_ && !box_lo_[i]) {
        cuts_.push_back({Cut{Eigen::VectorXd::Unit(prog_.dim, i), -R}, 0.0, true});
        box_lo_[i] = true;
        added = true;
      }
    }
    return added;
  }

  const ConvexProgram& prog_;
  Eigen::VectorXd y_;
  std::vector<CutState> cuts_;
  std::vector<bool> box_lo_, box_hi_;
  double rho_ = 10.0;
  double feas_tol_ = 1e-10;
  int iterations_ = 0;
};

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::BoxActive: return "box_active";
    case SolveStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

MinimizeResult minimize(const ConvexProgram& prog) {
  if (prog.dim <= 0) throw DomainError("minimize: dimension must be positive");
  if (!prog.objective) throw DomainError("minimize: missing objective");
  if (!(prog.radius > 0.0) || !(prog.eps > 0.0)) throw DomainError("minimize: radius and eps must be positive");
  for (const auto& c : prog.cuts) {
    if (c.a.size() != prog.dim) throw DimensionError("minimize: cut has wrong dimension");
  }
  Engine engine(prog);
  return engine.run();
}

namespace {

struct Atom {
  Eigen::VectorXd v;
  double weight;
};

}  // namespace

SaddleResult saddle(const SaddleProgram& prog) {
  const int m = prog.dim;
  if (m <= 0) throw DomainError("saddle: dimension must be positive");
  if (!prog.linear_oracle || !prog.inner) throw DomainError("saddle: missing oracle");

  std::vector<Atom> atoms;
  auto add_atom = [&](const Eigen::VectorXd& v, double w) {
    for (auto& a : atoms) {
      if (a.v == v) {
        a.weight += w;
        return;
      }
    }
    atoms.push_back({v, w});
  };
  std::vector<Eigen::VectorXd> starts = prog.start_vertices;
  if (starts.empty()) starts.push_back(prog.linear_oracle(Eigen::VectorXd::Zero(m)));
  for (const auto& v : starts) add_atom(v, 1.0 / static_cast<double>(starts.size()));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (const auto& a : atoms) x += a.weight * a.v;

  SaddleResult out;
  InnerSolution cur = prog.inner(x, Eigen::VectorXd());
  out.inner_iterations += cur.iterations;
  auto value_of = [](const InnerSolution& s) { return std::isfinite(s.value) ? s.value : -kInf; };

  out.status = SolveStatus::BudgetExhausted;
  int stall = 0;
  for (int iter = 0; iter < prog.budget; ++iter) {
    out.iterations = iter + 1;
    const Eigen::VectorXd& s = cur.supergradient;
    const Eigen::VectorXd v_fw = prog.linear_oracle(-s);
    const double gap = s.dot(v_fw - x);
    out.gap = gap;
    if (!(gap > prog.eps)) {
      out.status = SolveStatus::Converged;
      break;
    }
    std::size_t away = 0;
    for (std::size_t k = 1; k < atoms.size(); ++k) {
      if (s.dot(atoms[k].v) < s.dot(atoms[away].v)) away = k;
    }
    const double gap_away = s.dot(x - atoms[away].v);
    const bool fw_step = atoms.size() == 1 || gap >= gap_away;
    const Eigen::VectorXd d = fw_step ? Eigen::VectorXd(v_fw - x) : Eigen::VectorXd(x - atoms[away].v);
    const double gmax = fw_step ? 1.0 : atoms[away].weight / (1.0 - atoms[away].weight);

    // Line search on phi'(gamma) = <supergradient(x + gamma d), d>.
    const double d0 = s.dot(d);
    double lo = 0.0, hi = gmax, dlo = d0, dhi = 0.0;
    InnerSolution best = cur;
    double gamma = 0.0;
    InnerSolution at_hi = prog.inner(x + gmax * d, cur.warm);
    out.inner_iterations += at_hi.iterations;
    const bool hi_finite = std::isfinite(at_hi.value);
    dhi = hi_finite ? at_hi.supergradient.dot(d) : -kInf;
    if (hi_finite && dhi >= 0.0) {
      gamma = gmax;
      best = at_hi;
    } else {
      if (hi_finite && value_of(at_hi) > value_of(best)) {
        best = at_hi;
        gamma = gmax;
      }
      int side = 0;
      for (int k = 0; k < 40; ++k) {
        // Secant step when it lands well inside the bracket, bisection
        // otherwise; near vertices the slope at hi can be huge.
        double mid = 0.5 * (lo + hi);
        if (std::isfinite(dhi)) {
          const double sec = lo + (hi - lo) * dlo / (dlo - dhi);
          if (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) mid = sec;
        }
        InnerSolution at = prog.inner(x + mid * d, best.warm);
        out.inner_iterations += at.iterations;
        const double dm = std::isfinite(at.value) ? at.supergradient.dot(d) : -kInf;
        if (value_of(at) >= value_of(best)) {
          best = at;
          gamma = mid;
        }
        if (std::abs(dm) <= 1e-3 * d0 || hi - lo <= 1e-9 * gmax) break;
        if (dm > 0.0) {
          lo = mid;
          dlo = dm;
          if (side == 1 && std::isfinite(dhi)) dhi *= 0.5;
          side = 1;
        } else {
          hi = mid;
          dhi = dm;
          if (side == -1) dlo *= 0.5;
          side = -1;
        }
      }
    }
    if (gamma <= 0.0) {
      // No improving step was found: the supergradient is not trustworthy
      // beyond inner accuracy.
      out.status = SolveStatus::Converged;
      break;
    }

    const Eigen::VectorXd x_new = x + gamma * d;
    if (prog.concavity_check) {
      const InnerSolution mid = prog.inner(0.5 * (x + x_new), best.warm);
      out.inner_iterations += mid.iterations;
      const double chord = 0.5 * (value_of(cur) + value_of(best));
      if (value_of(mid) < chord - 1e-7 * (1.0 + std::abs(chord))) ++out.concavity_violations;
    }

    if (fw_step) {
      for (auto& a : atoms) a.weight *= 1.0 - gamma;
      add_atom(v_fw, gamma);
    } else {
      for (auto& a : atoms) a.weight *= 1.0 + gamma;
      atoms[away].weight -= gamma;
    }
    atoms.erase(std::remove_if(atoms.begin(), atoms.end(), [](const Atom& a) { return a.weight <= 1e-12; }),
                atoms.end());
    double total = 0.0;
    for (const auto& a : atoms) total += a.weight;
    x.setZero();
    for (auto& a : atoms) {
      a.weight /= total;
      x += a.weight * a.v;
    }
    // When the inner problem sits on its box the supergradient is an artifact
    // of the box and the gap never closes; stop once the value stops moving.
    const double gain = value_of(best) - value_of(cur);
    stall = best.status == SolveStatus::BoxActive && gain <= 1e-12 * (1.0 + std::abs(value_of(cur))) ? stall + 1 : 0;
    cur = best;
    if (stall >= 50) {
      out.status = SolveStatus::BoxActive;
      break;
    }
  }
  out.x = x;
  out.value = cur.value;
  out.inner_point = cur.warm;
  out.inner_status = cur.status;
  return out;
}

}  // namespace capcount
