#include "capcount/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "capcount/capacity.hpp"
#include "capcount/estimate.hpp"
#include "capcount/problem_io.hpp"
#include "capcount/reference.hpp"

namespace capcount::cli {

namespace {

using nlohmann::json;

struct Settings {
  std::string task;
  std::optional<double> eps;
  std::optional<int> budget;
  std::optional<unsigned long long> seed;
  std::optional<std::string> oracle;
  bool verify = false;
};

struct Row {
  std::string task;
  double value = 0.0;
  double log_value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string bound_name = "none";
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  unsigned long long seed = 0;
  std::optional<bool> verified;  // set only under --verify
};

struct Outcome {
  std::string source;
  std::optional<Row> row;
  std::string error;
};

constexpr int kVerifyMaxM = 8;

double log_of(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

const PolynomialOracle& need_poly(const Problem& p) {
  if (!p.polynomial) throw SchemaError("$.polynomial", "missing required field");
  return *p.polynomial;
}

const MatroidSpec& need_matroid(const Problem& p) {
  if (!p.matroid) throw SchemaError("$.matroid", "missing required field");
  return *p.matroid;
}

bool small_enough(const MatroidSpec& mat) { return mat.m() <= kVerifyMaxM; }

Row from_interval(const std::string& task, const EstimateInterval& e) {
  Row r;
  r.task = task;
  r.value = e.point;
  r.log_value = e.log_point;
  r.lower = e.lower;
  r.upper = e.upper;
  r.bound_name = e.bound_name;
  r.status = e.status;
  r.iterations = e.iterations;
  return r;
}

double brute_max_minor(const Eigen::MatrixXd& L, const MatroidSpec& mat) {
  double best = 0.0;
  for (const auto& s : enumerate_bases(mat)) {
    Eigen::MatrixXd sub(s.size(), s.size());
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = 0; b < s.size(); ++b) sub(a, b) = L(s[a], s[b]);
    }
    best = std::max(best, sub.size() == 0 ? 1.0 : sub.determinant());
  }
  return best;
}

Row run_oracle(const Problem& p, const std::string& name) {
  Row r;
  r.task = "oracle-" + name;
  r.bound_name = "reference";
  if (name == "permanent") {
    if (!p.matrix) throw SchemaError("$.A", "missing required field");
    r.value = permanent(*p.matrix);
  } else if (name == "coeff") {
    if (!p.exponents) throw SchemaError("$.set", "coeff needs set or exponents");
    r.value = coeff_extract(need_poly(p), *p.exponents);
  } else if (name == "coeff_sum") {
    r.value = coeff_sum_brute(need_poly(p), need_matroid(p));
  } else if (name == "max_coeff") {
    r.value = max_coeff_brute(need_poly(p), need_matroid(p));
  } else if (name == "grid_cap") {
    r.value = grid_cap_oracle(need_poly(p), need_matroid(p), p.resolution);
  } else {
    throw SchemaError("$.oracle", "unknown oracle '" + name +
                                      "' (expected coeff_sum, max_coeff, coeff, grid_cap or permanent)");
  }
  r.log_value = log_of(r.value);
  r.lower = r.upper = r.value;
  return r;
}

Row run_problem(const Problem& p, const Settings& s) {
  CapacityOptions opts;
  opts.eps = s.eps.value_or(p.eps.value_or(opts.eps));
  opts.budget = s.budget.value_or(p.budget.value_or(opts.budget));
  opts.outer_budget = std::max(1, opts.budget / 10);
  opts.seed = s.seed.value_or(p.seed.value_or(0));

  std::string task = s.task;
  if (task == "oracle") {
    const auto name = s.oracle ? s.oracle : p.oracle;
    if (!name) throw SchemaError("$.oracle", "missing required field");
    task += "-" + *name;
  }
  if (p.task && *p.task != task) throw SchemaError("$.task", "file is for task '" + *p.task + "', not '" + task + "'");

  Row r;
  if (s.task == "capacity") {
    const auto& g = need_poly(p);
    const auto& mat = need_matroid(p);
    const CapacityResult c = cap(g, mat, opts);
    r.task = task;
    r.value = c.value;
    r.log_value = c.zero ? -std::numeric_limits<double>::infinity() : c.log_value;
    r.lower = c.zero ? 0.0 : std::exp(c.log_value - opts.eps);
    r.upper = c.value;
    r.status = c.status;
    r.iterations = c.iterations;
    if (s.verify && small_enough(mat)) {
      const double gb = coeff_sum_brute(g, mat);
      bool ok = gb <= c.value * (1.0 + 1e-5) + 1e-12;
      if (g.is_real_stable_asserted() && mat.is_matroid()) {
        const RatioBound b = bound_M(mat, g.is_multilinear());
        ok = ok && r.lower / b.value <= gb * (1.0 + 1e-9) + 1e-12;
      }
      r.verified = ok;
    }
  } else if (s.task == "count") {
    const auto& g = need_poly(p);
    const auto& mat = need_matroid(p);
    r = from_interval(task, count_estimate(g, mat, opts));
    if (s.verify && small_enough(mat)) {
      const double gb = coeff_sum_brute(g, mat);
      r.verified = r.lower <= gb * (1.0 + 1e-9) + 1e-12 && gb <= r.upper * (1.0 + 1e-5) + 1e-12;
    }
  } else if (s.task == "maximize") {
    const auto& g = need_poly(p);
    const auto& mat = need_matroid(p);
    r = from_interval(task, max_estimate(g, mat, opts));
    if (s.verify && small_enough(mat)) {
      const double mx = max_coeff_brute(g, mat);
      r.verified = r.lower <= mx * (1.0 + 1e-9) + 1e-12 && mx <= r.upper * (1.0 + 1e-4) + 1e-12;
    }
  } else if (s.task == "subdet") {
    if (!p.kernel) throw SchemaError("$.L", "missing required field");
    const auto& mat = need_matroid(p);
    r = from_interval(task, subdet_max(*p.kernel, mat, opts));
    if (s.verify && small_enough(mat)) {
      const double mx = brute_max_minor(*p.kernel, mat);
      r.verified = r.lower <= mx * (1.0 + 1e-9) + 1e-12 && mx <= r.upper * (1.0 + 1e-4) + 1e-9;
    }
  } else if (s.task == "entropy") {
    const auto& g = need_poly(p);
    const auto& mat = need_matroid(p);
    const EntropyResult e = entropy_cap(g, mat, opts);
    r.task = task;
    r.value = e.value;
    r.log_value = e.log_value;
    r.lower = std::exp(e.log_value - opts.eps);
    r.upper = std::exp(e.log_value + opts.eps);
    r.status = e.status;
    r.iterations = e.iterations;
    if (s.verify && small_enough(mat)) {
      const double gb = coeff_sum_brute(g, mat);
      r.verified = gb <= r.upper * (1.0 + 1e-4) + 1e-12;
    }
  } else {
    r = run_oracle(p, task.substr(std::string("oracle-").size()));
    if (s.verify) r.verified = true;
  }
  r.seed = opts.seed;
  return r;
}

Outcome run_file(const std::string& file, const Settings& s) {
  Outcome o;
  o.source = file;
  try {
    o.row = run_problem(load_problem(file), s);
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

std::string tsv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Outcome& o) {
  const Row& r = *o.row;
  json j;
  j["problem"] = o.source;
  j["task"] = r.task;
  j["value"] = number_or_null(r.value);
  j["log_value"] = number_or_null(r.log_value);
  j["lower"] = number_or_null(r.lower);
  j["upper"] = number_or_null(r.upper);
  j["bound_name"] = r.bound_name;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["seed"] = r.seed;
  if (r.verified) j["verified"] = *r.verified;
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capacity-based counting and optimization over matroid bases", "capcount"};
  app.require_subcommand(1);

  Settings settings;
  std::vector<std::string> problems;
  double eps = 0.0;
  int budget = 0;
  unsigned long long seed = 0;
  std::string format = "json";
  int jobs = 1;
  std::string oracle;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", problems, "Problem file (repeatable)")->required()->check(CLI::ExistingFile);
    sub->add_option("--eps", eps, "Accuracy on log-values (default 1e-6)")->check(CLI::PositiveNumber);
    sub->add_option("--budget", budget, "Iteration cap (default 10000)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed (default 0)");
    sub->add_flag("--verify", settings.verify, "Cross-check against brute-force oracles when m <= 8");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "tsv"}));
    sub->add_option("--jobs", jobs, "Problem files processed in parallel")->check(CLI::PositiveNumber);
  };
  const char* tasks[][2] = {
      {"capacity", "Capacity of g over the family"},
      {"count", "Interval for the sum of base coefficients"},
      {"maximize", "Interval for the largest base coefficient"},
      {"subdet", "Interval for the largest principal minor on a base"},
      {"entropy", "Capacity through the relative-entropy program"},
      {"oracle", "Brute-force reference values"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& t : tasks) {
    CLI::App* sub = app.add_subcommand(t[0], t[1]);
    add_common(sub);
    if (std::string(t[0]) == "oracle") {
      sub->add_option("--oracle", oracle, "coeff_sum, max_coeff, coeff, grid_cap or permanent");
    }
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  CLI::App* chosen = nullptr;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) chosen = sub;
  }
  settings.task = chosen->get_name();
  if (chosen->count("--eps")) settings.eps = eps;
  if (chosen->count("--budget")) settings.budget = budget;
  if (chosen->count("--seed")) settings.seed = seed;
  if (settings.task == "oracle" && chosen->count("--oracle")) settings.oracle = oracle;

  std::vector<Outcome> outcomes(problems.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) outcomes[i] = run_file(problems[i], settings);
  };
  const int threads = std::min<int>(jobs, static_cast<int>(problems.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  bool input_error = false, verify_failed = false, exhausted = false;
  if (format == "tsv") out << "problem\ttask\tvalue\tlog_value\tlower\tupper\tbound_name\tstatus\titerations\tseed\tverified\n";
  for (const Outcome& o : outcomes) {
    if (!o.row) {
      input_error = true;
      err << "capcount: " << o.source << ": " << o.error << "\n";
      continue;
    }
    const Row& r = *o.row;
    if (r.verified && !*r.verified) {
      verify_failed = true;
      err << "capcount: " << o.source << ": verification against the reference oracle failed\n";
    }
    if (r.status == SolveStatus::BudgetExhausted) exhausted = true;
    if (format == "tsv") {
      out << o.source << '\t' << r.task << '\t' << tsv_number(r.value) << '\t' << tsv_number(r.log_value) << '\t'
          << tsv_number(r.lower) << '\t' << tsv_number(r.upper) << '\t' << r.bound_name << '\t'
          << to_string(r.status) << '\t' << r.iterations << '\t' << r.seed << '\t'
          << (r.verified ? (*r.verified ? "true" : "false") : "") << '\n';
    } else {
      out << to_json(o).dump() << '\n';
    }
  }
  if (input_error) return kInputError;
  if (verify_failed) return kVerifyFailed;
  if (exhausted) return kBudgetExhausted;
  return kOk;
}

}  // namespace capcount::cli
