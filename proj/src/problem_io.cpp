#include "capcount/problem_io.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace capcount {

namespace {

using nlohmann::json;

std::string at(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& field(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw SchemaError(at(path, key), "missing required field");
  return j.at(key);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw SchemaError(at(path, it.key()), "unknown field");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw SchemaError(path, "integer out of range");
  }
  return static_cast<int>(v);
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], at(path, i)));
  return out;
}

std::vector<std::vector<int>> as_int_lists(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of integer arrays");
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int_list(j[i], at(path, i)));
  return out;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array of rows");
  std::size_t cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) throw SchemaError(at(path, r), "expected a row array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) throw SchemaError(at(path, r), "row length differs from the first row");
  }
  Eigen::MatrixXd M(static_cast<int>(j.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) M(r, c) = as_number(j[r][c], at(at(path, r), c));
  }
  return M;
}

void check_m(const json& j, const std::string& path, int actual) {
  if (j.contains("m") && as_int(j["m"], at(path, "m")) != actual) {
    throw SchemaError(at(path, "m"), "does not match the size implied by the payload (" + std::to_string(actual) + ")");
  }
}

template <class F>
auto wrap(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace

PolynomialOracle parse_polynomial(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string kind = as_string(field(j, path, "kind"), at(path, "kind"));
  if (kind == "sparse") {
    reject_unknown(j, path, {"kind", "m", "terms", "assert_real_stable"});
    const int m = as_int(field(j, path, "m"), at(path, "m"));
    const json& terms = field(j, path, "terms");
    const std::string tpath = at(path, "terms");
    if (!terms.is_array()) throw SchemaError(tpath, "expected an array of [exponents, coefficient] pairs");
    std::vector<Term> out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string p = at(tpath, i);
      if (!terms[i].is_array() || terms[i].size() != 2) throw SchemaError(p, "expected [exponents, coefficient]");
      std::vector<int> e = as_int_list(terms[i][0], at(p, 0));
      if (static_cast<int>(e.size()) != m) throw SchemaError(at(p, 0), "exponent vector length differs from m");
      out.push_back({std::move(e), as_number(terms[i][1], at(p, 1))});
    }
    const bool stable = j.contains("assert_real_stable") &&
                        as_bool(j["assert_real_stable"], at(path, "assert_real_stable"));
    return wrap(path, [&] { return PolynomialOracle::sparse(m, std::move(out), stable); });
  }
  if (kind == "product") {
    reject_unknown(j, path, {"kind", "m", "A"});
    const Eigen::MatrixXd A = as_matrix(field(j, path, "A"), at(path, "A"));
    check_m(j, path, static_cast<int>(A.cols()));
    return wrap(path, [&] { return PolynomialOracle::linear_product(A); });
  }
  if (kind == "determinantal") {
    reject_unknown(j, path, {"kind", "m", "V", "degree"});
    const Eigen::MatrixXd V = as_matrix(field(j, path, "V"), at(path, "V"));
    check_m(j, path, static_cast<int>(V.rows()));
    std::optional<int> degree;
    if (j.contains("degree")) degree = as_int(j["degree"], at(path, "degree"));
    return wrap(path, [&] { return PolynomialOracle::determinantal(V, degree); });
  }
  if (kind == "partition_power") {
    reject_unknown(j, path, {"kind", "m", "parts", "powers", "coeff"});
    const int m = as_int(field(j, path, "m"), at(path, "m"));
    auto parts = as_int_lists(field(j, path, "parts"), at(path, "parts"));
    auto powers = as_int_list(field(j, path, "powers"), at(path, "powers"));
    const double coeff = j.contains("coeff") ? as_number(j["coeff"], at(path, "coeff")) : 1.0;
    return wrap(path, [&] { return PolynomialOracle::partition_power(m, std::move(parts), std::move(powers), coeff); });
  }
  throw SchemaError(at(path, "kind"), "unknown polynomial kind '" + kind +
                                          "' (expected sparse, product, determinantal or partition_power)");
}

MatroidSpec parse_matroid(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string kind = as_string(field(j, path, "kind"), at(path, "kind"));
  if (kind == "uniform") {
    reject_unknown(j, path, {"kind", "m", "n"});
    const int m = as_int(field(j, path, "m"), at(path, "m"));
    const int n = as_int(field(j, path, "n"), at(path, "n"));
    return wrap(path, [&] { return MatroidSpec::uniform(m, n); });
  }
  if (kind == "partition") {
    reject_unknown(j, path, {"kind", "m", "n", "parts", "quotas"});
    const int m = as_int(field(j, path, "m"), at(path, "m"));
    auto parts = as_int_lists(field(j, path, "parts"), at(path, "parts"));
    auto quotas = as_int_list(field(j, path, "quotas"), at(path, "quotas"));
    MatroidSpec out = wrap(path, [&] { return MatroidSpec::partition(m, std::move(parts), std::move(quotas)); });
    if (j.contains("n") && as_int(j["n"], at(path, "n")) != out.n()) {
      throw SchemaError(at(path, "n"), "does not equal the sum of quotas");
    }
    return out;
  }
  if (kind == "graphic") {
    reject_unknown(j, path, {"kind", "m", "n", "vertices", "edges"});
    const int vertices = as_int(field(j, path, "vertices"), at(path, "vertices"));
    const auto raw = as_int_lists(field(j, path, "edges"), at(path, "edges"));
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].size() != 2) throw SchemaError(at(at(path, "edges"), i), "expected a [u, v] pair");
      edges.emplace_back(raw[i][0], raw[i][1]);
    }
    check_m(j, path, static_cast<int>(edges.size()));
    MatroidSpec out = wrap(path, [&] { return MatroidSpec::graphic(vertices, std::move(edges)); });
    if (j.contains("n") && as_int(j["n"], at(path, "n")) != out.n()) {
      throw SchemaError(at(path, "n"), "does not equal the graph rank");
    }
    return out;
  }
  if (kind == "linear") {
    reject_unknown(j, path, {"kind", "m", "n", "V", "regular"});
    const Eigen::MatrixXd V = as_matrix(field(j, path, "V"), at(path, "V"));
    check_m(j, path, static_cast<int>(V.rows()));
    const bool regular = j.contains("regular") && as_bool(j["regular"], at(path, "regular"));
    MatroidSpec out = wrap(path, [&] { return MatroidSpec::linear(V, regular); });
    if (j.contains("n") && as_int(j["n"], at(path, "n")) != out.n()) {
      throw SchemaError(at(path, "n"), "does not equal the rank of V");
    }
    return out;
  }
  if (kind == "explicit") {
    reject_unknown(j, path, {"kind", "m", "n", "bases", "assert_strongly_rayleigh"});
    const int m = as_int(field(j, path, "m"), at(path, "m"));
    auto bases = as_int_lists(field(j, path, "bases"), at(path, "bases"));
    const bool sr = j.contains("assert_strongly_rayleigh") &&
                    as_bool(j["assert_strongly_rayleigh"], at(path, "assert_strongly_rayleigh"));
    MatroidSpec out = wrap(path, [&] { return MatroidSpec::explicit_family(m, std::move(bases), sr); });
    if (j.contains("n") && as_int(j["n"], at(path, "n")) != out.n()) {
      throw SchemaError(at(path, "n"), "does not equal the base size");
    }
    return out;
  }
  throw SchemaError(at(path, "kind"), "unknown matroid kind '" + kind +
                                          "' (expected uniform, partition, graphic, linear or explicit)");
}

Problem parse_problem(const json& j) {
  const std::string root = "$";
  require_object(j, root);
  reject_unknown(j, root, {"task", "polynomial", "matroid", "L", "A", "eps", "budget", "seed", "oracle",
                           "exponents", "set", "resolution"});
  Problem p;
  if (j.contains("task")) p.task = as_string(j["task"], "$.task");
  if (j.contains("polynomial")) p.polynomial = parse_polynomial(j["polynomial"], "$.polynomial");
  if (j.contains("matroid")) p.matroid = parse_matroid(j["matroid"], "$.matroid");
  if (j.contains("L")) p.kernel = as_matrix(j["L"], "$.L");
  if (j.contains("A")) p.matrix = as_matrix(j["A"], "$.A");
  if (j.contains("eps")) {
    p.eps = as_number(j["eps"], "$.eps");
    if (!(*p.eps > 0.0)) throw SchemaError("$.eps", "must be positive");
  }
  if (j.contains("budget")) {
    p.budget = as_int(j["budget"], "$.budget");
    if (*p.budget <= 0) throw SchemaError("$.budget", "must be positive");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw SchemaError("$.seed", "expected a nonnegative integer");
    p.seed = j["seed"].get<unsigned long long>();
  }
  if (j.contains("oracle")) p.oracle = as_string(j["oracle"], "$.oracle");
  if (j.contains("exponents") && j.contains("set")) throw SchemaError("$.set", "give either set or exponents, not both");
  if (j.contains("exponents")) p.exponents = as_int_list(j["exponents"], "$.exponents");
  if (j.contains("set")) {
    if (!p.polynomial) throw SchemaError("$.set", "requires a polynomial to size the exponent vector");
    std::vector<int> e(p.polynomial->num_vars(), 0);
    const auto s = as_int_list(j["set"], "$.set");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= p.polynomial->num_vars()) throw SchemaError(at("$.set", i), "index out of range");
      ++e[s[i]];
    }
    p.exponents = e;
  }
  if (j.contains("resolution")) {
    p.resolution = as_int(j["resolution"], "$.resolution");
    if (p.resolution < 3) throw SchemaError("$.resolution", "must be at least 3");
  }
  if (p.polynomial && p.matroid && p.polynomial->num_vars() != p.matroid->m()) {
    throw SchemaError("$.polynomial.m", "polynomial has " + std::to_string(p.polynomial->num_vars()) +
                                            " variables but the matroid has " + std::to_string(p.matroid->m()) +
                                            " elements");
  }
  if (p.kernel && p.matroid && p.kernel->rows() != p.matroid->m()) {
    throw SchemaError("$.L", "kernel size differs from the matroid ground set");
  }
  return p;
}

Problem load_problem(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError("$", "cannot open " + file);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  Problem p = parse_problem(j);
  p.source = file;
  return p;
}

}  // namespace capcount
