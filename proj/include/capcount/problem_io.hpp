#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "capcount/error.hpp"
#include "capcount/matroid.hpp"
#include "capcount/poly.hpp"

namespace capcount {

/// Input document that does not match the expected shape. `path` is a
/// JSON-pointer-like location such as "$.polynomial.terms[2][1]".
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Problem {
  std::string source;
  std::optional<std::string> task;
  std::optional<PolynomialOracle> polynomial;
  std::optional<MatroidSpec> matroid;
  std::optional<Eigen::MatrixXd> kernel;   // "L" for subdet
  std::optional<Eigen::MatrixXd> matrix;   // "A" for the permanent oracle
  std::optional<double> eps;
  std::optional<int> budget;
  std::optional<unsigned long long> seed;
  std::optional<std::string> oracle;       // coeff_sum | max_coeff | coeff | grid_cap | permanent
  std::optional<std::vector<int>> exponents;
  int resolution = 64;
};

PolynomialOracle parse_polynomial(const nlohmann::json& j, const std::string& path = "$.polynomial");
MatroidSpec parse_matroid(const nlohmann::json& j, const std::string& path = "$.matroid");
Problem parse_problem(const nlohmann::json& j);

/// Reads and parses a problem file; malformed JSON is a SchemaError at "$".
Problem load_problem(const std::string& file);

}  // namespace capcount
