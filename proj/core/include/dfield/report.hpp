#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace dfield {

inline constexpr int kReportSchemaVersion = 1;

/// One asserted quantity. `reference` is NaN when the criterion is a pure trend or bound.
struct Criterion {
  std::string name;
  double measured = 0.0;
  double reference = 0.0;
  /// Where the reference value comes from, e.g. "closed form t^s" or "exact linear solve".
  std::string provenance;
  /// "<=", ">=", "decreasing", "equal".
  std::string comparison;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string experiment;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<Criterion> criteria;
  nlohmann::json data = nlohmann::json::object();
  std::vector<std::string> notes;

  bool pass() const;
  /// Adds `measured <= bound` (or >=) and returns whether it passed.
  bool bound(std::string name, double measured, std::string comparison, double bound, std::string provenance);
  /// Adds |measured - reference| <= tolerance.
  bool near(std::string name, double measured, double reference, double tolerance, std::string provenance);
  /// Adds a strict-decrease trend over `series`; measured is the largest successive ratio.
  bool decreasing(std::string name, const std::vector<double>& series, std::string provenance);

  /// Deterministic: contains no timing or host information.
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Matrix as CSV with a header row of column ids ("v0,v1,...").
std::string matrix_csv(const Eigen::MatrixXd& m, const std::string& prefix = "v");

/// JSON text with a trailing newline, 2-space indent.
std::string dump_json(const nlohmann::json& j);

}  // namespace dfield
