#include "dfield/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dfield {

namespace {

nlohmann::json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

bool Report::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

bool Report::bound(std::string name, double measured, std::string comparison, double b, std::string provenance) {
  Criterion c;
  c.name = std::move(name);
  c.measured = measured;
  c.reference = b;
  c.provenance = std::move(provenance);
  c.tolerance = 0.0;
  if (comparison == "<=") {
    c.pass = measured <= b;
  } else if (comparison == ">=") {
    c.pass = measured >= b;
  } else {
    c.pass = false;
  }
  c.comparison = std::move(comparison);
  criteria.push_back(c);
  return c.pass;
}

bool Report::near(std::string name, double measured, double reference, double tolerance, std::string provenance) {
  Criterion c;
  c.name = std::move(name);
  c.measured = measured;
  c.reference = reference;
  c.tolerance = tolerance;
  c.provenance = std::move(provenance);
  c.comparison = "equal";
  c.pass = std::abs(measured - reference) <= tolerance;
  criteria.push_back(c);
  return c.pass;
}

bool Report::decreasing(std::string name, const std::vector<double>& series, std::string provenance) {
  Criterion c;
  c.name = std::move(name);
  c.reference = std::numeric_limits<double>::quiet_NaN();
  c.provenance = std::move(provenance);
  c.comparison = "decreasing";
  c.pass = series.size() >= 2;
  double worst = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double ratio = series[i] / series[i - 1];
    worst = std::max(worst, ratio);
    if (!(series[i] < series[i - 1])) c.pass = false;
  }
  c.measured = worst;
  criteria.push_back(c);
  return c.pass;
}

nlohmann::json Report::to_json() const {
  nlohmann::json crit = nlohmann::json::array();
  for (const auto& c : criteria) {
    crit.push_back({{"name", c.name},
                    {"measured", number(c.measured)},
                    {"reference", number(c.reference)},
                    {"provenance", c.provenance},
                    {"comparison", c.comparison},
                    {"tolerance", number(c.tolerance)},
                    {"pass", c.pass}});
  }
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = experiment;
  j["parameters"] = parameters;
  j["criteria"] = crit;
  j["data"] = data;
  j["notes"] = notes;
  j["pass"] = pass();
  return j;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "experiment,criterion,measured,reference,comparison,tolerance,provenance,pass\n";
  for (const auto& c : criteria) {
    os << experiment << ',' << c.name << ',' << c.measured << ',' << c.reference << ',' << c.comparison << ','
       << c.tolerance << ",\"" << c.provenance << "\"," << (c.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string matrix_csv(const Eigen::MatrixXd& m, const std::string& prefix) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << prefix << c;
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
    os << '\n';
  }
  return os.str();
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace dfield
