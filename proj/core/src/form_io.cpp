#include "dfield/form_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace dfield {

namespace {

struct Record {
  int line;
  std::vector<std::string> fields;
};

long long parse_id(const Record& r, const std::string& tok) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(r.line, "expected integer id, got '" + tok + "'");
  }
  if (used != tok.size() || v < 0) throw ParseError(r.line, "expected non-negative integer id, got '" + tok + "'");
  return v;
}

double parse_real(const Record& r, const std::string& tok) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(r.line, "expected number, got '" + tok + "'");
  }
  if (used != tok.size() || !std::isfinite(v)) throw ParseError(r.line, "expected finite number, got '" + tok + "'");
  return v;
}

void expect_arity(const Record& r, std::size_t n) {
  if (r.fields.size() != n) {
    throw ParseError(r.line, "record '" + r.fields[0] + "' takes " + std::to_string(n - 1) + " fields");
  }
}

}  // namespace

DirichletForm read_form(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Record r{lineno, {}};
    for (std::string tok; ls >> tok;) r.fields.push_back(tok);
    if (!r.fields.empty()) records.push_back(std::move(r));
  }

  std::map<long long, std::pair<double, int>> vertices;
  for (const auto& r : records) {
    if (r.fields[0] != "v") continue;
    expect_arity(r, 3);
    long long id = parse_id(r, r.fields[1]);
    double m = parse_real(r, r.fields[2]);
    if (!(m > 0.0)) throw ParseError(r.line, "vertex measure must be positive");
    if (!vertices.emplace(id, std::make_pair(m, r.line)).second) {
      throw ParseError(r.line, "duplicate vertex " + std::to_string(id));
    }
  }
  if (vertices.empty()) throw ParseError(0, "no vertices declared");
  long long expect = 0;
  for (const auto& [id, val] : vertices) {
    if (id != expect) throw ParseError(val.second, "vertex ids are not contiguous from 0 (missing " + std::to_string(expect) + ")");
    ++expect;
  }
  const auto n = static_cast<Vertex>(vertices.size());
  Eigen::VectorXd measure(n);
  for (const auto& [id, val] : vertices) measure[static_cast<Eigen::Index>(id)] = val.first;

  auto vertex = [&](const Record& r, const std::string& tok) {
    long long id = parse_id(r, tok);
    if (id >= n) throw ParseError(r.line, "unknown vertex " + tok);
    return static_cast<Vertex>(id);
  };

  std::vector<WeightedEdge> edges;
  std::vector<std::pair<Vertex, Vertex>> refs;
  std::set<std::pair<Vertex, Vertex>> seen_edges, seen_refs;
  Eigen::VectorXd killing = Eigen::VectorXd::Zero(n);
  std::set<Vertex> seen_kill;
  bool any_ref = false;
  for (const auto& r : records) {
    const std::string& kind = r.fields[0];
    if (kind == "v") continue;
    if (kind == "e") {
      expect_arity(r, 4);
      Vertex i = vertex(r, r.fields[1]), j = vertex(r, r.fields[2]);
      double w = parse_real(r, r.fields[3]);
      if (i == j) throw ParseError(r.line, "self-loop on vertex " + std::to_string(i));
      if (w < 0.0) throw ParseError(r.line, "negative weight");
      if (!seen_edges.insert({std::min(i, j), std::max(i, j)}).second) throw ParseError(r.line, "duplicate edge");
      edges.push_back({i, j, w});
    } else if (kind == "k") {
      expect_arity(r, 3);
      Vertex i = vertex(r, r.fields[1]);
      double kappa = parse_real(r, r.fields[2]);
      if (kappa < 0.0) throw ParseError(r.line, "negative killing weight");
      if (!seen_kill.insert(i).second) throw ParseError(r.line, "duplicate killing record");
      killing[i] = kappa;
    } else if (kind == "ref") {
      expect_arity(r, 3);
      any_ref = true;
      Vertex i = vertex(r, r.fields[1]), j = vertex(r, r.fields[2]);
      if (i == j) throw ParseError(r.line, "reference self-loop");
      if (!seen_refs.insert({std::min(i, j), std::max(i, j)}).second) throw ParseError(r.line, "duplicate reference edge");
      refs.emplace_back(i, j);
    } else {
      throw ParseError(r.line, "unknown record type '" + kind + "'");
    }
  }
  if (!any_ref) {
    for (const auto& e : edges) {
      if (e.weight > 0.0) refs.emplace_back(e.i, e.j);
    }
  }
  return form_from_components(Space(std::move(measure), refs), std::move(edges), std::move(killing));
}

DirichletForm read_form_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open form file '" + path + "'");
  return read_form(in);
}

void write_form(std::ostream& out, const DirichletForm& form) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto& m = form.space().measure();
  for (Vertex x = 0; x < form.size(); ++x) out << "v " << x << ' ' << m[x] << '\n';
  for (const auto& e : form.edges()) out << "e " << e.i << ' ' << e.j << ' ' << e.weight << '\n';
  for (Vertex x = 0; x < form.size(); ++x) {
    if (form.killing()[x] > 0.0) out << "k " << x << ' ' << form.killing()[x] << '\n';
  }
  for (auto [i, j] : form.space().ref_edges()) out << "ref " << i << ' ' << j << '\n';
}

}  // namespace dfield
