#include "dfield_cli/cli.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dfield/experiments.hpp"
#include "dfield/form_io.hpp"
#include "dfield/markov.hpp"
#include "dfield/potential.hpp"
#include "dfield/report.hpp"
#include "dfield/stopping.hpp"

namespace dfield::cli {

namespace {

struct Options {
  std::vector<std::string> forms;
  std::vector<std::string> sets;
  std::string set_b;
  std::string rule;
  std::string example;
  double tol = 1e-9;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  std::string json_path;
  std::string csv_path;
};

VertexSet parse_ids(const std::string& text, Vertex n, const char* flag) {
  std::vector<Vertex> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 0) throw InputError(std::string(flag) + ": '" + item + "' is not a vertex id");
    if (v >= n) {
      throw InputError(std::string(flag) + ": vertex " + item + " is outside 0.." + std::to_string(n - 1));
    }
    ids.push_back(static_cast<Vertex>(v));
  }
  return VertexSet(std::move(ids));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

// JSON goes to --json when given, otherwise to stdout; CSV only to --csv.
void emit(const Options& o, const nlohmann::json& j, const std::string& csv, std::ostream& out) {
  if (o.json_path.empty()) {
    out << dump_json(j);
  } else {
    write_text(o.json_path, dump_json(j));
  }
  if (!o.csv_path.empty()) write_text(o.csv_path, csv);
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json envelope(const std::string& command) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = command;
  return j;
}

const std::string& single_form(const Options& o) {
  if (o.forms.size() != 1) throw InputError("exactly one --form is required");
  return o.forms.front();
}

const std::string& single_set(const Options& o) {
  if (o.sets.size() != 1) throw InputError("exactly one --set is required");
  return o.sets.front();
}

std::string markov_csv(const std::vector<MarkovReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "check,set,set_b,holds,violation,tol\n";
  for (const auto& r : reports) {
    os << r.check << ",\"" << r.a.to_string() << "\",\"" << (r.b ? r.b->to_string() : "") << "\","
       << (r.holds ? "true" : "false") << ',' << r.max_violation << ',' << r.tol << '\n';
  }
  return os.str();
}

int check_markov_cmd(const Options& o, std::ostream& out) {
  const DirichletForm form = read_form_file(single_form(o));
  const GaussianField field(form, o.seed);
  const VertexSet a = parse_ids(single_set(o), form.size(), "--set");
  std::vector<MarkovReport> reports{check_markov(field, a, o.tol), check_spectrum_criterion(field, a, o.tol),
                                    check_pseudo_markov(field, a, o.tol)};
  if (!o.set_b.empty()) {
    const VertexSet b = parse_ids(o.set_b, form.size(), "--set-b");
    if (!b.is_subset_of(a)) throw InputError("--set-b must be a subset of --set");
    reports.push_back(check_two_set(field, a, b, o.tol));
    reports.push_back(check_join_identity(field, a, b, o.tol));
  }
  bool pass = true;
  nlohmann::json j = envelope("check-markov");
  j["form"] = o.forms.front();
  j["n"] = form.size();
  j["local"] = is_local_wrt(form);
  j["checks"] = nlohmann::json::array();
  for (const auto& r : reports) {
    j["checks"].push_back(r.to_json());
    pass = pass && r.holds;
  }
  j["pass"] = pass;
  emit(o, j, markov_csv(reports), out);
  return pass ? kPass : kAssertionFailed;
}

int check_strong_markov_cmd(const Options& o, std::ostream& out) {
  if (o.rule.empty()) throw InputError("--rule is required");
  const DirichletForm form = read_form_file(single_form(o));
  const GaussianField field(form, o.seed);
  const ExplorationRule rule = read_rule_file(o.rule, form.space());
  const std::size_t n = o.samples > 0 ? o.samples : 100000;
  const StrongMarkovReport mc = strong_markov_mc(field, rule, n, o.seed);
  nlohmann::json j = envelope("check-strong-markov");
  j["form"] = o.forms.front();
  j["rule"] = o.rule;
  j["strong_markov"] = mc.to_json();
  bool pass = mc.pass;
  if (!o.sets.empty() || !o.set_b.empty()) {
    // Hypothesis {A_w <= A, TC(B_w) <= B} in sigma(A n B) for the given pair.
    const VertexSet a = parse_ids(single_set(o), form.size(), "--set");
    const VertexSet b = parse_ids(o.set_b, form.size(), "--set-b");
    const HypothesisReport h = verify_stopping_hypothesis(field, rule, a, b, std::min<std::size_t>(n, 2000), o.seed);
    j["hypothesis"] = h.to_json();
    pass = pass && h.pass;
  }
  j["pass"] = pass;
  std::ostringstream csv;
  csv.precision(17);
  csv << "k,a,b,count,asserted,max_partial_correlation,threshold,pass\n";
  for (const auto& c : mc.cells) {
    csv << c.k << ",\"" << c.a.to_string() << "\",\"" << c.b.to_string() << "\"," << c.count << ','
        << (c.asserted ? "true" : "false") << ',' << c.max_partial_correlation << ',' << c.threshold << ','
        << (c.pass ? "true" : "false") << '\n';
  }
  emit(o, j, csv.str(), out);
  return pass ? kPass : kAssertionFailed;
}

std::vector<VertexSet> default_scan_sets(const DirichletForm& form) {
  const Vertex n = form.size();
  if (n <= 12) return all_proper_subsets(n);
  std::vector<VertexSet> sets;
  for (Vertex x = 0; x < n; ++x) {
    for (int r : {1, 2}) {
      VertexSet b = form.space().ball(x, r);
      if (b.size() < static_cast<std::size_t>(n)) sets.push_back(std::move(b));
    }
  }
  return sets;
}

int scan_cmd(const Options& o, std::ostream& out) {
  if (o.forms.empty()) throw InputError("at least one --form is required");
  std::vector<NamedForm> forms;
  std::vector<std::vector<VertexSet>> sets;
  for (const auto& path : o.forms) {
    DirichletForm form = read_form_file(path);
    std::vector<VertexSet> s;
    if (o.sets.empty()) {
      s = default_scan_sets(form);
    } else {
      for (const auto& text : o.sets) s.push_back(parse_ids(text, form.size(), "--set"));
    }
    sets.push_back(std::move(s));
    forms.push_back({path, std::move(form)});
  }
  const ScanTable table = equivalence_scan(forms, sets, o.tol);
  nlohmann::json j = envelope("scan");
  j["tol"] = o.tol;
  j["table"] = table.to_json();
  j["pass"] = table.pass();
  emit(o, j, table.to_csv(), out);
  return table.pass() ? kPass : kAssertionFailed;
}

int trace_cmd(const Options& o, std::ostream& out) {
  const DirichletForm form = read_form_file(single_form(o));
  const VertexSet s = parse_ids(single_set(o), form.size(), "--set");
  if (s.empty()) throw InputError("--set must not be empty");
  // trace_form validates the result as a Markovian form and throws otherwise.
  const DirichletForm trace = trace_form(form, s);
  const Eigen::MatrixXd q = trace.dense();
  nlohmann::json j = envelope("trace");
  j["form"] = o.forms.front();
  j["set"] = s.members();
  j["local"] = is_local_wrt(trace);
  j["matrix"] = matrix_json(q);
  std::ostringstream text;
  write_form(text, trace);
  j["form_text"] = text.str();
  j["pass"] = true;
  std::ostringstream csv;
  csv.precision(17);
  for (std::size_t k = 0; k < s.size(); ++k) csv << (k ? "," : "") << s.members()[k];
  csv << '\n';
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (Eigen::Index c = 0; c < q.cols(); ++c) csv << (c ? "," : "") << q(r, c);
    csv << '\n';
  }
  emit(o, j, csv.str(), out);
  return kPass;
}

int example_cmd(const Options& o, std::ostream& out) {
  const Report rep = run_example(o.example, o.samples, o.seed);
  nlohmann::json j = envelope("example");
  j["report"] = rep.to_json();
  emit(o, j, rep.to_csv(), out);
  return rep.pass() ? kPass : kAssertionFailed;
}

int sample_cmd(const Options& o, std::ostream& out) {
  const DirichletForm form = read_form_file(single_form(o));
  const GaussianField field(form, o.seed);
  const auto n = static_cast<Eigen::Index>(o.samples > 0 ? o.samples : 1);
  const Eigen::MatrixXd h = field.sample_batch(n, o.seed);
  nlohmann::json j = envelope("sample");
  j["form"] = o.forms.front();
  j["n"] = form.size();
  j["samples"] = n;
  j["seed"] = o.seed;
  j["values"] = matrix_json(h);
  j["pass"] = true;
  emit(o, j, matrix_csv(h), out);
  return kPass;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian fields of Dirichlet forms on finite graphs: Markov property checks and experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "violation tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--json", o.json_path, "write the JSON report here instead of stdout");
    sub->add_option("--csv", o.csv_path, "write a CSV table here");
  };

  auto* markov = app.add_subcommand("check-markov", "Markov, spectrum and pseudo-Markov checks for one set");
  markov->add_option("--form", o.forms, "form file")->required();
  markov->add_option("--set", o.sets, "vertex ids of A, comma separated")->required();
  markov->add_option("--set-b", o.set_b, "vertex ids of B (subset of A) for the two-set checks");
  common(markov);

  auto* strong = app.add_subcommand("check-strong-markov", "Monte Carlo strong Markov test of an exploration rule");
  strong->add_option("--form", o.forms, "form file")->required();
  strong->add_option("--rule", o.rule, "rule config (JSON)")->required();
  strong->add_option("--samples", o.samples, "Monte Carlo samples (default 100000)");
  strong->add_option("--set", o.sets, "A for the stopping hypothesis check");
  strong->add_option("--set-b", o.set_b, "B for the stopping hypothesis check");
  common(strong);

  auto* scan = app.add_subcommand("scan", "locality vs Markov property over many sets");
  scan->add_option("--form", o.forms, "form file (repeatable)")->required();
  scan->add_option("--set", o.sets, "set to test (repeatable; default: all proper subsets for n <= 12, else balls)");
  common(scan);

  auto* trace = app.add_subcommand("trace", "trace form on a vertex set");
  trace->add_option("--form", o.forms, "form file")->required();
  trace->add_option("--set", o.sets, "vertex ids of the trace set")->required();
  common(trace);

  auto* example = app.add_subcommand("example", "run a built-in experiment");
  example->add_option("id", o.example, "half-line, disk-trace, diagonal or circle-average")->required();
  example->add_option("--samples", o.samples, "Monte Carlo samples for the empirical checks (0 = exact only)");
  common(example);

  auto* sample = app.add_subcommand("sample", "draw field samples");
  sample->add_option("--form", o.forms, "form file")->required();
  sample->add_option("--samples", o.samples, "number of samples (default 1)");
  common(sample);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (markov->parsed()) return check_markov_cmd(o, out);
    if (strong->parsed()) return check_strong_markov_cmd(o, out);
    if (scan->parsed()) return scan_cmd(o, out);
    if (trace->parsed()) return trace_cmd(o, out);
    if (example->parsed()) return example_cmd(o, out);
    if (sample->parsed()) return sample_cmd(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace dfield::cli
