#include "dfield/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <sstream>

#include <Eigen/QR>
#include "thin_svd.hpp"

#include "dfield/subspace.hpp"

namespace dfield {

namespace {

constexpr std::size_t kResamplesPerBase = 100;

void check_members(const VertexSet& s, Vertex n, const char* what) {
  for (Vertex x : s) {
    if (x >= n) throw InputError(std::string(what) + " contains vertex " + std::to_string(x) + " outside the space");
  }
}

Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& m, double rel) {
  if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
  const detail::ThinSvd svd = detail::thin_svd(m);
  const auto& s = svd.s;
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) > rel * s(0)) ++keep;
  return svd.u.leftCols(keep);
}

nlohmann::json set_json(const VertexSet& s) { return nlohmann::json(s.members()); }

}  // namespace

SetBasis::SetBasis(Vertex universe, std::vector<VertexSet> sets) : universe_(universe), sets_(std::move(sets)) {
  if (universe < 1) throw InputError("basis universe must be nonempty");
  if (sets_.empty()) throw InputError("basis must contain at least one set");
  for (const auto& s : sets_) check_members(s, universe, "basis set");
  // A Hausdorff topology on a finite set is discrete, so a separating basis holds every singleton.
  std::vector<char> singleton(static_cast<std::size_t>(universe_), 0);
  for (const auto& s : sets_) {
    if (s.size() == 1) singleton[static_cast<std::size_t>(*s.begin())] = 1;
  }
  separating_ = std::find(singleton.begin(), singleton.end(), 0) == singleton.end();
}

VertexSet discretize_set(const VertexSet& f, const SetBasis& basis, std::size_t n) {
  if (n > basis.size()) throw InputError("discretization index out of range");
  check_members(f, basis.universe(), "set");
  std::vector<char> removed(static_cast<std::size_t>(basis.universe()), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!basis[i].intersect(f).empty()) continue;
    for (Vertex x : basis[i]) removed[static_cast<std::size_t>(x)] = 1;
  }
  std::vector<Vertex> out;
  for (Vertex x = 0; x < basis.universe(); ++x) {
    if (!removed[static_cast<std::size_t>(x)]) out.push_back(x);
  }
  return VertexSet(std::move(out));
}

std::string to_string(Statistic s) { return s == Statistic::MaxAbs ? "max_abs" : "mean"; }

ExplorationRule::ExplorationRule(const Space& space, std::vector<VertexSet> a_schedule,
                                 std::vector<VertexSet> b_schedule, ThresholdPredicate predicate, VertexSet peek)
    : ExplorationRule(space, std::move(a_schedule), std::move(b_schedule), predicate, std::move(peek), true) {}

ExplorationRule ExplorationRule::unaudited(const Space& space, std::vector<VertexSet> a_schedule,
                                           std::vector<VertexSet> b_schedule, ThresholdPredicate predicate,
                                           VertexSet peek) {
  return ExplorationRule(space, std::move(a_schedule), std::move(b_schedule), predicate, std::move(peek), false);
}

ExplorationRule ExplorationRule::constant(const Space& space, VertexSet a, VertexSet b) {
  return ExplorationRule(space, {std::move(a)}, {std::move(b)},
                         {-std::numeric_limits<double>::infinity(), Statistic::MaxAbs});
}

ExplorationRule::ExplorationRule(const Space& space, std::vector<VertexSet> a_schedule,
                                 std::vector<VertexSet> b_schedule, ThresholdPredicate predicate, VertexSet peek,
                                 bool audit)
    : a_(std::move(a_schedule)), b_(std::move(b_schedule)), predicate_(predicate), peek_(std::move(peek)),
      audited_(audit) {
  const Vertex n = space.size();
  if (a_.empty()) throw InputError("rule needs at least one step");
  if (a_.size() != b_.size()) throw InputError("A and B schedules have different lengths");
  if (std::isnan(predicate_.theta)) throw InputError("threshold is NaN");
  check_members(peek_, n, "peek set");
  for (std::size_t k = 0; k < a_.size(); ++k) {
    check_members(a_[k], n, "A schedule");
    check_members(b_[k], n, "B schedule");
    if (!b_[k].is_subset_of(a_[k])) throw InputError("B_" + std::to_string(k) + " is not a subset of A_" + std::to_string(k));
    if (k > 0 && !a_[k - 1].is_subset_of(a_[k])) throw InputError("A schedule is not increasing at step " + std::to_string(k));
    if (k > 0 && !b_[k].is_subset_of(b_[k - 1])) throw InputError("B schedule is not decreasing at step " + std::to_string(k));
    annulus_.push_back(a_[k].intersect(thickened_complement(space, b_[k])));
    reads_.push_back(annulus_.back().unite(peek_));
    if (audited_ && !peek_.is_subset_of(annulus_.back())) {
      throw InputError("predicate reads vertices outside the annulus at step " + std::to_string(k) + ": " +
                       peek_.minus(annulus_.back()).to_string());
    }
  }
}

double rule_statistic(const GaussianField& field, const ExplorationRule& rule, std::size_t k, const Eigen::VectorXd& h) {
  const VertexSet& s = rule.reads(k);
  if (s.empty()) return -std::numeric_limits<double>::infinity();
  const DirichletForm& form = field.form();
  std::map<Vertex, std::pair<double, int>> comp_mean;
  for (Vertex x : s) {
    const Vertex c = form.component_of()[static_cast<std::size_t>(x)];
    if (form.component_killed(c)) continue;
    auto& acc = comp_mean[c];
    acc.first += h[x];
    acc.second += 1;
  }
  double max_abs = 0.0, sum = 0.0;
  for (Vertex x : s) {
    const Vertex c = form.component_of()[static_cast<std::size_t>(x)];
    double value = h[x];
    if (!form.component_killed(c)) {
      const auto& acc = comp_mean[c];
      value -= acc.first / acc.second;
    }
    max_abs = std::max(max_abs, std::abs(value));
    sum += value;
  }
  return rule.predicate().stat == Statistic::MaxAbs ? max_abs : sum / static_cast<double>(s.size());
}

StoppingSample run_exploration(const GaussianField& field, const ExplorationRule& rule, const Eigen::VectorXd& h) {
  if (h.size() != field.size()) throw InputError("field sample has wrong length");
  std::size_t k = 0;
  for (; k + 1 < rule.steps(); ++k) {
    if (rule_statistic(field, rule, k, h) >= rule.predicate().theta) break;
  }
  return {k, rule.a(k), rule.b(k)};
}

std::vector<std::size_t> run_exploration_batch(const GaussianField& field, const ExplorationRule& rule,
                                               const Eigen::MatrixXd& samples) {
  std::vector<std::size_t> out(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = run_exploration(field, rule, samples.row(r).transpose()).k;
  }
  return out;
}

ConditionalResampler::ConditionalResampler(const GaussianField& field, const VertexSet& keep) {
  const FunctionalSubspace w = sigma_field(field, keep);
  kept_ = w.dim() > 0 ? orthonormal_span(field.whiten(w.basis()), 1e-10) : Eigen::MatrixXd(field.noise_dim(), 0);
}

Eigen::MatrixXd ConditionalResampler::resample(const Eigen::VectorXd& z, const Eigen::MatrixXd& fresh) const {
  Eigen::MatrixXd diff = (-fresh).colwise() + z;
  return fresh + kept_ * (kept_.transpose() * diff);
}

nlohmann::json HypothesisReport::to_json() const {
  return {{"set_a", set_json(a)}, {"set_b", set_json(b)}, {"trials", trials}, {"bases", bases},
          {"violations", violations}, {"event_rate", event_rate}, {"pass", pass}};
}

HypothesisReport verify_stopping_hypothesis(const GaussianField& field, const ExplorationRule& rule,
                                            const VertexSet& a, const VertexSet& b, std::size_t trials,
                                            std::uint64_t seed) {
  if (trials < 1) throw InputError("trials must be at least 1");
  const Space& space = field.form().space();
  check_members(a, space.size(), "set A");
  check_members(b, space.size(), "set B");
  HypothesisReport rep;
  rep.a = a;
  rep.b = b;
  rep.trials = trials;
  rep.bases = (trials + kResamplesPerBase - 1) / kResamplesPerBase;

  auto event = [&](const Eigen::VectorXd& h) {
    const StoppingSample s = run_exploration(field, rule, h);
    return s.a.is_subset_of(a) && thickened_complement(space, s.b).is_subset_of(b);
  };
  const ConditionalResampler resampler(field, a.intersect(b));
  const Eigen::MatrixXd base = field.white_noise(static_cast<Eigen::Index>(rep.bases), seed);
  const Eigen::MatrixXd fresh = field.white_noise(static_cast<Eigen::Index>(trials), mix_seed(seed, 0x7e57));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rep.bases; ++i) {
    const Eigen::VectorXd z = base.row(static_cast<Eigen::Index>(i)).transpose();
    const bool ref = event(field.color(z));
    hits += ref ? 1 : 0;
    const std::size_t first = i * kResamplesPerBase;
    const std::size_t count = std::min(kResamplesPerBase, trials - first);
    const Eigen::MatrixXd zt =
        fresh.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)).transpose();
    const Eigen::MatrixXd h = field.color(resampler.resample(z, zt));
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      if (event(h.col(c)) != ref) ++rep.violations;
    }
  }
  rep.event_rate = static_cast<double>(hits) / static_cast<double>(rep.bases);
  rep.pass = rep.violations == 0;
  return rep;
}

nlohmann::json MeasurabilityReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells) {
    arr.push_back({{"k", c.k}, {"bases", c.bases}, {"trials", c.trials}, {"a_violations", c.a_violations},
                   {"b_violations", c.b_violations}});
  }
  return {{"cells", arr}, {"pass", pass}};
}

MeasurabilityReport check_cell_measurability(const GaussianField& field, const ExplorationRule& rule,
                                             std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("trials must be at least 1");
  const Space& space = field.form().space();
  const std::size_t n_bases = std::max<std::size_t>(10, trials / kResamplesPerBase);
  const std::size_t per_base = std::max<std::size_t>(1, trials / n_bases);
  const Eigen::MatrixXd base = field.white_noise(static_cast<Eigen::Index>(n_bases), seed);
  const Eigen::MatrixXd fresh =
      field.white_noise(static_cast<Eigen::Index>(n_bases * per_base), mix_seed(seed, 0xce11));

  std::map<std::size_t, CellMeasurability> cells;
  std::map<std::size_t, std::pair<ConditionalResampler, ConditionalResampler>> resamplers;
  for (std::size_t i = 0; i < n_bases; ++i) {
    const Eigen::VectorXd z = base.row(static_cast<Eigen::Index>(i)).transpose();
    const std::size_t k = run_exploration(field, rule, field.color(z)).k;
    auto it = resamplers.find(k);
    if (it == resamplers.end()) {
      it = resamplers
               .emplace(k, std::make_pair(ConditionalResampler(field, rule.a(k)),
                                          ConditionalResampler(field, thickened_complement(space, rule.b(k)))))
               .first;
    }
    CellMeasurability& cell = cells[k];
    cell.k = k;
    cell.bases += 1;
    cell.trials += per_base;
    const Eigen::MatrixXd zt =
        fresh.middleRows(static_cast<Eigen::Index>(i * per_base), static_cast<Eigen::Index>(per_base)).transpose();
    const Eigen::MatrixXd ha = field.color(it->second.first.resample(z, zt));
    const Eigen::MatrixXd hb = field.color(it->second.second.resample(z, zt));
    for (Eigen::Index c = 0; c < ha.cols(); ++c) {
      if (!(run_exploration(field, rule, ha.col(c)).a == rule.a(k))) ++cell.a_violations;
      if (!(run_exploration(field, rule, hb.col(c)).b == rule.b(k))) ++cell.b_violations;
    }
  }
  MeasurabilityReport rep;
  for (auto& [k, c] : cells) {
    if (c.a_violations > 0 || c.b_violations > 0) rep.pass = false;
    rep.cells.push_back(c);
  }
  return rep;
}

nlohmann::json StrongMarkovReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells) {
    arr.push_back({{"k", c.k},
                   {"set_a", set_json(c.a)},
                   {"set_b", set_json(c.b)},
                   {"count", c.count},
                   {"asserted", c.asserted},
                   {"inside_dim", c.inside_dim},
                   {"outside_dim", c.outside_dim},
                   {"max_partial_correlation", c.max_partial_correlation},
                   {"threshold", c.threshold},
                   {"pass", c.pass}});
  }
  return {{"samples", samples}, {"seed", seed}, {"min_cell", min_cell}, {"cells", arr}, {"pass", pass}};
}

namespace {

// Columns of x with the span of d removed; columns essentially inside span(d) are dropped.
Eigen::MatrixXd residualize(const Eigen::MatrixXd& x, const Eigen::MatrixXd& qd) {
  Eigen::MatrixXd r = x;
  for (int pass = 0; pass < 2; ++pass) r -= qd * (qd.transpose() * r);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double centered = (x.col(c).array() - x.col(c).mean()).matrix().norm();
    if (r.col(c).norm() > 1e-6 * centered) keep.push_back(c);
  }
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = r.col(keep[i]) / r.col(keep[i]).norm();
  }
  return out;
}

}  // namespace

StrongMarkovReport strong_markov_mc(const GaussianField& field, const ExplorationRule& rule, std::size_t n_samples,
                                    std::uint64_t seed, std::size_t min_cell) {
  if (n_samples < 1) throw InputError("sample count must be at least 1");
  const Space& space = field.form().space();
  StrongMarkovReport rep;
  rep.samples = n_samples;
  rep.seed = seed;
  rep.min_cell = min_cell;

  const Eigen::MatrixXd h = field.sample_batch(static_cast<Eigen::Index>(n_samples), seed);
  const std::vector<std::size_t> ks = run_exploration_batch(field, rule, h);
  std::map<std::size_t, std::vector<Eigen::Index>> members;
  for (std::size_t i = 0; i < ks.size(); ++i) members[ks[i]].push_back(static_cast<Eigen::Index>(i));

  for (const auto& [k, rows] : members) {
    CellStatistics cell;
    cell.k = k;
    cell.a = rule.a(k);
    cell.b = rule.b(k);
    cell.count = rows.size();
    cell.asserted = cell.count >= min_cell;
    cell.threshold = 4.0 / std::sqrt(static_cast<double>(cell.count));

    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd hc(m, h.cols());
    for (Eigen::Index i = 0; i < m; ++i) hc.row(i) = h.row(rows[static_cast<std::size_t>(i)]);
    const FunctionalSubspace inside = sigma_field(field, cell.a);
    const FunctionalSubspace outside = sigma_field(field, thickened_complement(space, cell.b));
    const FunctionalSubspace annulus = sigma_field(field, rule.annulus(k));

    Eigen::MatrixXd design(m, 1 + annulus.dim());
    design.col(0).setOnes();
    if (annulus.dim() > 0) design.rightCols(annulus.dim()) = hc * annulus.basis();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const Eigen::MatrixXd qd = qr.householderQ() * Eigen::MatrixXd::Identity(m, qr.rank());

    if (m > qd.cols() + 2) {
      const Eigen::MatrixXd rin = residualize(hc * inside.basis(), qd);
      const Eigen::MatrixXd rout = residualize(hc * outside.basis(), qd);
      cell.inside_dim = static_cast<std::size_t>(rin.cols());
      cell.outside_dim = static_cast<std::size_t>(rout.cols());
      if (rin.cols() > 0 && rout.cols() > 0) {
        cell.max_partial_correlation = (rin.transpose() * rout).cwiseAbs().maxCoeff();
      }
    }
    cell.pass = !cell.asserted || cell.max_partial_correlation <= cell.threshold;
    if (!cell.pass) rep.pass = false;
    rep.cells.push_back(std::move(cell));
  }
  return rep;
}

namespace {

std::vector<VertexSet> parse_schedule(const nlohmann::json& j, const Space& space, const char* key) {
  std::vector<VertexSet> out;
  if (j.is_array()) {
    for (const auto& entry : j) {
      if (!entry.is_array()) throw InputError(std::string(key) + ": each explicit entry must be a list of vertex ids");
      std::vector<Vertex> ids;
      for (const auto& v : entry) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError(std::string(key) + ": bad vertex id");
        ids.push_back(v.get<Vertex>());
      }
      out.emplace_back(std::move(ids));
    }
    return out;
  }
  if (!j.is_string()) throw InputError(std::string(key) + " must be a list of sets or a ball(...) descriptor");
  const std::string text = j.get<std::string>();
  static const std::regex range_re(R"(\s*ball\(\s*(\d+)\s*,\s*(-?\d+)\s*:\s*(-?\d+)\s*\)\s*)");
  static const std::regex list_re(R"(\s*ball\(\s*(\d+)\s*,\s*\[([^\]]*)\]\s*\)\s*)");
  std::smatch m;
  std::vector<int> radii;
  Vertex center = 0;
  if (std::regex_match(text, m, range_re)) {
    center = std::stoll(m[1]);
    const int r0 = std::stoi(m[2]), r1 = std::stoi(m[3]);
    const int step = r1 >= r0 ? 1 : -1;
    for (int r = r0;; r += step) {
      radii.push_back(r);
      if (r == r1) break;
    }
  } else if (std::regex_match(text, m, list_re)) {
    center = std::stoll(m[1]);
    std::stringstream ss(m[2].str());
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        radii.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw InputError(std::string(key) + ": bad radius '" + tok + "'");
      }
    }
  } else {
    throw InputError(std::string(key) + ": cannot parse schedule '" + text + "'");
  }
  if (center >= space.size()) throw InputError(std::string(key) + ": ball center outside the space");
  for (int r : radii) out.push_back(space.ball(center, r));
  return out;
}

ThresholdPredicate parse_predicate(const std::string& text) {
  static const std::regex re(R"(\s*threshold\(\s*([^,\s]+)\s*,\s*(max_abs|mean)\s*\)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw InputError("cannot parse predicate '" + text + "'");
  ThresholdPredicate p;
  const std::string theta = m[1];
  if (theta == "-inf") {
    p.theta = -std::numeric_limits<double>::infinity();
  } else if (theta == "inf") {
    p.theta = std::numeric_limits<double>::infinity();
  } else {
    try {
      std::size_t used = 0;
      p.theta = std::stod(theta, &used);
      if (used != theta.size()) throw std::invalid_argument(theta);
    } catch (const std::exception&) {
      throw InputError("bad threshold '" + theta + "'");
    }
  }
  p.stat = m[2] == "max_abs" ? Statistic::MaxAbs : Statistic::Mean;
  return p;
}

}  // namespace

ExplorationRule parse_rule(const nlohmann::json& config, const Space& space) {
  if (!config.is_object()) throw InputError("rule config must be a JSON object");
  for (const char* key : {"a_schedule", "b_schedule", "predicate"}) {
    if (!config.contains(key)) throw InputError(std::string("rule config is missing '") + key + "'");
  }
  auto a = parse_schedule(config.at("a_schedule"), space, "a_schedule");
  auto b = parse_schedule(config.at("b_schedule"), space, "b_schedule");
  if (!config.at("predicate").is_string()) throw InputError("predicate must be a string");
  const ThresholdPredicate pred = parse_predicate(config.at("predicate").get<std::string>());
  VertexSet peek;
  if (config.contains("peek")) {
    std::vector<Vertex> ids;
    for (const auto& v : config.at("peek")) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError("peek: bad vertex id");
      ids.push_back(v.get<Vertex>());
    }
    peek = VertexSet(std::move(ids));
  }
  const bool audit = config.value("audit", true);
  if (audit) return ExplorationRule(space, std::move(a), std::move(b), pred, std::move(peek));
  return ExplorationRule::unaudited(space, std::move(a), std::move(b), pred, std::move(peek));
}

ExplorationRule read_rule_file(const std::string& path, const Space& space) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open rule file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("rule file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_rule(j, space);
}

}  // namespace dfield
