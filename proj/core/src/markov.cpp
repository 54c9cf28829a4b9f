#include "dfield/markov.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "thin_svd.hpp"

#include "dfield/potential.hpp"

namespace dfield {

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json set_json(const VertexSet& s) { return nlohmann::json(s.members()); }

std::optional<Vertex> argmax_abs(const Eigen::VectorXd& v) {
  if (v.size() == 0) return std::nullopt;
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  return i;
}

MarkovReport from_ci(std::string check, const VertexSet& a, std::optional<VertexSet> b, const CondIndepResult& ci) {
  MarkovReport r;
  r.check = std::move(check);
  r.a = a;
  r.b = std::move(b);
  r.holds = ci.holds;
  r.max_violation = ci.max_violation;
  r.tol = ci.tol;
  if (!ci.holds) {
    r.witness_f = ci.witness_u;
    r.witness_g = ci.witness_v;
    r.witness_vertex = argmax_abs(ci.witness_v);
  }
  return r;
}

void require_subset(const VertexSet& b, const VertexSet& a) {
  if (!b.is_subset_of(a)) throw InputError("B must be a subset of A");
}

// Test functions f_i = Q+ v_i for an orthonormal basis v_i of sigma(TC(A)), and their
// harmonic extensions from A.
struct OutsideFamily {
  FunctionalSubspace outside;
  Eigen::MatrixXd extensions;  // columns Q H_A f_i
  Eigen::MatrixXd harmonic;    // their span, numerically zero directions dropped
};

OutsideFamily outside_family(const GaussianField& field, const VertexSet& a) {
  const DirichletForm& form = field.form();
  FunctionalSubspace outside = sigma_field(field, thickened_complement(form.space(), a));
  Eigen::MatrixXd ext(form.size(), outside.dim());
  Eigen::MatrixXd span(form.size(), 0);
  if (outside.dim() > 0) {
    const Eigen::MatrixXd f = green_apply(form, outside.basis());
    const Eigen::MatrixXd h = hitting(form, a, f);
    ext = form.matrix() * h;
    // Q x lies in range(Q); drop the rounding residue so near-zero columns pass the range check.
    for (Eigen::Index c = 0; c < ext.cols(); ++c) form.project_to_range(ext.col(c));
    // Q H_A f often vanishes exactly (f constant on A). Truncate against the size of the
    // operands, not of the result, so cancellation noise is not promoted to a direction.
    double q_norm = 0.0;
    for (Eigen::Index r = 0; r < form.matrix().outerSize(); ++r) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(form.matrix(), r); it; ++it) row += std::abs(it.value());
      q_norm = std::max(q_norm, row);
    }
    const double floor = 1e-11 * q_norm * std::max(h.cwiseAbs().maxCoeff(), 1e-300) *
                         std::sqrt(static_cast<double>(form.size()));
    const detail::ThinSvd svd = detail::thin_svd(ext);
    Eigen::Index keep = 0;
    while (keep < svd.s.size() && svd.s(keep) > floor) ++keep;
    span = svd.u.leftCols(keep) * svd.s.head(keep).asDiagonal();
    for (Eigen::Index c = 0; c < span.cols(); ++c) form.project_to_range(span.col(c));
  }
  return {std::move(outside), std::move(ext), std::move(span)};
}

}  // namespace

nlohmann::json MarkovReport::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["set"] = set_json(a);
  if (b) j["set_b"] = set_json(*b);
  j["verdict"] = holds ? "holds" : "fails";
  j["max_violation"] = max_violation;
  j["tol"] = tol;
  nlohmann::json w = nlohmann::json::object();
  if (witness_f.size() > 0) w["f"] = vector_json(witness_f);
  if (witness_g.size() > 0) w["g"] = vector_json(witness_g);
  if (witness_vertex) w["vertex"] = *witness_vertex;
  j["witness"] = w.empty() ? nlohmann::json(nullptr) : w;
  return j;
}

MarkovReport check_markov(const GaussianField& field, const VertexSet& a, double tol) {
  const Space& space = field.form().space();
  const auto ci = cond_indep(field, sigma_field(field, a), sigma_field(field, thickened_complement(space, a)),
                             sigma_field(field, boundary(space, a)), tol);
  return from_ci("markov", a, std::nullopt, ci);
}

MarkovReport check_spectrum_criterion(const GaussianField& field, const VertexSet& a, double tol) {
  const DirichletForm& form = field.form();
  MarkovReport r;
  r.check = "spectrum";
  r.a = a;
  r.tol = tol;
  const VertexSet inner = interior(form.space(), a);
  const OutsideFamily fam = outside_family(field, a);
  if (inner.empty() || fam.outside.dim() == 0) return r;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(inner.size()), fam.extensions.cols());
  for (std::size_t k = 0; k < inner.size(); ++k) g.row(static_cast<Eigen::Index>(k)) = fam.extensions.row(inner.members()[k]);
  const detail::ThinSvd svd = detail::thin_svd(g);
  r.max_violation = svd.s(0);
  r.holds = r.max_violation <= tol;
  if (!r.holds) {
    const Eigen::VectorXd coeff = svd.v.col(0);
    r.witness_f = green_apply(form, Eigen::VectorXd(fam.outside.basis() * coeff));
    r.witness_g = fam.extensions * coeff;
    Eigen::Index k = 0;
    svd.u.col(0).cwiseAbs().maxCoeff(&k);
    r.witness_vertex = inner.members()[static_cast<std::size_t>(k)];
  }
  return r;
}

MarkovReport check_pseudo_markov(const GaussianField& field, const VertexSet& a, double tol) {
  const OutsideFamily fam = outside_family(field, a);
  FunctionalSubspace harmonic = fam.harmonic.cols() > 0 ? FunctionalSubspace(field, fam.harmonic)
                                                          : FunctionalSubspace::zero(field);
  const auto ci = cond_indep(field, sigma_field(field, a), fam.outside, harmonic, tol);
  return from_ci("pseudo_markov", a, std::nullopt, ci);
}

MarkovReport check_two_set(const GaussianField& field, const VertexSet& a, const VertexSet& b, double tol) {
  require_subset(b, a);
  const Space& space = field.form().space();
  const VertexSet tcb = thickened_complement(space, b);
  const auto ci = cond_indep(field, sigma_field(field, a), sigma_field(field, tcb),
                             sigma_field(field, a.intersect(tcb)), tol);
  return from_ci("two_set", a, b, ci);
}

MarkovReport check_join_identity(const GaussianField& field, const VertexSet& a, const VertexSet& b, double tol) {
  require_subset(b, a);
  const Space& space = field.form().space();
  const VertexSet tcb = thickened_complement(space, b);
  const FunctionalSubspace joined =
      join(sigma_field(field, thickened_complement(space, a)), sigma_field(field, a.intersect(tcb)));
  const FunctionalSubspace target = sigma_field(field, tcb);
  MarkovReport r;
  r.check = "join_identity";
  r.a = a;
  r.b = b;
  r.tol = tol;
  r.max_violation = std::max(containment_residual(joined, target), containment_residual(target, joined));
  r.holds = r.max_violation <= tol;
  return r;
}

std::string to_string(ScanLabel label) {
  switch (label) {
    case ScanLabel::Holds: return "holds";
    case ScanLabel::Fails: return "fails";
    case ScanLabel::Indeterminate: return "indeterminate";
  }
  return "?";
}

bool ScanTable::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ScanRow& r) { return r.consistent; });
}

std::string ScanTable::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "form,local,set,violation,label\n";
  for (const auto& row : rows) {
    for (const auto& cell : row.cells) {
      os << row.name << ',' << (row.local ? "true" : "false") << ",\"" << cell.a.to_string() << "\","
         << cell.violation << ',' << to_string(cell.label) << '\n';
    }
  }
  return os.str();
}

nlohmann::json ScanTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json j;
    j["form"] = row.name;
    j["local"] = row.local;
    j["irreducible"] = row.irreducible;
    j["sets_checked"] = row.cells.size();
    j["all_hold"] = row.all_hold;
    j["indeterminate"] = row.indeterminate;
    j["worst_violation"] = row.worst_violation;
    j["witness"] = row.witness ? set_json(*row.witness) : nlohmann::json(nullptr);
    j["consistent"] = row.consistent;
    rows_json.push_back(j);
  }
  return {{"rows", rows_json}, {"pass", pass()}};
}

ScanTable equivalence_scan(const std::vector<NamedForm>& forms, const std::vector<std::vector<VertexSet>>& sets,
                           double tol, double indeterminate_ceiling) {
  if (sets.size() != forms.size() && sets.size() > 1) {
    throw InputError("equivalence_scan needs one set list per form, or a single shared list");
  }
  ScanTable table;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const DirichletForm& form = forms[i].form;
    const Space& space = form.space();
    const Vertex n = form.size();
    ScanRow row;
    row.name = forms[i].name;
    row.local = is_local_wrt(form);
    row.irreducible = classify(form).connectivity == Connectivity::Irreducible;

    std::vector<VertexSet> candidates;
    std::set<std::vector<Vertex>> seen;
    auto add = [&](const VertexSet& s) {
      if (s.empty() || static_cast<Vertex>(s.size()) == n) return;
      if (seen.insert(s.members()).second) candidates.push_back(s);
    };
    if (!sets.empty()) {
      for (const auto& s : sets.size() == 1 ? sets[0] : sets[i]) add(s);
    }
    for (const auto& e : nonlocal_edges(form)) {
      add(space.ball(e.i, 1));
      add(space.ball(e.j, 1));
    }

    const GaussianField field(form, 0);
    for (const auto& a : candidates) {
      const MarkovReport r = check_markov(field, a, tol);
      ScanCell cell{a, r.max_violation, ScanLabel::Holds};
      if (r.max_violation > tol) {
        cell.label = r.max_violation < indeterminate_ceiling ? ScanLabel::Indeterminate : ScanLabel::Fails;
      }
      if (cell.label != ScanLabel::Holds) row.all_hold = false;
      if (cell.label == ScanLabel::Indeterminate) ++row.indeterminate;
      if (cell.violation > row.worst_violation) {
        row.worst_violation = cell.violation;
        if (cell.label == ScanLabel::Fails) row.witness = a;
      }
      row.cells.push_back(std::move(cell));
    }
    row.consistent = row.indeterminate == 0 && (row.local == row.all_hold);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<VertexSet> all_proper_subsets(Vertex n) {
  if (n < 1 || n > 20) throw InputError("exhaustive subsets need 1 <= n <= 20");
  std::vector<VertexSet> out;
  const std::uint32_t full = (1u << n) - 1u;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    std::vector<Vertex> members;
    for (Vertex x = 0; x < n; ++x) {
      if (mask & (1u << x)) members.push_back(x);
    }
    out.emplace_back(std::move(members));
  }
  return out;
}

}  // namespace dfield
