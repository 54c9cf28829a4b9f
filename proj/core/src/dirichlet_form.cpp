#include "dfield/dirichlet_form.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include "dfield/factor.hpp"

namespace dfield {

namespace detail {
struct FormCache {
  std::mutex mu;
  std::unique_ptr<GroundedFactor> factor;
};
}  // namespace detail

namespace {

std::vector<Vertex> label_components(Vertex n, const std::vector<WeightedEdge>& edges) {
  std::vector<Vertex> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Vertex{0});
  auto find = [&](Vertex x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  };
  for (const auto& e : edges) {
    Vertex a = find(e.i), b = find(e.j);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  // Relabel roots in order of first appearance so labels are deterministic.
  std::vector<Vertex> label(static_cast<std::size_t>(n), -1), root_label(static_cast<std::size_t>(n), -1);
  Vertex next = 0;
  for (Vertex x = 0; x < n; ++x) {
    Vertex r = find(x);
    auto& rl = root_label[static_cast<std::size_t>(r)];
    if (rl < 0) rl = next++;
    label[static_cast<std::size_t>(x)] = rl;
  }
  return label;
}

std::string edge_name(Vertex i, Vertex j) {
  std::ostringstream os;
  os << '(' << i << ',' << j << ')';
  return os.str();
}

std::vector<WeightedEdge> checked_edges(Vertex n, std::vector<WeightedEdge> edges);

}  // namespace

std::string to_string(Recurrence r) {
  switch (r) {
    case Recurrence::Transient: return "transient";
    case Recurrence::Recurrent: return "recurrent";
    case Recurrence::Mixed: return "mixed";
  }
  return "?";
}

std::string to_string(Connectivity c) { return c == Connectivity::Irreducible ? "irreducible" : "reducible"; }

DirichletForm::DirichletForm(Space space, std::vector<WeightedEdge> edges, Eigen::VectorXd killing,
                             const Eigen::VectorXd* exact_diagonal)
    : space_(std::move(space)), edges_(std::move(edges)), killing_(std::move(killing)),
      cache_(std::make_shared<detail::FormCache>()) {
  const Vertex n = space_.size();
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (const auto& e : edges_) {
    trips.emplace_back(e.i, e.j, -e.weight);
    trips.emplace_back(e.j, e.i, -e.weight);
  }
  // Fixed summation order: jump weights by increasing neighbour, then killing.
  std::vector<std::vector<std::pair<Vertex, double>>> incident(static_cast<std::size_t>(n));
  for (const auto& e : edges_) {
    incident[static_cast<std::size_t>(e.i)].emplace_back(e.j, e.weight);
    incident[static_cast<std::size_t>(e.j)].emplace_back(e.i, e.weight);
  }
  for (Vertex x = 0; x < n; ++x) {
    auto& inc = incident[static_cast<std::size_t>(x)];
    std::sort(inc.begin(), inc.end());
    double s = 0.0;
    for (auto& [y, w] : inc) s += w;
    diag[x] = s + killing_[x];
    // A validated input matrix keeps its own diagonal when it agrees up to rounding.
    if (exact_diagonal != nullptr && std::abs(diag[x] - (*exact_diagonal)[x]) <= 1e-12 * std::max(1.0, std::abs(diag[x]))) {
      diag[x] = (*exact_diagonal)[x];
    }
  }
  for (Vertex x = 0; x < n; ++x) trips.emplace_back(x, x, diag[x]);
  q_.resize(n, n);
  q_.setFromTriplets(trips.begin(), trips.end());
  q_.makeCompressed();

  component_ = label_components(n, edges_);
  Vertex ncomp = 0;
  for (Vertex c : component_) ncomp = std::max(ncomp, c + 1);
  component_killed_.assign(static_cast<std::size_t>(ncomp), 0);
  for (Vertex x = 0; x < n; ++x) {
    if (killing_[x] > 0.0) component_killed_[static_cast<std::size_t>(component_[static_cast<std::size_t>(x)])] = 1;
  }
}

bool DirichletForm::nonsingular() const {
  return std::all_of(component_killed_.begin(), component_killed_.end(), [](char k) { return k != 0; });
}

void DirichletForm::project_to_range(Eigen::Ref<Eigen::VectorXd> v) const {
  const auto nc = static_cast<std::size_t>(component_count());
  std::vector<double> sum(nc, 0.0);
  std::vector<double> count(nc, 0.0);
  for (Vertex x = 0; x < size(); ++x) {
    auto c = static_cast<std::size_t>(component_[static_cast<std::size_t>(x)]);
    sum[c] += v[x];
    count[c] += 1.0;
  }
  for (Vertex x = 0; x < size(); ++x) {
    auto c = static_cast<std::size_t>(component_[static_cast<std::size_t>(x)]);
    if (!component_killed_[c]) v[x] -= sum[c] / count[c];
  }
}

double DirichletForm::range_defect(const Eigen::VectorXd& v) const {
  const auto nc = static_cast<std::size_t>(component_count());
  std::vector<double> sum(nc, 0.0);
  for (Vertex x = 0; x < size(); ++x) sum[static_cast<std::size_t>(component_[static_cast<std::size_t>(x)])] += v[x];
  double worst = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    if (!component_killed_[c]) worst = std::max(worst, std::abs(sum[c]));
  }
  return worst;
}

const GroundedFactor& DirichletForm::grounded_factor() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->factor) {
    std::vector<Vertex> ground;
    std::vector<char> seen(static_cast<std::size_t>(component_count()), 0);
    for (Vertex x = 0; x < size(); ++x) {
      auto c = static_cast<std::size_t>(component_[static_cast<std::size_t>(x)]);
      if (!component_killed_[c] && !seen[c]) {
        seen[c] = 1;
        ground.push_back(x);
      }
    }
    cache_->factor = std::make_unique<GroundedFactor>(q_, std::move(ground));
  }
  return *cache_->factor;
}

namespace {

std::vector<WeightedEdge> checked_edges(Vertex n, std::vector<WeightedEdge> edges) {
  std::vector<WeightedEdge> kept;
  for (auto e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) throw InputError("edge " + edge_name(e.i, e.j) + " out of range");
    if (e.i == e.j) throw InputError("self-loop at vertex " + std::to_string(e.i));
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw InputError("negative weight on edge " + edge_name(e.i, e.j));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.weight > 0.0) kept.push_back(e);
  }
  std::sort(kept.begin(), kept.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  for (std::size_t k = 1; k < kept.size(); ++k) {
    if (kept[k].i == kept[k - 1].i && kept[k].j == kept[k - 1].j) {
      throw InputError("duplicate edge " + edge_name(kept[k].i, kept[k].j));
    }
  }
  return kept;
}

void check_killing(Vertex n, const Eigen::VectorXd& killing) {
  if (killing.size() != n) throw InputError("killing vector has wrong length");
  for (Vertex x = 0; x < n; ++x) {
    if (!std::isfinite(killing[x]) || killing[x] < 0.0) {
      throw InputError("negative killing weight at vertex " + std::to_string(x));
    }
  }
}

}  // namespace

DirichletForm form_from_components(Space space, std::vector<WeightedEdge> edges, Eigen::VectorXd killing) {
  const Vertex n = space.size();
  check_killing(n, killing);
  auto kept = checked_edges(n, std::move(edges));
  return DirichletForm(std::move(space), std::move(kept), std::move(killing));
}

Eigen::VectorXd unit_contraction(const Eigen::VectorXd& f) { return f.cwiseMax(0.0).cwiseMin(1.0); }

DirichletForm validate_markovian(const Space& space, const Eigen::MatrixXd& q, const MarkovianOptions& opts) {
  const Vertex n = space.size();
  if (q.rows() != n || q.cols() != n) throw InputError("matrix size does not match the space");
  if (!q.allFinite()) throw InputError("matrix has non-finite entries");
  const double scale = std::max(q.diagonal().cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff());
  const double eps = opts.tol * (scale > 0.0 ? scale : 1.0);
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      if (std::abs(q(i, j) - q(j, i)) > eps) {
        throw InputError("matrix is not symmetric at " + edge_name(i, j));
      }
    }
  }

  // Algebraic criterion with explicit witnesses.
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = 0; j < n; ++j) {
      if (i == j || q(i, j) <= eps) continue;
      // f = e_i - c e_j with c = Q_ij / Q_jj: E(f,f) = Q_ii - c Q_ij < Q_ii = E(0 v f ^ 1).
      const double c = q(j, j) > 0.0 ? q(i, j) / q(j, j) : 1.0;
      Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
      f[i] = 1.0;
      f[j] = -c;
      throw NonMarkovianError("positive off-diagonal entry at " + edge_name(i, j), f);
    }
  }
  const Eigen::VectorXd rows = q.rowwise().sum();
  for (Vertex i = 0; i < n; ++i) {
    if (rows[i] >= -eps) continue;
    // f = 1 + t e_i clips to 1, and E(f,f) = E(1,1) + 2 t r_i + t^2 Q_ii < E(1,1).
    const double t = q(i, i) > 0.0 ? -rows[i] / q(i, i) : 1.0;
    Eigen::VectorXd f = Eigen::VectorXd::Ones(n);
    f[i] += t;
    throw NonMarkovianError("negative row sum at vertex " + std::to_string(i), f);
  }

  // Contraction probes. The criterion above implies they all pass.
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-0.5, 1.5);
  for (int p = 0; p < opts.probes; ++p) {
    Eigen::VectorXd f(n);
    for (Vertex x = 0; x < n; ++x) f[x] = unif(rng);
    const Eigen::VectorXd g = unit_contraction(f);
    const double ef = f.dot(q * f);
    const double eg = g.dot(q * g);
    if (eg > ef + 1e-12 * std::abs(ef) + 1e-12 * scale * f.squaredNorm()) {
      throw NonMarkovianError("contraction probe failed", f);
    }
  }

  std::vector<WeightedEdge> edges;
  Eigen::VectorXd killing(n);
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      const double w = -0.5 * (q(i, j) + q(j, i));
      if (w > eps) edges.push_back({i, j, w});
    }
  }
  for (Vertex i = 0; i < n; ++i) {
    double k = 0.0;
    for (Vertex j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = -0.5 * (q(i, j) + q(j, i));
      if (w > eps) k -= w;
    }
    k += q(i, i);
    killing[i] = k > eps ? k : 0.0;
  }
  const Eigen::VectorXd diag = q.diagonal();
  auto kept = checked_edges(n, std::move(edges));
  return DirichletForm(space, std::move(kept), std::move(killing), &diag);
}

bool is_local_wrt(const DirichletForm& form) { return nonlocal_edges(form).empty(); }

std::vector<WeightedEdge> nonlocal_edges(const DirichletForm& form) {
  std::vector<WeightedEdge> out;
  for (const auto& e : form.edges()) {
    if (!form.space().adjacent(e.i, e.j)) out.push_back(e);
  }
  return out;
}

Classification classify(const DirichletForm& form) {
  Classification c{};
  c.connectivity = form.component_count() == 1 ? Connectivity::Irreducible : Connectivity::Reducible;
  bool any_killed = false, any_free = false;
  for (Vertex k = 0; k < form.component_count(); ++k) {
    (form.component_killed(k) ? any_killed : any_free) = true;
  }
  if (!any_free) {
    c.recurrence = Recurrence::Transient;
  } else if (!any_killed) {
    c.recurrence = Recurrence::Recurrent;
  } else {
    c.recurrence = Recurrence::Mixed;
  }
  return c;
}

}  // namespace dfield
