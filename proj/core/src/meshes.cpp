#include "dfield/meshes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dfield/gaussian_field.hpp"

namespace dfield {

namespace {

Eigen::VectorXd killing_vector(Vertex n, const std::vector<std::pair<Vertex, double>>& killing) {
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  for (auto [x, kappa] : killing) {
    if (x < 0 || x >= n) throw InputError("killing vertex out of range");
    k[x] += kappa;
  }
  return k;
}

std::vector<std::pair<Vertex, Vertex>> ref_from(const std::vector<WeightedEdge>& edges) {
  std::vector<std::pair<Vertex, Vertex>> out;
  for (const auto& e : edges) out.emplace_back(e.i, e.j);
  return out;
}

DirichletForm from_edges(Vertex n, std::vector<WeightedEdge> edges, Eigen::VectorXd killing) {
  auto refs = ref_from(edges);
  return form_from_components(Space::uniform(n, refs), std::move(edges), std::move(killing));
}

std::vector<WeightedEdge> random_tree_edges(Vertex n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::vector<WeightedEdge> edges;
  for (Vertex x = 1; x < n; ++x) {
    std::uniform_int_distribution<Vertex> parent(0, x - 1);
    edges.push_back({parent(rng), x, weight(rng)});
  }
  return edges;
}

Eigen::VectorXd random_killing(Vertex n, std::mt19937_64& rng, bool killed) {
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  if (!killed) return k;
  std::uniform_int_distribution<Vertex> pick(0, n - 1);
  std::uniform_real_distribution<double> amount(0.2, 1.0);
  k[pick(rng)] += amount(rng);
  return k;
}

}  // namespace

DirichletForm path_form(Vertex n, const std::vector<std::pair<Vertex, double>>& killing, double weight) {
  if (n < 1) throw InputError("path needs at least one vertex");
  std::vector<WeightedEdge> edges;
  for (Vertex x = 0; x + 1 < n; ++x) edges.push_back({x, x + 1, weight});
  return from_edges(n, std::move(edges), killing_vector(n, killing));
}

DirichletForm grid_form(Vertex rows, Vertex cols, const std::vector<std::pair<Vertex, double>>& killing) {
  if (rows < 1 || cols < 1) throw InputError("grid needs positive dimensions");
  std::vector<WeightedEdge> edges;
  for (Vertex r = 0; r < rows; ++r) {
    for (Vertex c = 0; c < cols; ++c) {
      const Vertex x = r * cols + c;
      if (c + 1 < cols) edges.push_back({x, x + 1, 1.0});
      if (r + 1 < rows) edges.push_back({x, x + cols, 1.0});
    }
  }
  return from_edges(rows * cols, std::move(edges), killing_vector(rows * cols, killing));
}

DirichletForm random_tree_form(Vertex n, std::uint64_t seed, bool killed) {
  std::mt19937_64 rng(mix_seed(seed, 11));
  auto edges = random_tree_edges(n, rng);
  return from_edges(n, std::move(edges), random_killing(n, rng, killed));
}

DirichletForm random_local_form(Vertex n, Vertex extra, std::uint64_t seed, bool killed) {
  std::mt19937_64 rng(mix_seed(seed, 13));
  auto edges = random_tree_edges(n, rng);
  std::set<std::pair<Vertex, Vertex>> present;
  for (const auto& e : edges) present.insert({std::min(e.i, e.j), std::max(e.i, e.j)});
  std::uniform_int_distribution<Vertex> pick(0, n - 1);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  const Vertex max_edges = n * (n - 1) / 2;
  for (Vertex added = 0, attempts = 0; added < extra && static_cast<Vertex>(present.size()) < max_edges &&
                                       attempts < 100 * (extra + 1);
       ++attempts) {
    Vertex i = pick(rng), j = pick(rng);
    if (i == j) continue;
    if (!present.insert({std::min(i, j), std::max(i, j)}).second) continue;
    edges.push_back({i, j, weight(rng)});
    ++added;
  }
  return from_edges(n, std::move(edges), random_killing(n, rng, killed));
}

DirichletForm add_edge(const DirichletForm& form, Vertex i, Vertex j, double weight) {
  auto edges = form.edges();
  edges.push_back({i, j, weight});
  return form_from_components(form.space(), std::move(edges), form.killing());
}

DirichletForm add_long_edge(const DirichletForm& form, std::uint64_t seed) {
  const Space& space = form.space();
  const Vertex n = form.size();
  std::set<std::pair<Vertex, Vertex>> jump;
  for (const auto& e : form.edges()) jump.insert({e.i, e.j});
  std::vector<std::pair<Vertex, Vertex>> candidates;
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      if (!space.adjacent(i, j) && !jump.count({i, j})) candidates.emplace_back(i, j);
    }
  }
  if (candidates.empty()) throw InputError("no non-adjacent pair available for a long edge");
  std::mt19937_64 rng(mix_seed(seed, 17));
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  const auto [i, j] = candidates[pick(rng)];
  return add_edge(form, i, j, weight(rng));
}

DirichletForm half_line_form(Vertex n, double delta) {
  if (n < 2) throw InputError("half-line grid needs n >= 2");
  if (!(delta > 0.0)) throw InputError("grid step must be positive");
  const double w = 1.0 / (2.0 * delta);
  std::vector<WeightedEdge> edges;
  for (Vertex x = 0; x + 1 < n; ++x) edges.push_back({x, x + 1, w});
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  k[0] = w;
  auto refs = ref_from(edges);
  return form_from_components(Space(Eigen::VectorXd::Constant(n, delta), refs), std::move(edges), std::move(k));
}

DirichletForm diagonal_form(Vertex n, double delta, const std::function<double(double)>& h) {
  if (n < 1) throw InputError("diagonal form needs n >= 1");
  if (!(delta > 0.0)) throw InputError("grid step must be positive");
  Eigen::VectorXd k(n);
  for (Vertex i = 0; i < n; ++i) {
    const double v = h(static_cast<double>(i) * delta);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InputError("h must be positive on the grid (h(" + std::to_string(static_cast<double>(i) * delta) + ") = " +
                       std::to_string(v) + ")");
    }
    k[i] = v * delta;
  }
  std::vector<std::pair<Vertex, Vertex>> refs;
  for (Vertex x = 0; x + 1 < n; ++x) refs.emplace_back(x, x + 1);
  return form_from_components(Space(Eigen::VectorXd::Constant(n, delta), refs), {}, std::move(k));
}

namespace {

DiskMesh disk_mesh(int mesh_n, bool closed, bool absorbing) {
  if (mesh_n < 4) throw InputError("disk mesh needs mesh_n >= 4");
  const double h = 2.0 / mesh_n;
  const int half = mesh_n / 2 + 1;
  auto inside = [&](int i, int j) {
    const double r2 = (i * h) * (i * h) + (j * h) * (j * h);
    return closed ? r2 <= 1.0 + 1e-12 : r2 < 1.0 - 1e-12;
  };
  std::map<std::pair<int, int>, Vertex> index;
  std::vector<std::pair<double, double>> coords;
  for (int j = -half; j <= half; ++j) {
    for (int i = -half; i <= half; ++i) {
      if (!inside(i, j)) continue;
      index[{i, j}] = static_cast<Vertex>(coords.size());
      coords.emplace_back(i * h, j * h);
    }
  }
  const auto n = static_cast<Vertex>(coords.size());
  std::vector<WeightedEdge> edges;
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  std::vector<char> on_ring(static_cast<std::size_t>(n), 0);
  for (const auto& [ij, x] : index) {
    const auto [i, j] = ij;
    const std::pair<int, int> nbrs[4] = {{i + 1, j}, {i, j + 1}, {i - 1, j}, {i, j - 1}};
    for (const auto& q : nbrs) {
      auto it = index.find(q);
      if (it == index.end()) {
        on_ring[static_cast<std::size_t>(x)] = 1;
        if (absorbing) k[x] += 0.5;
      } else if (it->second > x) {
        edges.push_back({x, it->second, 0.5});
      }
    }
  }
  auto refs = ref_from(edges);
  DiskMesh mesh{form_from_components(Space(Eigen::VectorXd::Constant(n, h * h), refs), std::move(edges), std::move(k)),
                h, std::move(coords), {}, {}};
  for (Vertex x = 0; x < n; ++x) {
    if (on_ring[static_cast<std::size_t>(x)]) mesh.ring.push_back(x);
  }
  auto angle = [&](Vertex x) {
    const auto& c = mesh.coords[static_cast<std::size_t>(x)];
    return std::atan2(c.second, c.first);
  };
  std::stable_sort(mesh.ring.begin(), mesh.ring.end(), [&](Vertex a, Vertex b) { return angle(a) < angle(b); });
  for (Vertex x : mesh.ring) mesh.ring_angle.push_back(angle(x));
  return mesh;
}

}  // namespace

DiskMesh neumann_disk(int mesh_n) { return disk_mesh(mesh_n, true, false); }

DiskMesh dirichlet_disk(int mesh_n) { return disk_mesh(mesh_n, false, true); }

std::vector<CorpusEntry> local_corpus(bool include_large, std::uint64_t seed) {
  std::vector<CorpusEntry> out;
  out.push_back({"path3-killed", path_form(3, {{0, 1.0}})});
  out.push_back({"path3-recurrent", path_form(3)});
  out.push_back({"path8-killed-both", path_form(8, {{0, 1.0}, {7, 0.5}})});
  out.push_back({"path12-recurrent", path_form(12)});
  out.push_back({"grid3x3-killed", grid_form(3, 3, {{0, 1.0}})});
  out.push_back({"grid3x4-recurrent", grid_form(3, 4)});
  out.push_back({"tree10-killed", random_tree_form(10, seed + 1, true)});
  out.push_back({"tree12-recurrent", random_tree_form(12, seed + 2, false)});
  out.push_back({"random9-killed", random_local_form(9, 5, seed + 3, true)});
  out.push_back({"random11-recurrent", random_local_form(11, 6, seed + 4, false)});
  if (include_large) {
    out.push_back({"path200-killed", path_form(200, {{0, 1.0}})});
    out.push_back({"grid12x12-recurrent", grid_form(12, 12)});
    out.push_back({"grid10x15-killed", grid_form(10, 15, {{0, 1.0}, {149, 1.0}})});
    out.push_back({"tree150-killed", random_tree_form(150, seed + 5, true)});
    out.push_back({"random200-recurrent", random_local_form(200, 120, seed + 6, false)});
  }
  return out;
}

}  // namespace dfield
