#include "dfield/space.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <queue>
#include <sstream>

namespace dfield {

VertexSet::VertexSet(std::initializer_list<Vertex> ids) : VertexSet(std::vector<Vertex>(ids)) {}

VertexSet::VertexSet(std::vector<Vertex> ids) : members_(std::move(ids)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.front() < 0) {
    throw InputError("negative vertex id " + std::to_string(members_.front()));
  }
}

VertexSet VertexSet::all(Vertex n) { return range(0, n); }

VertexSet VertexSet::range(Vertex first, Vertex last) {
  std::vector<Vertex> ids;
  for (Vertex x = first; x < last; ++x) ids.push_back(x);
  VertexSet s;
  s.members_ = std::move(ids);
  return s;
}

bool VertexSet::contains(Vertex x) const { return std::binary_search(members_.begin(), members_.end(), x); }

bool VertexSet::is_subset_of(const VertexSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
}

VertexSet VertexSet::complement(Vertex n) const {
  std::vector<Vertex> out;
  std::size_t k = 0;
  for (Vertex x = 0; x < n; ++x) {
    while (k < members_.size() && members_[k] < x) ++k;
    if (k < members_.size() && members_[k] == x) continue;
    out.push_back(x);
  }
  VertexSet s;
  s.members_ = std::move(out);
  return s;
}

VertexSet VertexSet::unite(const VertexSet& other) const {
  VertexSet s;
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(s.members_));
  return s;
}

VertexSet VertexSet::intersect(const VertexSet& other) const {
  VertexSet s;
  std::set_intersection(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                        std::back_inserter(s.members_));
  return s;
}

VertexSet VertexSet::minus(const VertexSet& other) const {
  VertexSet s;
  std::set_difference(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                      std::back_inserter(s.members_));
  return s;
}

std::vector<char> VertexSet::mask(Vertex n) const {
  std::vector<char> m(static_cast<std::size_t>(n), 0);
  for (Vertex x : members_) {
    if (x >= n) throw InputError("vertex " + std::to_string(x) + " out of range for n=" + std::to_string(n));
    m[static_cast<std::size_t>(x)] = 1;
  }
  return m;
}

std::string VertexSet::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i) os << ',';
    os << members_[i];
  }
  return os.str();
}

VertexSet parse_vertex_list(const std::string& text) {
  std::vector<Vertex> ids;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
    if (tok.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw InputError("bad vertex id '" + tok + "'");
    }
    if (used != tok.size()) throw InputError("bad vertex id '" + tok + "'");
    ids.push_back(static_cast<Vertex>(v));
  }
  return VertexSet(std::move(ids));
}

Space::Space(Eigen::VectorXd measure, const std::vector<std::pair<Vertex, Vertex>>& ref_edges)
    : measure_(std::move(measure)) {
  const Vertex n = size();
  if (n < 1) throw InputError("space needs at least one vertex");
  for (Vertex x = 0; x < n; ++x) {
    if (!(measure_[x] > 0.0) || !std::isfinite(measure_[x])) {
      throw InputError("measure of vertex " + std::to_string(x) + " must be positive");
    }
  }
  adjacency_.assign(static_cast<std::size_t>(n), {});
  for (auto [i, j] : ref_edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw InputError("reference edge out of range");
    if (i == j) throw InputError("reference self-loop at vertex " + std::to_string(i));
    adjacency_[static_cast<std::size_t>(i)].push_back(j);
    adjacency_[static_cast<std::size_t>(j)].push_back(i);
  }
  for (auto& nb : adjacency_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

Space Space::uniform(Vertex n, const std::vector<std::pair<Vertex, Vertex>>& ref_edges) {
  return Space(Eigen::VectorXd::Ones(n), ref_edges);
}

bool Space::adjacent(Vertex x, Vertex y) const {
  const auto& nb = neighbors(x);
  return std::binary_search(nb.begin(), nb.end(), y);
}

std::vector<std::pair<Vertex, Vertex>> Space::ref_edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  for (Vertex x = 0; x < size(); ++x) {
    for (Vertex y : neighbors(x)) {
      if (x < y) out.emplace_back(x, y);
    }
  }
  return out;
}

Space Space::restrict_to(const VertexSet& s) const {
  std::vector<Vertex> relabel(static_cast<std::size_t>(size()), -1);
  Eigen::VectorXd m(static_cast<Eigen::Index>(s.size()));
  Vertex k = 0;
  for (Vertex x : s) {
    relabel[static_cast<std::size_t>(x)] = k;
    m[k++] = measure_[x];
  }
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (auto [i, j] : ref_edges()) {
    Vertex a = relabel[static_cast<std::size_t>(i)];
    Vertex b = relabel[static_cast<std::size_t>(j)];
    if (a >= 0 && b >= 0) edges.emplace_back(a, b);
  }
  return Space(std::move(m), edges);
}

VertexSet Space::ball(Vertex center, int radius) const {
  if (radius < 0) return {};
  if (center < 0 || center >= size()) throw InputError("ball center out of range");
  std::vector<int> dist(static_cast<std::size_t>(size()), -1);
  std::queue<Vertex> q;
  dist[static_cast<std::size_t>(center)] = 0;
  q.push(center);
  std::vector<Vertex> out;
  while (!q.empty()) {
    Vertex x = q.front();
    q.pop();
    out.push_back(x);
    int d = dist[static_cast<std::size_t>(x)];
    if (d == radius) continue;
    for (Vertex y : neighbors(x)) {
      if (dist[static_cast<std::size_t>(y)] < 0) {
        dist[static_cast<std::size_t>(y)] = d + 1;
        q.push(y);
      }
    }
  }
  return VertexSet(std::move(out));
}

VertexSet boundary(const Space& space, const VertexSet& a) {
  const auto in = a.mask(space.size());
  std::vector<Vertex> out;
  for (Vertex x : a) {
    for (Vertex y : space.neighbors(x)) {
      if (!in[static_cast<std::size_t>(y)]) {
        out.push_back(x);
        break;
      }
    }
  }
  return VertexSet(std::move(out));
}

VertexSet thickened_complement(const Space& space, const VertexSet& a) {
  return a.complement(space.size()).unite(boundary(space, a));
}

VertexSet interior(const Space& space, const VertexSet& a) { return a.minus(boundary(space, a)); }

}  // namespace dfield
