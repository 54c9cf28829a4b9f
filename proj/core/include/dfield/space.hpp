#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dfield {

using Vertex = Eigen::Index;

/// Base class of every error raised by the library for bad input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted, duplicate-free set of vertex ids.
class VertexSet {
 public:
  VertexSet() = default;
  VertexSet(std::initializer_list<Vertex> ids);
  explicit VertexSet(std::vector<Vertex> ids);

  static VertexSet all(Vertex n);
  static VertexSet range(Vertex first, Vertex last);  // [first, last)

  const std::vector<Vertex>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(Vertex x) const;
  bool is_subset_of(const VertexSet& other) const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  VertexSet complement(Vertex n) const;
  VertexSet unite(const VertexSet& other) const;
  VertexSet intersect(const VertexSet& other) const;
  VertexSet minus(const VertexSet& other) const;

  /// Membership mask of length n.
  std::vector<char> mask(Vertex n) const;

  std::string to_string() const;  // "0,1,5"

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<Vertex> members_;
};

/// Parses a comma separated id list such as "0,1,4". Empty string is the empty set.
VertexSet parse_vertex_list(const std::string& text);

/// Finite state space: vertex measure plus the reference adjacency that plays the
/// role of the topology (closures and boundaries are taken with respect to it).
class Space {
 public:
  Space(Eigen::VectorXd measure, const std::vector<std::pair<Vertex, Vertex>>& ref_edges);

  /// Unit measure on n vertices.
  static Space uniform(Vertex n, const std::vector<std::pair<Vertex, Vertex>>& ref_edges);

  Vertex size() const { return static_cast<Vertex>(measure_.size()); }
  const Eigen::VectorXd& measure() const { return measure_; }
  const std::vector<Vertex>& neighbors(Vertex x) const { return adjacency_[static_cast<std::size_t>(x)]; }
  bool adjacent(Vertex x, Vertex y) const;
  /// Reference edges as (i, j) with i < j, sorted.
  std::vector<std::pair<Vertex, Vertex>> ref_edges() const;

  /// Restriction to the vertices of `s`, relabelled 0..|s|-1 in increasing order.
  Space restrict_to(const VertexSet& s) const;

  /// Vertices within graph distance `radius` of `center` (empty when radius < 0).
  VertexSet ball(Vertex center, int radius) const;

 private:
  Eigen::VectorXd measure_;
  std::vector<std::vector<Vertex>> adjacency_;
};

/// Inner vertex boundary: members of `a` with a reference neighbour outside `a`.
VertexSet boundary(const Space& space, const VertexSet& a);

/// Complement of `a` together with its boundary; the discrete closure of a^c.
VertexSet thickened_complement(const Space& space, const VertexSet& a);

/// Members of `a` that are not boundary points.
VertexSet interior(const Space& space, const VertexSet& a);

}  // namespace dfield
