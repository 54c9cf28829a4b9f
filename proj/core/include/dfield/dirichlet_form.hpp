#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dfield/space.hpp"

namespace dfield {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct WeightedEdge {
  Vertex i;
  Vertex j;
  double weight;
};

enum class Recurrence { Transient, Recurrent, Mixed };
enum class Connectivity { Irreducible, Reducible };

struct Classification {
  Recurrence recurrence;
  Connectivity connectivity;
};

std::string to_string(Recurrence r);
std::string to_string(Connectivity c);

/// Raised when a matrix fails the finite Markovian criterion. Carries a test
/// function f with E(0 v f ^ 1) > E(f, f) when one was found.
class NonMarkovianError : public InputError {
 public:
  NonMarkovianError(const std::string& what, Eigen::VectorXd witness)
      : InputError(what), witness_(std::move(witness)) {}
  const Eigen::VectorXd& witness() const { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

/// Raised when a Dirichlet sub-problem or grounded system is singular.
class SingularSystemError : public InputError {
 public:
  using InputError::InputError;
};

struct MarkovianOptions {
  int probes = 1000;
  std::uint64_t seed = 0x5eedULL;
  double tol = 1e-12;  // relative to the largest diagonal entry
};

class GroundedFactor;

namespace detail {
struct FormCache;
}

/// Symmetric Markovian quadratic form E(f, g) = f^T Q g on a finite space, stored
/// together with its jump weights w and killing k (Q_xy = -w_xy, Q_xx = sum_y w_xy + k_x).
///
/// Immutable. Copies share a lazily built, internally synchronized factorization cache.
class DirichletForm {
 public:
  const Space& space() const { return space_; }
  Vertex size() const { return space_.size(); }
  const SparseMatrix& matrix() const { return q_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(q_); }
  /// Positive jump weights, each undirected edge once with i < j, sorted.
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const Eigen::VectorXd& killing() const { return killing_; }

  /// Component label per vertex for the graph of nonzero jump weights.
  const std::vector<Vertex>& component_of() const { return component_; }
  Vertex component_count() const { return static_cast<Vertex>(component_killed_.size()); }
  /// True when the component carries killing, i.e. Q restricted to it is invertible.
  bool component_killed(Vertex c) const { return component_killed_[static_cast<std::size_t>(c)] != 0; }
  bool nonsingular() const;

  /// Projects v onto range(Q): subtracts the per-component mean on unkilled components.
  void project_to_range(Eigen::Ref<Eigen::VectorXd> v) const;
  /// Largest |sum of v over an unkilled component|; zero iff v lies in range(Q).
  double range_defect(const Eigen::VectorXd& v) const;

  /// Sparse Cholesky of Q with one vertex grounded per unkilled component.
  const GroundedFactor& grounded_factor() const;

 private:
  DirichletForm(Space space, std::vector<WeightedEdge> edges, Eigen::VectorXd killing,
                const Eigen::VectorXd* exact_diagonal = nullptr);
  friend DirichletForm form_from_components(Space, std::vector<WeightedEdge>, Eigen::VectorXd);
  friend DirichletForm validate_markovian(const Space&, const Eigen::MatrixXd&, const MarkovianOptions&);

  Space space_;
  std::vector<WeightedEdge> edges_;
  Eigen::VectorXd killing_;
  SparseMatrix q_;
  std::vector<Vertex> component_;
  std::vector<char> component_killed_;
  std::shared_ptr<detail::FormCache> cache_;
};

/// Assembles Q from jump weights and killing. Rejects negative or non-finite weights,
/// self-loops and duplicate edges. Zero weights are dropped.
DirichletForm form_from_components(Space space, std::vector<WeightedEdge> edges, Eigen::VectorXd killing);

/// Accepts a symmetric matrix iff off-diagonals are <= 0 and row sums >= 0 (the finite
/// form of the normal-contraction property), cross-checked with random contraction
/// probes. Returns the decomposed form.
DirichletForm validate_markovian(const Space& space, const Eigen::MatrixXd& q, const MarkovianOptions& opts = {});

/// Every nonzero jump weight lies on a reference edge.
bool is_local_wrt(const DirichletForm& form);

/// Jump edges that are not reference edges.
std::vector<WeightedEdge> nonlocal_edges(const DirichletForm& form);

Classification classify(const DirichletForm& form);

/// The unit contraction 0 v f ^ 1, entrywise.
Eigen::VectorXd unit_contraction(const Eigen::VectorXd& f);

}  // namespace dfield
