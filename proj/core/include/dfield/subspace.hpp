#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "dfield/gaussian_field.hpp"

namespace dfield {

/// Linear span of field functionals (each column v stands for v.h), representing a
/// sigma-field of the field up to null sets. Columns are kept Euclidean-orthonormal.
class FunctionalSubspace {
 public:
  /// Orthonormalizes `vectors` (rank cutoff 1e-10 relative to the largest column norm).
  /// Every column must lie in range(Q).
  FunctionalSubspace(const GaussianField& field, const Eigen::MatrixXd& vectors);
  static FunctionalSubspace zero(const GaussianField& field);

  std::uint64_t field_id() const { return field_id_; }
  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  FunctionalSubspace(std::uint64_t field_id, Eigen::MatrixXd orthonormal_basis);
  static FunctionalSubspace like(const FunctionalSubspace& other, Eigen::MatrixXd orthonormal_basis) {
    return FunctionalSubspace(other.field_id_, std::move(orthonormal_basis));
  }
  friend FunctionalSubspace sigma_field(const GaussianField&, const VertexSet&);
  friend FunctionalSubspace join(const FunctionalSubspace&, const FunctionalSubspace&);
  friend FunctionalSubspace meet(const FunctionalSubspace&, const FunctionalSubspace&);

  std::uint64_t field_id_;
  Eigen::MatrixXd basis_;
};

/// {v in range(Q) : supp v subset of A}.
FunctionalSubspace sigma_field(const GaussianField& field, const VertexSet& a);

FunctionalSubspace join(const FunctionalSubspace& w1, const FunctionalSubspace& w2);
/// Intersection, from principal angles: directions with cosine >= 1 - 1e-10.
FunctionalSubspace meet(const FunctionalSubspace& w1, const FunctionalSubspace& w2);

/// Spectral norm of (I - P_outer) applied to an orthonormal basis of `inner`; zero iff inner
/// is contained in outer.
double containment_residual(const FunctionalSubspace& inner, const FunctionalSubspace& outer);
bool contains(const FunctionalSubspace& outer, const FunctionalSubspace& inner, double tol = 1e-10);

/// Orthogonal projection of the functional v onto W in the covariance inner product, i.e.
/// the functional of E(v.h | W).
Eigen::VectorXd project(const GaussianField& field, const FunctionalSubspace& w, const Eigen::VectorXd& v);

/// Functional of E(X_f | sigma(A)), computed as Q H_A f.
Eigen::VectorXd cond_expect(const GaussianField& field, const Eigen::VectorXd& f, const VertexSet& a);

struct CondIndepResult {
  bool holds = true;
  /// Largest canonical partial correlation between U and V given W, in [0, 1].
  double max_violation = 0.0;
  double tol = 0.0;
  /// Maximizing pair of functionals (empty when nothing survives conditioning).
  Eigen::VectorXd witness_u;
  Eigen::VectorXd witness_v;
};

/// Tests whether U and V are conditionally independent given W. The statistic is basis
/// independent: after removing W from both sides, it is the cosine of the smallest
/// principal angle between what remains, in the covariance inner product.
CondIndepResult cond_indep(const GaussianField& field, const FunctionalSubspace& u, const FunctionalSubspace& v,
                           const FunctionalSubspace& w, double tol = 1e-9);

}  // namespace dfield
