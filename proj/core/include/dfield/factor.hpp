#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "dfield/dirichlet_form.hpp"

namespace dfield {

/// Cholesky factor P Q_g P^T = L L^T of Q with the rows and columns of one vertex per
/// unkilled component removed. For v in range(Q):
///   Q+ v = center(solve(v)),   v^T Q+ u = (L^-1 P v_g) . (L^-1 P u_g).
/// The second identity is what lets every covariance computation run in white-noise
/// coordinates without forming Q+. Factor and triangular solves run in long double; inputs
/// and outputs are double.
class GroundedFactor {
 public:
  GroundedFactor(const SparseMatrix& q, std::vector<Vertex> ground);

  Vertex size() const { return n_; }
  const std::vector<Vertex>& ground() const { return ground_; }
  const std::vector<Vertex>& free_vertices() const { return free_; }
  /// Dimension of the white-noise space (= rank of Q).
  Eigen::Index rank() const { return static_cast<Eigen::Index>(free_.size()); }

  /// Solution of Q_g x = v_g padded with zeros at the grounded vertices.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& v) const;
  /// Columns L^-1 P V_g; rows indexed by white-noise coordinates.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& v) const;
  /// P^T L^-T Z padded with zeros at the grounded vertices (covariance Q_g^-1 for white Z).
  Eigen::MatrixXd color(const Eigen::MatrixXd& z) const;

 private:
  using Wide = long double;
  using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;

  WideMatrix gather(const Eigen::MatrixXd& v) const;
  Eigen::MatrixXd scatter(const WideMatrix& x) const;

  Vertex n_;
  std::vector<Vertex> ground_;
  std::vector<Vertex> free_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<Wide>> llt_;
};

}  // namespace dfield
