#include "dfield/factor.hpp"

#include <algorithm>

namespace dfield {

GroundedFactor::GroundedFactor(const SparseMatrix& q, std::vector<Vertex> ground)
    : n_(q.rows()), ground_(std::move(ground)) {
  std::sort(ground_.begin(), ground_.end());
  std::vector<Vertex> relabel(static_cast<std::size_t>(n_), -1);
  for (Vertex x = 0, k = 0, g = 0; x < n_; ++x) {
    if (g < static_cast<Vertex>(ground_.size()) && ground_[static_cast<std::size_t>(g)] == x) {
      ++g;
      continue;
    }
    free_.push_back(x);
    relabel[static_cast<std::size_t>(x)] = k++;
  }
  if (free_.empty()) return;

  const auto m = static_cast<Eigen::Index>(free_.size());
  std::vector<Eigen::Triplet<Wide>> trips;
  for (Eigen::Index col = 0; col < q.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(q, col); it; ++it) {
      Vertex a = relabel[static_cast<std::size_t>(it.row())];
      Vertex b = relabel[static_cast<std::size_t>(it.col())];
      if (a >= 0 && b >= 0) trips.emplace_back(a, b, static_cast<Wide>(it.value()));
    }
  }
  Eigen::SparseMatrix<Wide> qg(m, m);
  qg.setFromTriplets(trips.begin(), trips.end());
  llt_.compute(qg);
  if (llt_.info() != Eigen::Success) throw SingularSystemError("grounded form is not positive definite");
}

GroundedFactor::WideMatrix GroundedFactor::gather(const Eigen::MatrixXd& v) const {
  WideMatrix out(rank(), v.cols());
  for (Eigen::Index k = 0; k < rank(); ++k) out.row(k) = v.row(free_[static_cast<std::size_t>(k)]).cast<Wide>();
  return out;
}

Eigen::MatrixXd GroundedFactor::scatter(const WideMatrix& x) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, x.cols());
  for (Eigen::Index k = 0; k < rank(); ++k) out.row(free_[static_cast<std::size_t>(k)]) = x.row(k).cast<double>();
  return out;
}

Eigen::MatrixXd GroundedFactor::solve(const Eigen::MatrixXd& v) const {
  if (rank() == 0) return Eigen::MatrixXd::Zero(n_, v.cols());
  WideMatrix x = llt_.solve(gather(v));
  return scatter(x);
}

Eigen::MatrixXd GroundedFactor::whiten(const Eigen::MatrixXd& v) const {
  if (rank() == 0) return Eigen::MatrixXd::Zero(0, v.cols());
  WideMatrix pv = llt_.permutationP() * gather(v);
  llt_.matrixL().solveInPlace(pv);
  return pv.cast<double>();
}

Eigen::MatrixXd GroundedFactor::color(const Eigen::MatrixXd& z) const {
  if (rank() == 0) return Eigen::MatrixXd::Zero(n_, z.cols());
  WideMatrix x = z.cast<Wide>();
  llt_.matrixU().solveInPlace(x);
  return scatter(llt_.permutationPinv() * x);
}

}  // namespace dfield
